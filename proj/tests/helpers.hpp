#pragma once

#include <atomic>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

// Shared fixture plumbing for the unit tests.
namespace testutil {

inline std::string fresh_dir(const std::string& tag) {
    static std::atomic<int> counter{0};
    auto dir = std::filesystem::temp_directory_path() /
               ("leadlag_test_" + tag + "_" + std::to_string(counter.fetch_add(1)));
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir.string();
}

inline std::string write_lines(const std::string& dir, const std::string& name,
                               const std::vector<std::string>& lines) {
    auto path = (std::filesystem::path(dir) / name).string();
    std::ofstream out(path, std::ios::binary);
    for (const auto& line : lines) out << line << '\n';
    return path;
}

inline std::string doc_line(const std::string& id, const std::string& corpus, int year,
                            const std::vector<std::string>& topics, double weight) {
    std::ostringstream os;
    os << "{\"id\":\"" << id << "\",\"corpus\":\"" << corpus << "\",\"year\":" << year << ",\"topics\":[";
    for (size_t i = 0; i < topics.size(); ++i) {
        if (i) os << ',';
        os << '"' << topics[i] << '"';
    }
    os << "],\"weight\":" << weight << "}";
    return os.str();
}

inline std::string topic_line(const std::string& id, const std::vector<std::string>& tree_numbers) {
    std::ostringstream os;
    os << "{\"id\":\"" << id << "\",\"label\":\"" << id << "\",\"tree_numbers\":[";
    for (size_t i = 0; i < tree_numbers.size(); ++i) {
        if (i) os << ',';
        os << '"' << tree_numbers[i] << '"';
    }
    os << "]}";
    return os.str();
}

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

} // namespace testutil
