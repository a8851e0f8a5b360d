#pragma once

#include <stdexcept>
#include <string>

namespace leadlag {

// Bad or inconsistent input data (unreadable file, schema violation, ...).
// The CLI maps this to exit code 2.
struct InputError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A computation could not produce a meaningful result (degenerate variance,
// absent quantizer pool, ...). The CLI maps this to exit code 3.
struct NumericError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class Corpus { science, industry };

inline const char* corpus_name(Corpus c) {
    return c == Corpus::science ? "science" : "industry";
}

// Inclusive calendar-year range, e.g. [2010, 2021].
struct YearRange {
    int first = 2010;
    int last = 2021;

    int span() const { return last - first + 1; }
    bool contains(int y) const { return y >= first && y <= last; }
    int index(int y) const { return y - first; }
    int year_at(int idx) const { return first + idx; }

    bool operator==(const YearRange&) const = default;
};

} // namespace leadlag
