#pragma once

#include <cstdint>
#include <string>

#include "leadlag/common.hpp"

namespace leadlag {

// Shape and dynamics of a generated benchmark corpus. Science topic
// intensities follow a seeded bounded random walk; industry activity copies
// the science stream shifted forward by planted_lag, with per-(topic, year)
// count noise of magnitude noise_level.
struct SynthConfig {
    std::uint64_t seed = 42;
    int n_root_topics = 4;
    int branching = 3;
    int depth = 3;
    YearRange years = {2010, 2021};
    int planted_lag = 3;
    double noise_level = 0.0;
    int docs_per_topic_year = 6;
    int embedding_dim = 16;
    double cluster_drift = 1.0;
};

struct SynthOutput {
    std::string taxonomy_path;
    std::string documents_path;
    std::string embeddings_path; // binary sidecar; ids in <path>.ids
    std::string manifest_path;
    std::size_t n_topics = 0;
    std::size_t n_documents = 0;
};

// Writes taxonomy.jsonl, documents.jsonl, embeddings.bin (+ .ids) and
// manifest.json under out_dir. Byte-identical output for identical configs.
// With noise_level == 0 the industry document stream of year t is an exact
// topic-for-topic copy of the science stream of year t - planted_lag, so
// frequency signals are exactly lag-shifted. Industry embeddings are drawn
// around the science centroid of (year - planted_lag). Every topic is
// guaranteed at least one industry document. Throws InputError when the
// config is infeasible (planted_lag >= year span, non-positive counts).
SynthOutput generate(const SynthConfig& config, const std::string& out_dir);

} // namespace leadlag
