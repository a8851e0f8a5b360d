#pragma once

#include <array>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "leadlag/signals.hpp"

namespace leadlag {

enum class DistanceMetric { tvd, hellinger };

inline const char* metric_name(DistanceMetric m) {
    return m == DistanceMetric::tvd ? "tvd" : "hellinger";
}

enum class ProjectionMode { pca, imported };

// Two-component linear projection: mean vector plus two orthonormal axes of
// the mean-centered sample covariance (largest eigenvalues first). The sign
// of each axis is fixed so its largest-magnitude coordinate is positive.
struct Projection {
    std::vector<double> mean;
    std::array<std::vector<double>, 2> axes;
    std::array<double, 2> explained_variance = {0.0, 0.0}; // top-2 eigenvalues
    double total_variance = 0.0;                           // covariance trace

    double explained_variance_ratio() const {
        return total_variance > 0 ? (explained_variance[0] + explained_variance[1]) / total_variance : 0.0;
    }

    std::pair<double, double> project(std::span<const float> v) const;
};

// Top-2 principal axes via block orthogonal iteration with Rayleigh-Ritz
// extraction; matrix-free, so the D x D covariance is never materialized.
// Deterministic for a fixed input set. Throws NumericError when the sample
// variance is degenerate (all vectors identical).
Projection fit_projection(const std::vector<std::span<const float>>& vectors);

// Externally computed 2D coordinates (e.g. UMAP), keyed by document id.
struct CoordTable {
    std::unordered_map<std::string, std::pair<double, double>> coords;

    bool contains(const std::string& id) const { return coords.count(id) != 0; }
    std::pair<double, double> at(const std::string& id) const { return coords.at(id); }
    std::size_t size() const { return coords.size(); }
};

// JSONL schema: {"id","x","y"} per line. Throws on duplicate ids and
// non-finite coordinates.
CoordTable import_projection(const std::string& path);
void export_projection(const CoordTable& table, const std::string& path);

struct Bounds {
    double xmin = 0, xmax = 0, ymin = 0, ymax = 0;
};

// b1 x b2 grid of non-negative cell masses over a bounded 2D region.
struct DensityGrid {
    int b1 = 0, b2 = 0;
    Bounds bounds;
    std::vector<double> cells; // cells[ix * b2 + iy]
    bool normalized = false;

    double& at(int ix, int iy) { return cells[static_cast<std::size_t>(ix) * b2 + iy]; }
    double at(int ix, int iy) const { return cells[static_cast<std::size_t>(ix) * b2 + iy]; }
    double total() const;
};

// Bins points with right-open intervals; the maximum coordinate lands in the
// last bin. Cell value is the sum of the quartile weights of its points.
// Throws when bounds are degenerate or a point falls outside them.
DensityGrid grid_density(const std::vector<std::pair<double, double>>& points, const std::vector<double>& weights,
                         const Bounds& bounds, int b1 = 20, int b2 = 20);

// Discrete Gaussian blur with sigma in bin units, kernel truncated at radius
// ceil(4*sigma) and renormalized at borders so no mass leaves the grid, then
// scaled to total mass 1. An all-zero grid becomes the uniform distribution.
DensityGrid smooth_and_normalize(const DensityGrid& grid, double bandwidth = 0.8);

// (1/2) * sum |P - Q| over cells; both grids must be normalized.
double tvd(const DensityGrid& p, const DensityGrid& q);

// sqrt(1 - sum sqrt(P * Q)) over cells (Bhattacharyya form).
double hellinger(const DensityGrid& p, const DensityGrid& q);

// Year-pair content-similarity matrix: values[i][j] = 1 - distance between
// the science density of year index i and the industry density of year
// index j. Cells with an empty side are masked out.
struct SimilarityMatrix {
    TopicKey topic;
    DistanceMetric metric = DistanceMetric::tvd;
    ProjectionMode mode = ProjectionMode::pca;
    int n = 0;
    YearRange years;
    std::vector<double> values; // values[i * n + j]
    std::vector<char> mask;     // 1 = cell present

    double at(int i, int j) const { return values[static_cast<std::size_t>(i) * n + j]; }
    bool present(int i, int j) const { return mask[static_cast<std::size_t>(i) * n + j] != 0; }
};

struct TrResult {
    TopicKey topic;
    DistanceMetric metric = DistanceMetric::tvd;
    double tr = 1.0;
};

struct ContentOptions {
    int bins1 = 20;
    int bins2 = 20;
    double bandwidth = 0.8;
    // Per-year-pair bounds over the union of both point sets by default;
    // set false to share one bounding box across all of a topic's points.
    bool per_pair_bounds = true;
};

// Builds the similarity matrix for every requested metric in one pass (the
// densities are shared between metrics). Uses imported coordinates when
// `coords` is non-null, otherwise fits one PCA projection per topic over all
// of its embeddable documents from both corpora and every year. Only
// documents with embeddings (or imported coordinates) participate. Throws
// NumericError when the topic has no embeddable documents at all.
std::vector<SimilarityMatrix> similarity_matrices(const CorpusStore& store, const Taxonomy& taxonomy,
                                                  const EmbeddingTable* embeddings, const CoordTable* coords,
                                                  const TopicKey& key, const std::vector<DistanceMetric>& metrics,
                                                  const QuartileQuantizer& sci_quant,
                                                  const QuartileQuantizer& ind_quant, const ContentOptions& options);

SimilarityMatrix similarity_matrix(const CorpusStore& store, const Taxonomy& taxonomy,
                                   const EmbeddingTable* embeddings, const CoordTable* coords, const TopicKey& key,
                                   DistanceMetric metric, const QuartileQuantizer& sci_quant,
                                   const QuartileQuantizer& ind_quant, const ContentOptions& options);

// tr = (1 + strict-upper present mass) / (1 + lower-with-diagonal present
// mass). All-masked matrices give exactly 1.
TrResult triangular_ratio(const SimilarityMatrix& delta);

void export_similarity_csv(const SimilarityMatrix& delta, const std::string& values_path,
                           const std::string& mask_path);

} // namespace leadlag
