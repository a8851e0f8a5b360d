#include "leadlag/content.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <json.hpp>

#include "leadlag/csv.hpp"
#include "leadlag/rng.hpp"

namespace leadlag {

using nlohmann::json;

namespace {

using Matrix = std::vector<std::vector<double>>; // columns

// Covariance-vector products without materializing the D x D matrix:
// C v = (1/(n-1)) * sum_i centered_i * (centered_i . v).
struct CovarianceOperator {
    const std::vector<std::span<const float>>& rows;
    std::vector<double> mean;
    double trace = 0.0;

    explicit CovarianceOperator(const std::vector<std::span<const float>>& r) : rows(r) {
        auto n = rows.size();
        auto dim = rows[0].size();
        mean.assign(dim, 0.0);
        for (const auto& row : rows)
            for (std::size_t j = 0; j < dim; ++j) mean[j] += row[j];
        for (auto& m : mean) m /= static_cast<double>(n);
        for (const auto& row : rows) {
            double sq = 0.0;
            for (std::size_t j = 0; j < dim; ++j) {
                double d = row[j] - mean[j];
                sq += d * d;
            }
            trace += sq;
        }
        trace /= static_cast<double>(n - 1);
    }

    std::vector<double> apply(const std::vector<double>& v) const {
        auto dim = mean.size();
        std::vector<double> out(dim, 0.0);
        for (const auto& row : rows) {
            double dot = 0.0;
            for (std::size_t j = 0; j < dim; ++j) dot += (row[j] - mean[j]) * v[j];
            for (std::size_t j = 0; j < dim; ++j) out[j] += dot * (row[j] - mean[j]);
        }
        for (auto& x : out) x /= static_cast<double>(rows.size() - 1);
        return out;
    }
};

double dot(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double norm(const std::vector<double>& a) { return std::sqrt(dot(a, a)); }

// Modified Gram-Schmidt; columns that vanish are replaced by a deterministic
// orthonormal completion from the coordinate basis.
void orthonormalize(Matrix& v) {
    auto dim = v[0].size();
    for (std::size_t c = 0; c < v.size(); ++c) {
        for (std::size_t p = 0; p < c; ++p) {
            double proj = dot(v[c], v[p]);
            for (std::size_t j = 0; j < dim; ++j) v[c][j] -= proj * v[p][j];
        }
        double len = norm(v[c]);
        if (len > 1e-150) {
            for (auto& x : v[c]) x /= len;
            continue;
        }
        for (std::size_t basis = 0; basis < dim; ++basis) {
            std::vector<double> cand(dim, 0.0);
            cand[basis] = 1.0;
            for (std::size_t p = 0; p < c; ++p) {
                double proj = dot(cand, v[p]);
                for (std::size_t j = 0; j < dim; ++j) cand[j] -= proj * v[p][j];
            }
            double clen = norm(cand);
            if (clen > 0.5) {
                for (auto& x : cand) x /= clen;
                v[c] = std::move(cand);
                break;
            }
        }
    }
}

// Jacobi eigensolver for the small Ritz matrix (q <= 4).
void jacobi_eigen(std::vector<std::vector<double>> a, std::vector<double>& eigenvalues,
                  std::vector<std::vector<double>>& eigenvectors) {
    auto q = a.size();
    eigenvectors.assign(q, std::vector<double>(q, 0.0));
    for (std::size_t i = 0; i < q; ++i) eigenvectors[i][i] = 1.0;

    for (int sweep = 0; sweep < 100; ++sweep) {
        double off = 0.0;
        for (std::size_t i = 0; i < q; ++i)
            for (std::size_t j = i + 1; j < q; ++j) off += a[i][j] * a[i][j];
        if (off < 1e-32) break;
        for (std::size_t p = 0; p < q; ++p) {
            for (std::size_t r = p + 1; r < q; ++r) {
                if (std::abs(a[p][r]) < 1e-300) continue;
                double theta = (a[r][r] - a[p][p]) / (2.0 * a[p][r]);
                double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                double c = 1.0 / std::sqrt(t * t + 1.0);
                double s = t * c;
                for (std::size_t k = 0; k < q; ++k) {
                    double akp = a[k][p], akr = a[k][r];
                    a[k][p] = c * akp - s * akr;
                    a[k][r] = s * akp + c * akr;
                }
                for (std::size_t k = 0; k < q; ++k) {
                    double apk = a[p][k], ark = a[r][k];
                    a[p][k] = c * apk - s * ark;
                    a[r][k] = s * apk + c * ark;
                }
                for (std::size_t k = 0; k < q; ++k) {
                    double vkp = eigenvectors[k][p], vkr = eigenvectors[k][r];
                    eigenvectors[k][p] = c * vkp - s * vkr;
                    eigenvectors[k][r] = s * vkp + c * vkr;
                }
            }
        }
    }
    eigenvalues.assign(q, 0.0);
    for (std::size_t i = 0; i < q; ++i) eigenvalues[i] = a[i][i];
}

void fix_axis_sign(std::vector<double>& axis) {
    std::size_t arg = 0;
    double best = 0.0;
    for (std::size_t j = 0; j < axis.size(); ++j) {
        if (std::abs(axis[j]) > best) {
            best = std::abs(axis[j]);
            arg = j;
        }
    }
    if (axis[arg] < 0)
        for (auto& x : axis) x = -x;
}

} // namespace

std::pair<double, double> Projection::project(std::span<const float> v) const {
    double x = 0.0, y = 0.0;
    for (std::size_t j = 0; j < mean.size(); ++j) {
        double centered = v[j] - mean[j];
        x += centered * axes[0][j];
        y += centered * axes[1][j];
    }
    return {x, y};
}

Projection fit_projection(const std::vector<std::span<const float>>& vectors) {
    if (vectors.size() < 3) throw NumericError("fit_projection: need at least 3 vectors");
    auto dim = vectors[0].size();
    if (dim < 2) throw NumericError("fit_projection: dimension must be at least 2");
    for (const auto& v : vectors)
        if (v.size() != dim) throw NumericError("fit_projection: inconsistent dimensions");

    CovarianceOperator cov(vectors);
    if (cov.trace <= 1e-28) throw NumericError("fit_projection: degenerate variance (all vectors identical)");

    auto q = std::min<std::size_t>(dim, 4);
    Matrix v(q, std::vector<double>(dim));
    Rng rng(0x5eed2d2dULL); // fixed start; the fit is a pure function of the input
    for (auto& col : v)
        for (auto& x : col) x = rng.normal();
    orthonormalize(v);

    std::vector<double> ritz_values(q, 0.0);
    Matrix ritz_vectors;
    for (int iter = 0; iter < 20000; ++iter) {
        Matrix w(q);
        for (std::size_t c = 0; c < q; ++c) w[c] = cov.apply(v[c]);

        std::vector<std::vector<double>> b(q, std::vector<double>(q, 0.0));
        for (std::size_t i = 0; i < q; ++i)
            for (std::size_t j = 0; j < q; ++j) b[i][j] = dot(v[i], w[j]);
        for (std::size_t i = 0; i < q; ++i)
            for (std::size_t j = i + 1; j < q; ++j) {
                double sym = 0.5 * (b[i][j] + b[j][i]);
                b[i][j] = b[j][i] = sym;
            }

        std::vector<double> lambda;
        std::vector<std::vector<double>> s;
        jacobi_eigen(b, lambda, s);

        std::vector<std::size_t> order(q);
        for (std::size_t i = 0; i < q; ++i) order[i] = i;
        std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return lambda[x] > lambda[y]; });

        // Ritz vectors u_k = V s_k and their images C u_k = W s_k.
        Matrix u(q, std::vector<double>(dim, 0.0));
        Matrix cu(q, std::vector<double>(dim, 0.0));
        for (std::size_t k = 0; k < q; ++k) {
            auto src = order[k];
            ritz_values[k] = lambda[src];
            for (std::size_t c = 0; c < q; ++c) {
                double coef = s[c][src];
                for (std::size_t j = 0; j < dim; ++j) {
                    u[k][j] += coef * v[c][j];
                    cu[k][j] += coef * w[c][j];
                }
            }
        }

        double lead = std::max(ritz_values[0], 1e-300);
        bool converged = true;
        for (std::size_t k = 0; k < 2 && k < q; ++k) {
            if (ritz_values[k] <= 1e-14 * lead) continue; // nullspace axis, any unit vector works
            std::vector<double> resid(dim);
            for (std::size_t j = 0; j < dim; ++j) resid[j] = cu[k][j] - ritz_values[k] * u[k][j];
            if (norm(resid) > 1e-13 * lead) converged = false;
        }

        ritz_vectors = u;
        if (converged && iter > 0) break;

        // Power step on the Ritz vectors.
        v = cu;
        orthonormalize(v);
    }

    Projection proj;
    proj.mean = cov.mean;
    proj.total_variance = cov.trace;
    orthonormalize(ritz_vectors);
    for (int k = 0; k < 2; ++k) {
        proj.axes[k] = ritz_vectors[static_cast<std::size_t>(k)];
        proj.explained_variance[k] = std::max(0.0, ritz_values[static_cast<std::size_t>(k)]);
        fix_axis_sign(proj.axes[k]);
    }
    return proj;
}

CoordTable import_projection(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot open coordinate file: " + path);
    CoordTable table;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        json rec = json::parse(line, nullptr, false);
        if (rec.is_discarded() || !rec.contains("id") || !rec["id"].is_string() || !rec.contains("x") ||
            !rec["x"].is_number() || !rec.contains("y") || !rec["y"].is_number())
            throw InputError("malformed coordinate record at " + path + ":" + std::to_string(line_no));
        std::string id = rec["id"].get<std::string>();
        double x = rec["x"].get<double>();
        double y = rec["y"].get<double>();
        if (!std::isfinite(x) || !std::isfinite(y)) throw InputError("non-finite coordinate for id: " + id);
        if (!table.coords.emplace(id, std::make_pair(x, y)).second) throw InputError("duplicate coordinate id: " + id);
    }
    return table;
}

void export_projection(const CoordTable& table, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError("cannot open for writing: " + path);
    std::vector<std::string> ids;
    ids.reserve(table.coords.size());
    for (const auto& [id, _] : table.coords) ids.push_back(id);
    std::sort(ids.begin(), ids.end());
    for (const auto& id : ids) {
        auto [x, y] = table.coords.at(id);
        out << "{\"id\":\"" << id << "\",\"x\":" << format_double(x) << ",\"y\":" << format_double(y) << "}\n";
    }
}

double DensityGrid::total() const {
    double s = 0.0;
    for (double c : cells) s += c;
    return s;
}

DensityGrid grid_density(const std::vector<std::pair<double, double>>& points, const std::vector<double>& weights,
                         const Bounds& bounds, int b1, int b2) {
    if (points.size() != weights.size()) throw NumericError("grid_density: points/weights size mismatch");
    if (b1 < 1 || b2 < 1) throw NumericError("grid_density: invalid bin counts");
    if (!(bounds.xmax > bounds.xmin) || !(bounds.ymax > bounds.ymin))
        throw NumericError("grid_density: degenerate bounds");

    DensityGrid grid;
    grid.b1 = b1;
    grid.b2 = b2;
    grid.bounds = bounds;
    grid.cells.assign(static_cast<std::size_t>(b1) * b2, 0.0);

    double xspan = bounds.xmax - bounds.xmin;
    double yspan = bounds.ymax - bounds.ymin;
    for (std::size_t i = 0; i < points.size(); ++i) {
        auto [x, y] = points[i];
        if (x < bounds.xmin || x > bounds.xmax || y < bounds.ymin || y > bounds.ymax)
            throw NumericError("grid_density: point outside bounds");
        int ix = x == bounds.xmax ? b1 - 1 : static_cast<int>((x - bounds.xmin) / xspan * b1);
        int iy = y == bounds.ymax ? b2 - 1 : static_cast<int>((y - bounds.ymin) / yspan * b2);
        ix = std::clamp(ix, 0, b1 - 1);
        iy = std::clamp(iy, 0, b2 - 1);
        grid.at(ix, iy) += weights[i];
    }
    return grid;
}

DensityGrid smooth_and_normalize(const DensityGrid& grid, double bandwidth) {
    if (!(bandwidth > 0)) throw NumericError("smooth_and_normalize: bandwidth must be positive");

    int radius = static_cast<int>(std::ceil(4.0 * bandwidth));
    std::vector<double> kernel(static_cast<std::size_t>(2 * radius + 1));
    for (int d = -radius; d <= radius; ++d)
        kernel[static_cast<std::size_t>(d + radius)] = std::exp(-0.5 * d * d / (bandwidth * bandwidth));

    // Weighted average over the in-grid kernel window, per axis. The kernel
    // is renormalized by its in-grid portion at each destination, so borders
    // neither leak nor over-count mass and a uniform grid is a fixed point.
    auto blur_axis = [&](const std::vector<double>& in, std::vector<double>& out, int b1, int b2, bool along_x) {
        int extent = along_x ? b1 : b2;
        std::vector<double> weight_sum(static_cast<std::size_t>(extent));
        for (int d = 0; d < extent; ++d) {
            double w = 0.0;
            for (int s = std::max(0, d - radius); s <= std::min(extent - 1, d + radius); ++s)
                w += kernel[static_cast<std::size_t>(s - d + radius)];
            weight_sum[static_cast<std::size_t>(d)] = w;
        }
        for (int ix = 0; ix < b1; ++ix) {
            for (int iy = 0; iy < b2; ++iy) {
                int d = along_x ? ix : iy;
                double acc = 0.0;
                for (int s = std::max(0, d - radius); s <= std::min(extent - 1, d + radius); ++s) {
                    double w = kernel[static_cast<std::size_t>(s - d + radius)];
                    acc += w * (along_x ? in[static_cast<std::size_t>(s) * b2 + iy]
                                        : in[static_cast<std::size_t>(ix) * b2 + s]);
                }
                out[static_cast<std::size_t>(ix) * b2 + iy] = acc / weight_sum[static_cast<std::size_t>(d)];
            }
        }
    };

    DensityGrid out = grid;
    out.normalized = true;
    double total = grid.total();
    if (total <= 0.0) {
        std::fill(out.cells.begin(), out.cells.end(), 1.0 / static_cast<double>(grid.cells.size()));
        return out;
    }

    std::vector<double> tmp(grid.cells.size());
    blur_axis(grid.cells, tmp, grid.b1, grid.b2, true);
    blur_axis(tmp, out.cells, grid.b1, grid.b2, false);
    double sum = out.total();
    for (auto& c : out.cells) c /= sum;
    return out;
}

namespace {

void check_distance_args(const DensityGrid& p, const DensityGrid& q) {
    if (p.b1 != q.b1 || p.b2 != q.b2) throw NumericError("distance: grid shape mismatch");
    if (!p.normalized || !q.normalized) throw NumericError("distance: grids must be normalized");
}

} // namespace

double tvd(const DensityGrid& p, const DensityGrid& q) {
    check_distance_args(p, q);
    double s = 0.0;
    for (std::size_t i = 0; i < p.cells.size(); ++i) s += std::abs(p.cells[i] - q.cells[i]);
    return 0.5 * s;
}

double hellinger(const DensityGrid& p, const DensityGrid& q) {
    check_distance_args(p, q);
    // Half the squared root-difference equals 1 - sum(sqrt(P*Q)) for
    // unit-mass inputs, and unlike that form it is exactly zero for
    // identical grids instead of sqrt(rounding residue).
    double acc = 0.0;
    for (std::size_t i = 0; i < p.cells.size(); ++i) {
        double d = std::sqrt(p.cells[i]) - std::sqrt(q.cells[i]);
        acc += d * d;
    }
    return std::sqrt(0.5 * acc);
}

namespace {

Bounds union_bounds(const std::vector<std::pair<double, double>>& pts) {
    Bounds b;
    b.xmin = b.xmax = pts[0].first;
    b.ymin = b.ymax = pts[0].second;
    for (const auto& [x, y] : pts) {
        b.xmin = std::min(b.xmin, x);
        b.xmax = std::max(b.xmax, x);
        b.ymin = std::min(b.ymin, y);
        b.ymax = std::max(b.ymax, y);
    }
    // A flat axis (single point or collinear data) gets unit padding so the
    // grid stays well defined.
    if (!(b.xmax > b.xmin)) {
        b.xmin -= 0.5;
        b.xmax += 0.5;
    }
    if (!(b.ymax > b.ymin)) {
        b.ymin -= 0.5;
        b.ymax += 0.5;
    }
    return b;
}

} // namespace

std::vector<SimilarityMatrix> similarity_matrices(const CorpusStore& store, const Taxonomy& taxonomy,
                                                  const EmbeddingTable* embeddings, const CoordTable* coords,
                                                  const TopicKey& key, const std::vector<DistanceMetric>& metrics,
                                                  const QuartileQuantizer& sci_quant,
                                                  const QuartileQuantizer& ind_quant, const ContentOptions& options) {
    if (!coords && !embeddings) throw NumericError("similarity_matrices: need embeddings or imported coordinates");
    auto mask = match_mask(store, taxonomy, key);
    const auto& docs = store.documents();
    int n = store.years().span();

    // Matched documents that carry a spatial representation.
    std::vector<std::uint32_t> usable;
    for (std::uint32_t i = 0; i < docs.size(); ++i) {
        if (!mask[i]) continue;
        if (coords ? coords->contains(docs[i].id) : docs[i].has_embedding && embeddings->contains(docs[i].id))
            usable.push_back(i);
    }
    if (usable.empty()) throw NumericError("topic " + key.label() + " has no embeddable documents");

    // One projection per topic, shared by every year pair.
    std::vector<std::pair<double, double>> projected(usable.size());
    if (coords) {
        for (std::size_t k = 0; k < usable.size(); ++k) projected[k] = coords->at(docs[usable[k]].id);
    } else {
        std::vector<std::span<const float>> rows;
        rows.reserve(usable.size());
        for (auto i : usable) rows.push_back(embeddings->row(docs[i].id));
        Projection proj = fit_projection(rows);
        for (std::size_t k = 0; k < usable.size(); ++k) projected[k] = proj.project(rows[k]);
    }

    std::vector<std::vector<std::size_t>> sci_by_year(static_cast<std::size_t>(n));
    std::vector<std::vector<std::size_t>> ind_by_year(static_cast<std::size_t>(n));
    for (std::size_t k = 0; k < usable.size(); ++k) {
        const Document& d = docs[usable[k]];
        auto yi = static_cast<std::size_t>(store.years().index(d.year));
        (d.corpus == Corpus::science ? sci_by_year : ind_by_year)[yi].push_back(k);
    }

    Bounds global;
    if (!options.per_pair_bounds) global = union_bounds(projected);

    std::vector<SimilarityMatrix> result(metrics.size());
    for (std::size_t mi = 0; mi < metrics.size(); ++mi) {
        result[mi].topic = key;
        result[mi].metric = metrics[mi];
        result[mi].mode = coords ? ProjectionMode::imported : ProjectionMode::pca;
        result[mi].n = n;
        result[mi].years = store.years();
        result[mi].values.assign(static_cast<std::size_t>(n) * n, 0.0);
        result[mi].mask.assign(static_cast<std::size_t>(n) * n, 0);
    }

    std::vector<std::pair<double, double>> pts;
    std::vector<double> wts;
    for (int yp = 0; yp < n; ++yp) {
        const auto& sci_docs = sci_by_year[static_cast<std::size_t>(yp)];
        if (sci_docs.empty()) continue;
        for (int ys = 0; ys < n; ++ys) {
            const auto& ind_docs = ind_by_year[static_cast<std::size_t>(ys)];
            if (ind_docs.empty()) continue;

            Bounds bounds = global;
            if (options.per_pair_bounds) {
                pts.clear();
                for (auto k : sci_docs) pts.push_back(projected[k]);
                for (auto k : ind_docs) pts.push_back(projected[k]);
                bounds = union_bounds(pts);
            }

            auto build = [&](const std::vector<std::size_t>& members, const QuartileQuantizer& quant) {
                pts.clear();
                wts.clear();
                for (auto k : members) {
                    pts.push_back(projected[k]);
                    wts.push_back(quant.document_quartile(usable[k]));
                }
                return smooth_and_normalize(grid_density(pts, wts, bounds, options.bins1, options.bins2),
                                            options.bandwidth);
            };
            DensityGrid sci_grid = build(sci_docs, sci_quant);
            DensityGrid ind_grid = build(ind_docs, ind_quant);

            for (std::size_t mi = 0; mi < metrics.size(); ++mi) {
                double dist = metrics[mi] == DistanceMetric::tvd ? tvd(sci_grid, ind_grid)
                                                                 : hellinger(sci_grid, ind_grid);
                auto cell = static_cast<std::size_t>(yp) * n + ys;
                result[mi].values[cell] = std::clamp(1.0 - dist, 0.0, 1.0);
                result[mi].mask[cell] = 1;
            }
        }
    }
    return result;
}

SimilarityMatrix similarity_matrix(const CorpusStore& store, const Taxonomy& taxonomy,
                                   const EmbeddingTable* embeddings, const CoordTable* coords, const TopicKey& key,
                                   DistanceMetric metric, const QuartileQuantizer& sci_quant,
                                   const QuartileQuantizer& ind_quant, const ContentOptions& options) {
    return similarity_matrices(store, taxonomy, embeddings, coords, key, {metric}, sci_quant, ind_quant,
                               options)[0];
}

TrResult triangular_ratio(const SimilarityMatrix& delta) {
    TrResult res;
    res.topic = delta.topic;
    res.metric = delta.metric;
    double upper = 0.0, lower = 0.0;
    for (int i = 0; i < delta.n; ++i) {
        for (int j = 0; j < delta.n; ++j) {
            if (!delta.present(i, j)) continue;
            (i < j ? upper : lower) += delta.at(i, j);
        }
    }
    res.tr = (1.0 + upper) / (1.0 + lower);
    return res;
}

void export_similarity_csv(const SimilarityMatrix& delta, const std::string& values_path,
                           const std::string& mask_path) {
    std::ofstream values(values_path, std::ios::binary);
    std::ofstream mask(mask_path, std::ios::binary);
    if (!values || !mask) throw InputError("cannot open similarity export files");
    for (int i = 0; i < delta.n; ++i) {
        for (int j = 0; j < delta.n; ++j) {
            if (j) {
                values << ',';
                mask << ',';
            }
            values << format_double(delta.at(i, j));
            mask << (delta.present(i, j) ? '1' : '0');
        }
        values << '\n';
        mask << '\n';
    }
}

} // namespace leadlag
