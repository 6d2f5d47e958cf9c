#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include "cdsm/errors.hpp"
#include "cdsm/matrix.hpp"
#include "cdsm/rng.hpp"

namespace cdsm {

// ---------------------------------------------------------------------------
// Symmetrization
// ---------------------------------------------------------------------------

struct SymmetrizeResult {
    Matrix<double> matrix;             // (T + T^t)/2 with dead symbols compressed out
    std::vector<std::int32_t> kept;    // reduced row index -> original symbol id
    std::vector<std::int32_t> removed; // original ids whose row and column were all zero
};

/// S = (T + T^t)/2. Symbols whose row *and* column are entirely zero
/// (never visited) are removed; `kept` maps reduced indices back.
inline SymmetrizeResult symmetrize(const Matrix<double>& t) {
    if (t.rows() != t.cols()) throw DimensionError("symmetrize: matrix must be square");
    const std::size_t n = t.rows();

    SymmetrizeResult out;
    std::vector<bool> alive(n, false);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            if (t(i, j) != 0.0) {
                alive[i] = true;
                alive[j] = true;
            }
        }
    }
    std::vector<std::int32_t> reduced(n, -1);
    for (std::size_t i = 0; i < n; ++i) {
        if (alive[i]) {
            reduced[i] = static_cast<std::int32_t>(out.kept.size());
            out.kept.push_back(static_cast<std::int32_t>(i));
        } else {
            out.removed.push_back(static_cast<std::int32_t>(i));
        }
    }

    const std::size_t m = out.kept.size();
    out.matrix = Matrix<double>(m, m);
    for (std::size_t a = 0; a < m; ++a) {
        const std::size_t i = static_cast<std::size_t>(out.kept[a]);
        for (std::size_t b = 0; b < m; ++b) {
            const std::size_t j = static_cast<std::size_t>(out.kept[b]);
            out.matrix(a, b) = 0.5 * (t(i, j) + t(j, i));
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Dense symmetric eigensolver (cyclic Jacobi)
// ---------------------------------------------------------------------------

struct EigenDecomposition {
    std::vector<double> values;  // descending by algebraic value
    Matrix<double> vectors;      // n x k, column i pairs with values[i]
};

namespace detail {

inline double frobenius_norm(const Matrix<double>& a) {
    double s = 0.0;
    for (double v : a.data()) s += v * v;
    return std::sqrt(s);
}

inline double off_diagonal_norm(const Matrix<double>& a) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.rows(); ++i) {
        for (std::size_t j = 0; j < a.cols(); ++j) {
            if (i != j) s += a(i, j) * a(i, j);
        }
    }
    return std::sqrt(s);
}

/// Full eigendecomposition of a symmetric matrix with cyclic Jacobi sweeps.
/// Rotations are applied until the off-diagonal Frobenius norm drops below
/// 1e-10 * ||A||_F, which leaves each eigenpair residual comfortably inside
/// the 1e-8 * ||A||_F contract checked by the caller.
inline EigenDecomposition jacobi_eigen(Matrix<double> a, int max_sweeps = 100) {
    const std::size_t n = a.rows();
    Matrix<double> v = Matrix<double>::identity(n);
    const double norm = frobenius_norm(a);
    const double target = 1e-10 * norm;

    if (norm > 0.0) {
        bool converged = off_diagonal_norm(a) <= target;
        for (int sweep = 0; sweep < max_sweeps && !converged; ++sweep) {
            for (std::size_t p = 0; p + 1 < n; ++p) {
                for (std::size_t q = p + 1; q < n; ++q) {
                    const double apq = a(p, q);
                    if (apq == 0.0) continue;
                    const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
                    const double t = (theta >= 0.0)
                        ? 1.0 / (theta + std::sqrt(1.0 + theta * theta))
                        : 1.0 / (theta - std::sqrt(1.0 + theta * theta));
                    const double c = 1.0 / std::sqrt(1.0 + t * t);
                    const double s = t * c;
                    const double tau = s / (1.0 + c);

                    a(p, p) -= t * apq;
                    a(q, q) += t * apq;
                    a(p, q) = 0.0;
                    a(q, p) = 0.0;
                    for (std::size_t i = 0; i < n; ++i) {
                        if (i != p && i != q) {
                            const double aip = a(i, p);
                            const double aiq = a(i, q);
                            a(i, p) = aip - s * (aiq + tau * aip);
                            a(p, i) = a(i, p);
                            a(i, q) = aiq + s * (aip - tau * aiq);
                            a(q, i) = a(i, q);
                        }
                        const double vip = v(i, p);
                        const double viq = v(i, q);
                        v(i, p) = vip - s * (viq + tau * vip);
                        v(i, q) = viq + s * (vip - tau * viq);
                    }
                }
            }
            converged = off_diagonal_norm(a) <= target;
        }
        if (!converged) {
            throw ConvergenceFailure("jacobi_eigen: off-diagonal norm above bound after " +
                                     std::to_string(max_sweeps) + " sweeps");
        }
    }

    // Order eigenpairs by descending algebraic value, ties by original index.
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t x, std::size_t y) { return a(x, x) > a(y, y); });

    EigenDecomposition out;
    out.values.resize(n);
    out.vectors = Matrix<double>(n, n);
    for (std::size_t k = 0; k < n; ++k) {
        const std::size_t src = order[k];
        out.values[k] = a(src, src);
        // Sign convention: the entry of largest magnitude is positive
        // (ties resolved toward the lowest row index).
        std::size_t arg = 0;
        double best = -1.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double mag = std::abs(v(i, src));
            if (mag > best) {
                best = mag;
                arg = i;
            }
        }
        const double flip = (v(arg, src) < 0.0) ? -1.0 : 1.0;
        for (std::size_t i = 0; i < n; ++i) out.vectors(i, k) = flip * v(i, src);
    }
    return out;
}

}  // namespace detail

/// The k algebraically largest eigenvalues of a symmetric matrix with
/// orthonormal eigenvectors. Every returned pair is verified against the
/// residual bound ||S u - lambda u|| <= 1e-8 ||S||_F.
inline EigenDecomposition top_k_eigen(const Matrix<double>& s, std::int32_t k) {
    if (s.rows() != s.cols()) throw DimensionError("top_k_eigen: matrix must be square");
    const std::size_t n = s.rows();
    if (k < 1 || static_cast<std::size_t>(k) > n) {
        throw DimensionError("top_k_eigen: k out of range");
    }

    EigenDecomposition full = detail::jacobi_eigen(s);

    EigenDecomposition out;
    out.values.assign(full.values.begin(), full.values.begin() + k);
    out.vectors = Matrix<double>(n, static_cast<std::size_t>(k));
    for (std::size_t c = 0; c < static_cast<std::size_t>(k); ++c) {
        for (std::size_t i = 0; i < n; ++i) out.vectors(i, c) = full.vectors(i, c);
    }

    const double bound = 1e-8 * detail::frobenius_norm(s);
    for (std::size_t c = 0; c < static_cast<std::size_t>(k); ++c) {
        double res = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double su = 0.0;
            for (std::size_t j = 0; j < n; ++j) su += s(i, j) * out.vectors(j, c);
            const double r = su - out.values[c] * out.vectors(i, c);
            res += r * r;
        }
        if (std::sqrt(res) > bound) {
            throw ConvergenceFailure("top_k_eigen: residual bound violated for eigenpair " +
                                     std::to_string(c));
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Spectral embedding
// ---------------------------------------------------------------------------

struct SpectralEmbedding {
    std::int32_t k = 0;
    std::vector<double> eigenvalues;    // descending
    Matrix<double> points;              // m x k; excluded symbols carry zero rows
    std::vector<std::int32_t> excluded; // symbol ids not embedded

    bool is_embedded(std::int32_t id) const {
        return std::find(excluded.begin(), excluded.end(), id) == excluded.end();
    }
};

/// How the symmetrized matrix is conditioned before the eigensolve.
/// DegreeNormalized rescales S to D^(-1/2) S D^(-1/2), whose spectrum
/// provably stays inside [-1, 1]; Symmetric solves S as is.
enum class SpectralNorm { DegreeNormalized, Symmetric };

namespace detail {

inline void degree_normalize(Matrix<double>& s) {
    const std::size_t n = s.rows();
    std::vector<double> scale(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        double degree = 0.0;
        for (std::size_t j = 0; j < n; ++j) degree += std::abs(s(i, j));
        scale[i] = degree > 0.0 ? 1.0 / std::sqrt(degree) : 0.0;
    }
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) s(i, j) *= scale[i] * scale[j];
    }
}

}  // namespace detail

/// Map every visited symbol of a transition matrix into k-dimensional
/// spectral space: symmetrize, condition per `norm`, take the k top
/// eigenvectors, and normalize each row to unit length. Rows whose
/// pre-normalization norm is below 1e-12 join the excluded set with a
/// zero coordinate vector.
inline SpectralEmbedding embed(const Matrix<double>& t, std::int32_t k,
                               SpectralNorm norm = SpectralNorm::DegreeNormalized) {
    if (k < 1) throw DimensionError("embed: k must be >= 1");
    SymmetrizeResult sym = symmetrize(t);
    if (static_cast<std::size_t>(k) > sym.kept.size()) {
        throw DimensionError("embed: k exceeds the number of visited symbols");
    }
    if (norm == SpectralNorm::DegreeNormalized) detail::degree_normalize(sym.matrix);

    EigenDecomposition eig = top_k_eigen(sym.matrix, k);

    SpectralEmbedding out;
    out.k = k;
    out.eigenvalues = eig.values;
    out.points = Matrix<double>(t.rows(), static_cast<std::size_t>(k));
    out.excluded = sym.removed;
    for (std::size_t r = 0; r < sym.kept.size(); ++r) {
        const std::size_t id = static_cast<std::size_t>(sym.kept[r]);
        double norm2 = 0.0;
        for (std::size_t c = 0; c < static_cast<std::size_t>(k); ++c) {
            norm2 += eig.vectors(r, c) * eig.vectors(r, c);
        }
        const double norm = std::sqrt(norm2);
        if (norm < 1e-12) {
            out.excluded.push_back(static_cast<std::int32_t>(id));
            continue;
        }
        for (std::size_t c = 0; c < static_cast<std::size_t>(k); ++c) {
            out.points(id, c) = eig.vectors(r, c) / norm;
        }
    }
    std::sort(out.excluded.begin(), out.excluded.end());
    return out;
}

// ---------------------------------------------------------------------------
// Clustering
// ---------------------------------------------------------------------------

enum class ClusterMethod { KMeans, Agglomerative };

struct ClusterAssignment {
    std::vector<std::int32_t> labels;  // one per point, in 0..n_clusters-1
    std::int32_t n_clusters = 0;
    ClusterMethod method = ClusterMethod::KMeans;
};

namespace detail {

inline double sq_distance(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return s;
}

inline double sq_distance_row(const Matrix<double>& pts, std::size_t i,
                              const std::vector<double>& center) {
    double s = 0.0;
    for (std::size_t c = 0; c < pts.cols(); ++c) {
        const double d = pts(i, c) - center[c];
        s += d * d;
    }
    return s;
}

}  // namespace detail

/// Lloyd's k-means with k-means++ seeding, 300-iteration cap, and the best
/// of 10 restarts (seeds seed+0 .. seed+9) by within-cluster sum of squares.
/// Empty clusters are repaired by re-seeding from the farthest point.
/// `wcss_trace`, when given, records the WCSS after every Lloyd iteration of
/// every restart (one inner vector per restart).
inline ClusterAssignment kmeans(const Matrix<double>& points, std::int32_t n_clusters,
                                std::uint64_t seed,
                                std::vector<std::vector<double>>* wcss_trace = nullptr) {
    const std::size_t n = points.rows();
    const std::size_t d = points.cols();
    const std::size_t k = static_cast<std::size_t>(n_clusters);
    if (n_clusters < 1 || k > n) throw DimensionError("kmeans: n_clusters out of range");

    std::vector<std::int32_t> best_labels;
    double best_wcss = std::numeric_limits<double>::infinity();
    if (wcss_trace) wcss_trace->clear();

    for (std::uint64_t restart = 0; restart < 10; ++restart) {
        Rng rng(seed + restart);
        if (wcss_trace) wcss_trace->emplace_back();

        // k-means++ seeding.
        std::vector<std::vector<double>> centers;
        centers.reserve(k);
        {
            const std::size_t first = uniform_below(rng, n);
            centers.emplace_back(points.row(first).begin(), points.row(first).end());
            std::vector<double> d2(n);
            for (std::size_t i = 0; i < n; ++i) d2[i] = detail::sq_distance_row(points, i, centers[0]);
            while (centers.size() < k) {
                double total = std::accumulate(d2.begin(), d2.end(), 0.0);
                std::size_t pick = 0;
                if (total <= 0.0) {
                    pick = uniform_below(rng, n);
                } else {
                    double x = uniform_unit(rng) * total;
                    for (std::size_t i = 0; i < n; ++i) {
                        x -= d2[i];
                        if (x <= 0.0) {
                            pick = i;
                            break;
                        }
                        pick = i;  // fall through to the last point on rounding
                    }
                }
                centers.emplace_back(points.row(pick).begin(), points.row(pick).end());
                for (std::size_t i = 0; i < n; ++i) {
                    d2[i] = std::min(d2[i], detail::sq_distance_row(points, i, centers.back()));
                }
            }
        }

        std::vector<std::int32_t> labels(n, -1);
        for (int iter = 0; iter < 300; ++iter) {
            // Assignment step; nearest center, ties to the lowest index.
            bool changed = false;
            for (std::size_t i = 0; i < n; ++i) {
                std::int32_t arg = 0;
                double best = detail::sq_distance_row(points, i, centers[0]);
                for (std::size_t j = 1; j < k; ++j) {
                    const double dist = detail::sq_distance_row(points, i, centers[j]);
                    if (dist < best) {
                        best = dist;
                        arg = static_cast<std::int32_t>(j);
                    }
                }
                if (labels[i] != arg) {
                    labels[i] = arg;
                    changed = true;
                }
            }

            // Repair empty clusters from the farthest point.
            std::vector<std::size_t> count(k, 0);
            for (std::int32_t l : labels) ++count[static_cast<std::size_t>(l)];
            for (std::size_t j = 0; j < k; ++j) {
                if (count[j] > 0) continue;
                std::size_t far = 0;
                double far_dist = -1.0;
                for (std::size_t i = 0; i < n; ++i) {
                    if (count[static_cast<std::size_t>(labels[i])] <= 1) continue;
                    const double dist =
                        detail::sq_distance_row(points, i, centers[static_cast<std::size_t>(labels[i])]);
                    if (dist > far_dist) {
                        far_dist = dist;
                        far = i;
                    }
                }
                --count[static_cast<std::size_t>(labels[far])];
                labels[far] = static_cast<std::int32_t>(j);
                ++count[j];
                changed = true;
            }

            // Update step.
            for (std::size_t j = 0; j < k; ++j) {
                std::fill(centers[j].begin(), centers[j].end(), 0.0);
            }
            for (std::size_t i = 0; i < n; ++i) {
                auto& c = centers[static_cast<std::size_t>(labels[i])];
                for (std::size_t x = 0; x < d; ++x) c[x] += points(i, x);
            }
            for (std::size_t j = 0; j < k; ++j) {
                if (count[j] == 0) continue;
                for (std::size_t x = 0; x < d; ++x) {
                    centers[j][x] /= static_cast<double>(count[j]);
                }
            }

            if (wcss_trace) {
                double w = 0.0;
                for (std::size_t i = 0; i < n; ++i) {
                    w += detail::sq_distance_row(points, i, centers[static_cast<std::size_t>(labels[i])]);
                }
                wcss_trace->back().push_back(w);
            }
            if (!changed) break;
        }

        double wcss = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            wcss += detail::sq_distance_row(points, i, centers[static_cast<std::size_t>(labels[i])]);
        }
        if (wcss < best_wcss) {
            best_wcss = wcss;
            best_labels = labels;
        }
    }

    return ClusterAssignment{std::move(best_labels), n_clusters, ClusterMethod::KMeans};
}

/// Bottom-up agglomerative clustering with Ward linkage on squared
/// Euclidean distance. Merge candidates tie-break on the smallest
/// (min-id, max-id) pair; final labels are numbered by each cluster's
/// smallest member index.
inline ClusterAssignment agglomerative(const Matrix<double>& points, std::int32_t n_clusters) {
    const std::size_t n = points.rows();
    const std::size_t k = static_cast<std::size_t>(n_clusters);
    if (n_clusters < 1 || k > n) throw DimensionError("agglomerative: n_clusters out of range");

    // Ward distances via the Lance-Williams recurrence, seeded with
    // squared point distances.
    Matrix<double> dist(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            const double d2 = detail::sq_distance(points.row(i), points.row(j));
            dist(i, j) = d2;
            dist(j, i) = d2;
        }
    }

    std::vector<bool> active(n, true);
    std::vector<double> size(n, 1.0);
    std::vector<std::int32_t> member(n);  // point -> current cluster id (smallest member)
    std::iota(member.begin(), member.end(), 0);

    std::size_t remaining = n;
    while (remaining > k) {
        std::size_t best_i = 0, best_j = 0;
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < n; ++i) {
            if (!active[i]) continue;
            for (std::size_t j = i + 1; j < n; ++j) {
                if (!active[j]) continue;
                if (dist(i, j) < best) {
                    best = dist(i, j);
                    best_i = i;
                    best_j = j;
                }
            }
        }

        const double si = size[best_i];
        const double sj = size[best_j];
        for (std::size_t c = 0; c < n; ++c) {
            if (!active[c] || c == best_i || c == best_j) continue;
            const double sc = size[c];
            const double updated = ((si + sc) * dist(best_i, c) + (sj + sc) * dist(best_j, c) -
                                    sc * dist(best_i, best_j)) /
                                   (si + sj + sc);
            dist(best_i, c) = updated;
            dist(c, best_i) = updated;
        }
        size[best_i] += size[best_j];
        active[best_j] = false;
        for (std::size_t p = 0; p < n; ++p) {
            if (member[p] == static_cast<std::int32_t>(best_j)) {
                member[p] = static_cast<std::int32_t>(best_i);
            }
        }
        --remaining;
    }

    // Number surviving clusters by ascending representative id.
    std::vector<std::int32_t> relabel(n, -1);
    std::int32_t next = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (active[i]) relabel[i] = next++;
    }
    ClusterAssignment out;
    out.n_clusters = n_clusters;
    out.method = ClusterMethod::Agglomerative;
    out.labels.resize(n);
    for (std::size_t p = 0; p < n; ++p) {
        out.labels[p] = relabel[static_cast<std::size_t>(member[p])];
    }
    return out;
}

/// Total within-cluster sum of squares of an assignment.
inline double within_cluster_ss(const Matrix<double>& points, const ClusterAssignment& a) {
    const std::size_t k = static_cast<std::size_t>(a.n_clusters);
    const std::size_t d = points.cols();
    std::vector<std::vector<double>> centers(k, std::vector<double>(d, 0.0));
    std::vector<std::size_t> count(k, 0);
    for (std::size_t i = 0; i < points.rows(); ++i) {
        auto& c = centers[static_cast<std::size_t>(a.labels[i])];
        for (std::size_t x = 0; x < d; ++x) c[x] += points(i, x);
        ++count[static_cast<std::size_t>(a.labels[i])];
    }
    for (std::size_t j = 0; j < k; ++j) {
        if (count[j] == 0) continue;
        for (std::size_t x = 0; x < d; ++x) centers[j][x] /= static_cast<double>(count[j]);
    }
    double w = 0.0;
    for (std::size_t i = 0; i < points.rows(); ++i) {
        w += detail::sq_distance_row(points, i, centers[static_cast<std::size_t>(a.labels[i])]);
    }
    return w;
}

}  // namespace cdsm
