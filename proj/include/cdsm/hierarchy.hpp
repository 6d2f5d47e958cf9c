#pragma once

#include <cstdint>
#include <limits>
#include <map>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "cdsm/errors.hpp"
#include "cdsm/spectral.hpp"
#include "cdsm/stream.hpp"

namespace cdsm {

struct LevelSpec {
    std::int32_t n_clusters = 2;
    std::int32_t embed_dim = 3;

    friend bool operator==(const LevelSpec&, const LevelSpec&) = default;
};

inline constexpr std::int32_t kDefaultEmbedDim = 8;

/// The 10-level schedule with 20, 18, ..., 2 clusters. The spectral space
/// has kDefaultEmbedDim dimensions, capped at the cluster count of the
/// level (extra eigenvectors beyond the cluster count only add noise).
inline std::vector<LevelSpec> default_level_specs(std::int32_t embed_dim = kDefaultEmbedDim) {
    std::vector<LevelSpec> specs;
    for (std::int32_t n = 20; n >= 2; n -= 2) specs.push_back({n, std::min(embed_dim, n)});
    return specs;
}

/// One hierarchy level: the alphabet of unique lower-level transitions,
/// their spectral embedding, and the clustering that turns each transition
/// into a meta-observation id.
struct Level {
    SymbolAlphabet pairs;               // packed (lower, lower) transitions
    SpectralEmbedding embedding;        // per pair-symbol
    std::vector<std::int32_t> assignment;  // pair-symbol id -> unit id, total
    std::int32_t n_clusters = 0;
    std::int32_t embed_dim = 0;
};

struct BuildConfig {
    std::vector<LevelSpec> specs;
    bool collapse = true;
    std::uint64_t seed = 0;
    std::string env;
    SpectralNorm norm = SpectralNorm::DegreeNormalized;

    friend bool operator==(const BuildConfig&, const BuildConfig&) = default;
};

struct HierarchyModel {
    std::vector<std::string> raw_symbols;  // level-0 alphabet descriptors, id order
    std::vector<Level> levels;
    BuildConfig config;
    bool stopped_early = false;

    std::int32_t raw_symbol_count() const {
        return static_cast<std::int32_t>(raw_symbols.size());
    }
};

/// Per-level activations produced by decoding a raw observation stream.
/// Times index into the raw stream and mark the observation that completed
/// the emission.
struct ActivationTimeline {
    std::vector<std::vector<std::pair<std::int64_t, std::int32_t>>> levels;  // (time, unit)
};

namespace detail {

/// Cluster id for a pair-symbol that has no embedded coordinates: the
/// cluster of the embedded point nearest to its (zero) coordinate vector,
/// or cluster 0 when nothing is embedded.
inline std::int32_t nearest_embedded_cluster(const Level& level, std::span<const double> probe) {
    std::int32_t best_id = -1;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t id = 0; id < level.embedding.points.rows(); ++id) {
        if (!level.embedding.is_embedded(static_cast<std::int32_t>(id))) continue;
        const double d = sq_distance(level.embedding.points.row(id), probe);
        if (d < best) {
            best = d;
            best_id = static_cast<std::int32_t>(id);
        }
    }
    if (best_id < 0) return 0;
    return level.assignment[static_cast<std::size_t>(best_id)];
}

}  // namespace detail

struct BuildLevelResult {
    Level level;
    SymbolStream next;  // input for the level above
};

/// One hierarchy step: extract the unique transitions of the stream,
/// estimate their transition matrix, embed, cluster, and rewrite the
/// stream as (optionally run-collapsed) cluster ids.
inline BuildLevelResult build_level(const SymbolStream& s, LevelSpec spec, std::uint64_t seed,
                                    bool collapse = true,
                                    ClusterMethod method = ClusterMethod::Agglomerative,
                                    SpectralNorm norm = SpectralNorm::DegreeNormalized) {
    if (s.size() < 3) throw TooFewSymbols("build_level: stream shorter than 3 symbols");

    InternResult pairs = extract_transitions(s);
    const std::int32_t m = pairs.alphabet.size();
    if (m < spec.n_clusters) {
        throw TooFewSymbols("build_level: " + std::to_string(m) +
                            " unique transitions for " + std::to_string(spec.n_clusters) +
                            " clusters");
    }

    Matrix<double> t = row_normalize(count_matrix(pairs.stream, m));
    SymmetrizeResult probe = symmetrize(t);
    if (static_cast<std::size_t>(spec.embed_dim) > probe.kept.size()) {
        throw TooFewSymbols("build_level: fewer visited transitions than embedding dimensions");
    }

    BuildLevelResult out;
    out.level.pairs = std::move(pairs.alphabet);
    out.level.n_clusters = spec.n_clusters;
    out.level.embed_dim = spec.embed_dim;
    out.level.embedding = embed(t, spec.embed_dim, norm);

    // Cluster the embedded points; excluded pair-symbols inherit the
    // cluster of their nearest embedded neighbor.
    std::vector<std::int32_t> embedded_ids;
    embedded_ids.reserve(static_cast<std::size_t>(m));
    for (std::int32_t id = 0; id < m; ++id) {
        if (out.level.embedding.is_embedded(id)) embedded_ids.push_back(id);
    }
    Matrix<double> pts(embedded_ids.size(), static_cast<std::size_t>(spec.embed_dim));
    for (std::size_t r = 0; r < embedded_ids.size(); ++r) {
        for (std::size_t c = 0; c < pts.cols(); ++c) {
            pts(r, c) = out.level.embedding.points(static_cast<std::size_t>(embedded_ids[r]), c);
        }
    }
    const ClusterAssignment clusters =
        method == ClusterMethod::Agglomerative ? agglomerative(pts, spec.n_clusters)
                                               : kmeans(pts, spec.n_clusters, seed);

    out.level.assignment.assign(static_cast<std::size_t>(m), -1);
    for (std::size_t r = 0; r < embedded_ids.size(); ++r) {
        out.level.assignment[static_cast<std::size_t>(embedded_ids[r])] = clusters.labels[r];
    }
    for (std::int32_t id : out.level.embedding.excluded) {
        const std::vector<double> zero(static_cast<std::size_t>(spec.embed_dim), 0.0);
        out.level.assignment[static_cast<std::size_t>(id)] =
            detail::nearest_embedded_cluster(out.level, zero);
    }

    SymbolStream mapped;
    mapped.level = s.level + 1;
    mapped.ids.reserve(pairs.stream.size());
    for (std::int32_t pid : pairs.stream.ids) {
        mapped.ids.push_back(out.level.assignment[static_cast<std::size_t>(pid)]);
    }
    out.next = collapse ? collapse_runs(mapped) : std::move(mapped);
    return out;
}

/// Fold build_level over the level schedule. If a level cannot be built
/// because the stream ran out of distinct transitions, the model is
/// truncated there and flagged.
inline HierarchyModel build_hierarchy(std::vector<std::string> raw_symbols, const SymbolStream& s,
                                      std::span<const LevelSpec> specs, std::uint64_t seed,
                                      bool collapse = true,
                                      ClusterMethod method = ClusterMethod::Agglomerative,
                                      SpectralNorm norm = SpectralNorm::DegreeNormalized) {
    if (specs.empty()) throw ConfigError("build_hierarchy: no level specs");
    HierarchyModel model;
    model.raw_symbols = std::move(raw_symbols);
    model.config.specs.assign(specs.begin(), specs.end());
    model.config.collapse = collapse;
    model.config.seed = seed;
    model.config.norm = norm;

    SymbolStream current = s;
    for (const LevelSpec& spec : specs) {
        try {
            BuildLevelResult r = build_level(current, spec, seed, collapse, method, norm);
            model.levels.push_back(std::move(r.level));
            current = std::move(r.next);
        } catch (const TooFewSymbols&) {
            model.stopped_early = true;
            break;
        }
    }
    return model;
}

// ---------------------------------------------------------------------------
// Decoding
// ---------------------------------------------------------------------------

namespace detail {

/// Fallback for a transition (a, b) that never occurred in training:
/// take every embedded training pair sharing a as first or b as second
/// element, place the unknown pair at their mean coordinate, and adopt the
/// cluster of the embedded point nearest to that position.
inline std::int32_t fallback_unit(const Level& level, std::int32_t a, std::int32_t b) {
    const std::size_t dim = static_cast<std::size_t>(level.embed_dim);
    std::vector<double> mean(dim, 0.0);
    std::size_t hits = 0;
    for (std::size_t id = 0; id < level.pairs.raws().size(); ++id) {
        const auto [first, second] = unpack_pair(level.pairs.raws()[id]);
        if (first != a && second != b) continue;
        if (!level.embedding.is_embedded(static_cast<std::int32_t>(id))) continue;
        for (std::size_t c = 0; c < dim; ++c) mean[c] += level.embedding.points(id, c);
        ++hits;
    }
    if (hits == 0) {
        throw UnknownObservation("decode: transition (" + std::to_string(a) + ", " +
                                 std::to_string(b) + ") shares no element with training data");
    }
    for (double& v : mean) v /= static_cast<double>(hits);
    return nearest_embedded_cluster(level, mean);
}

}  // namespace detail

/// Run a raw id stream through the model exactly the way the levels were
/// built: pair consecutive symbols, map them through the stored
/// assignments, collapse runs, and hand each emission to the level above.
/// An emission is recorded at the raw-time index that completed it.
inline ActivationTimeline decode(const HierarchyModel& model, const SymbolStream& raw) {
    ActivationTimeline timeline;
    timeline.levels.resize(model.levels.size());

    struct LevelState {
        std::int32_t prev = -1;          // previous lower-level symbol
        std::int32_t last_emitted = -1;  // run-collapse memory
    };
    std::vector<LevelState> state(model.levels.size());

    for (std::size_t t = 0; t < raw.size(); ++t) {
        std::int32_t symbol = raw.ids[t];
        if (symbol < 0 || symbol >= model.raw_symbol_count()) {
            throw UnknownObservation("decode: raw symbol id " + std::to_string(symbol) +
                                     " not in the training alphabet");
        }
        for (std::size_t lvl = 0; lvl < model.levels.size(); ++lvl) {
            LevelState& st = state[lvl];
            const Level& level = model.levels[lvl];
            if (st.prev < 0) {
                st.prev = symbol;
                break;
            }
            const std::int32_t a = st.prev;
            const std::int32_t b = symbol;
            st.prev = b;

            std::int32_t unit;
            if (auto pid = level.pairs.find(pack_pair(a, b))) {
                unit = level.assignment[static_cast<std::size_t>(*pid)];
            } else {
                unit = detail::fallback_unit(level, a, b);
            }
            if (unit == st.last_emitted) break;  // collapsed, nothing propagates
            st.last_emitted = unit;
            timeline.levels[lvl].emplace_back(static_cast<std::int64_t>(t), unit);
            symbol = unit;  // becomes the lower-level input of the next level
        }
    }
    return timeline;
}

// ---------------------------------------------------------------------------
// Unit supports
// ---------------------------------------------------------------------------

namespace detail {

using ChainSet = std::set<std::vector<std::int32_t>>;

inline const ChainSet& unit_chains(const HierarchyModel& model, int level, std::int32_t unit,
                                   std::map<std::pair<int, std::int32_t>, ChainSet>& memo) {
    const auto key = std::make_pair(level, unit);
    if (auto it = memo.find(key); it != memo.end()) return it->second;

    ChainSet chains;
    const Level& lv = model.levels[static_cast<std::size_t>(level)];
    for (std::size_t pid = 0; pid < lv.pairs.raws().size(); ++pid) {
        if (lv.assignment[pid] != unit) continue;
        const auto [a, b] = unpack_pair(lv.pairs.raws()[pid]);
        if (level == 0) {
            chains.insert({a, b});
            continue;
        }
        // Chains of the two lower units joined where one ends as the
        // other begins; the overlap is exactly how consecutive lower
        // transitions share an element in the stream.
        const ChainSet& left = unit_chains(model, level - 1, a, memo);
        const ChainSet& right = unit_chains(model, level - 1, b, memo);
        for (const auto& lc : left) {
            for (const auto& rc : right) {
                if (lc.back() != rc.front()) continue;
                std::vector<std::int32_t> joined = lc;
                joined.insert(joined.end(), rc.begin() + 1, rc.end());
                chains.insert(std::move(joined));
            }
        }
    }
    return memo.emplace(key, std::move(chains)).first->second;
}

}  // namespace detail

/// The set of minimal raw-observation chains a unit encodes, obtained by
/// recursively expanding its pair-symbols down to level-0 transitions.
inline std::set<std::vector<std::int32_t>> unit_support(const HierarchyModel& model, int level,
                                                        std::int32_t unit) {
    if (level < 0 || static_cast<std::size_t>(level) >= model.levels.size()) {
        throw DimensionError("unit_support: level out of range");
    }
    if (unit < 0 || unit >= model.levels[static_cast<std::size_t>(level)].n_clusters) {
        throw DimensionError("unit_support: unit out of range");
    }
    std::map<std::pair<int, std::int32_t>, detail::ChainSet> memo;
    return detail::unit_chains(model, level, unit, memo);
}

}  // namespace cdsm
