#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "cdsm/errors.hpp"
#include "cdsm/evaluate.hpp"
#include "cdsm/gridworld.hpp"
#include "cdsm/hierarchy.hpp"
#include "cdsm/io.hpp"
#include "cdsm/spectral.hpp"
#include "cdsm/stream.hpp"

namespace cdsm {

// ---------------------------------------------------------------------------
// Pipeline configuration
// ---------------------------------------------------------------------------

struct PipelineConfig {
    std::string env = "sy_rooms";
    std::uint64_t steps = 2'000'000;
    std::uint64_t seed = 1;
    std::vector<std::int32_t> cluster_counts = {20, 18, 16, 14, 12, 10, 8, 6, 4, 2};
    std::int32_t embed_dim = kDefaultEmbedDim;
    bool collapse = true;
    std::string out_dir = ".";
    std::uint64_t steps_per_room = 100'000;
};

inline void validate(const PipelineConfig& cfg) {
    parse_env(cfg.env);
    if (cfg.steps < 1) throw ConfigError("steps must be >= 1");
    if (cfg.steps_per_room < 1) throw ConfigError("steps-per-room must be >= 1");
    if (cfg.embed_dim < 1) throw ConfigError("embed-dim must be >= 1");
    if (cfg.cluster_counts.empty()) throw ConfigError("cluster schedule must not be empty");
    for (std::size_t i = 0; i < cfg.cluster_counts.size(); ++i) {
        if (cfg.cluster_counts[i] < 2) throw ConfigError("cluster counts must be >= 2");
        if (i > 0 && cfg.cluster_counts[i] >= cfg.cluster_counts[i - 1]) {
            throw ConfigError("cluster schedule must be strictly decreasing");
        }
    }
}

inline std::vector<LevelSpec> level_specs(const PipelineConfig& cfg) {
    std::vector<LevelSpec> specs;
    specs.reserve(cfg.cluster_counts.size());
    for (std::int32_t n : cfg.cluster_counts) {
        specs.push_back({n, std::min(cfg.embed_dim, n)});
    }
    return specs;
}

/// Apply the keys present in a flat JSON config file onto the defaults.
inline PipelineConfig config_from_json(const nlohmann::json& j, PipelineConfig cfg = {}) {
    try {
        if (j.contains("env")) cfg.env = j.at("env").get<std::string>();
        if (j.contains("steps")) cfg.steps = j.at("steps").get<std::uint64_t>();
        if (j.contains("seed")) cfg.seed = j.at("seed").get<std::uint64_t>();
        if (j.contains("levels")) cfg.cluster_counts = j.at("levels").get<std::vector<std::int32_t>>();
        if (j.contains("embed_dim")) cfg.embed_dim = j.at("embed_dim").get<std::int32_t>();
        if (j.contains("collapse")) cfg.collapse = j.at("collapse").get<bool>();
        if (j.contains("out")) cfg.out_dir = j.at("out").get<std::string>();
        if (j.contains("steps_per_room")) {
            cfg.steps_per_room = j.at("steps_per_room").get<std::uint64_t>();
        }
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("bad config file: ") + e.what());
    }
    return cfg;
}

inline PipelineConfig load_config(const std::filesystem::path& path, PipelineConfig cfg = {}) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("bad config file: ") + e.what());
    }
    return config_from_json(j, std::move(cfg));
}

// ---------------------------------------------------------------------------
// Four-room demo pipeline
// ---------------------------------------------------------------------------

struct FourRoomsDemoResult {
    StreamFile stream;                       // interned exploration
    Matrix<double> transition;
    SpectralEmbedding embedding;
    std::vector<std::int32_t> embedded_ids;  // symbol ids behind clusters.labels
    ClusterAssignment clusters;
    std::vector<std::int32_t> class_labels;  // per embedded symbol: room 0..3, -1 doorway-only
    double purity = 0.0;                     // pair-counting purity on class >= 0 symbols
};

/// Explore the four-room world, estimate the transition matrix, embed with
/// k = 4, and cluster with k-means (n = 4). Ground-truth classes per
/// symbol come from where the symbol was observed: the majority room, or
/// -1 for symbols seen only on doorway cells.
inline FourRoomsDemoResult run_fourrooms_demo(ObservabilityMode mode, std::uint64_t steps,
                                              std::uint64_t seed) {
    const EnvKind kind =
        mode == ObservabilityMode::Full ? EnvKind::FourRoomsFull : EnvKind::FourRoomsPartial;
    FourRoomsDemoResult out;
    const ExplorationResult run = run_exploration(kind, steps, seed);
    out.stream = intern_exploration(run);

    const std::int32_t m = static_cast<std::int32_t>(out.stream.symbols.size());
    out.transition = row_normalize(count_matrix(out.stream.stream, m));
    out.embedding = embed(out.transition, 4);

    for (std::int32_t id = 0; id < m; ++id) {
        if (out.embedding.is_embedded(id)) out.embedded_ids.push_back(id);
    }
    Matrix<double> pts(out.embedded_ids.size(), 4);
    for (std::size_t r = 0; r < out.embedded_ids.size(); ++r) {
        for (std::size_t c = 0; c < 4; ++c) {
            pts(r, c) = out.embedding.points(static_cast<std::size_t>(out.embedded_ids[r]), c);
        }
    }
    out.clusters = kmeans(pts, 4, seed);

    // Majority room per symbol over the whole run.
    const FourRoomsWorld world = build_four_rooms(mode);
    std::vector<std::array<std::int64_t, 4>> room_visits(static_cast<std::size_t>(m),
                                                         {0, 0, 0, 0});
    for (std::size_t t = 0; t < out.stream.stream.size(); ++t) {
        const TraceEntry& e = out.stream.trace[t];
        const int room = world.room_label(e.row, e.col);
        if (room >= 0) {
            ++room_visits[static_cast<std::size_t>(out.stream.stream.ids[t])]
                         [static_cast<std::size_t>(room)];
        }
    }
    out.class_labels.reserve(out.embedded_ids.size());
    for (std::int32_t id : out.embedded_ids) {
        const auto& visits = room_visits[static_cast<std::size_t>(id)];
        std::int32_t best = -1;
        std::int64_t best_count = 0;
        for (std::int32_t room = 0; room < 4; ++room) {
            if (visits[static_cast<std::size_t>(room)] > best_count) {
                best_count = visits[static_cast<std::size_t>(room)];
                best = room;
            }
        }
        out.class_labels.push_back(best);
    }

    std::vector<std::int32_t> cluster_subset, class_subset;
    for (std::size_t i = 0; i < out.embedded_ids.size(); ++i) {
        if (out.class_labels[i] < 0) continue;
        cluster_subset.push_back(out.clusters.labels[i]);
        class_subset.push_back(out.class_labels[i]);
    }
    out.purity = pair_counting_purity(cluster_subset, class_subset);
    return out;
}

// ---------------------------------------------------------------------------
// Report export
// ---------------------------------------------------------------------------

inline nlohmann::json report_to_json(const SeparationReport& report) {
    nlohmann::json j;
    j["units"] = nlohmann::json::array();
    for (const UnitShare& u : report.units) {
        j["units"].push_back({{"unit", u.unit},
                              {"share_s", u.share_s},
                              {"share_y", u.share_y},
                              {"share_corridor", u.share_corridor},
                              {"assigned", u.assigned == RoomType::S ? "S" : "Y"}});
    }
    if (report.accuracy) {
        j["accuracy"] = *report.accuracy;
    } else {
        j["accuracy"] = nullptr;
    }
    return j;
}

inline void write_separation_report(const std::filesystem::path& path,
                                    const SeparationReport& report) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
    out << report_to_json(report).dump(2) << "\n";
}

}  // namespace cdsm
