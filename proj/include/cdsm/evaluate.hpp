#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "cdsm/errors.hpp"
#include "cdsm/gridworld.hpp"
#include "cdsm/hierarchy.hpp"
#include "cdsm/matrix.hpp"

namespace cdsm {

// ---------------------------------------------------------------------------
// Test-room protocol
// ---------------------------------------------------------------------------

struct TestRoomRun {
    RoomType type = RoomType::S;
    Grid grid;
    std::vector<TraceEntry> trace;       // steps+1 entries
    SymbolStream raw_ids;                // mapped into the model's raw alphabet
    ActivationTimeline timeline;
};

struct TestRoomsResult {
    std::array<TestRoomRun, 2> runs;  // [0] = S room, [1] = Y room
    std::int32_t top_units = 0;       // unit count of the model's last level
};

/// Explore one fixed test room of each type (door sealed, so the room
/// never regenerates) and decode both observation streams with the model.
/// The S room uses seed+1, the Y room seed+2.
inline TestRoomsResult run_test_rooms(const HierarchyModel& model, std::uint64_t seed,
                                      std::uint64_t steps_per_room) {
    if (steps_per_room < 1) throw ConfigError("run_test_rooms: steps_per_room must be >= 1");

    // The training alphabet keyed by sensor code.
    std::vector<std::int32_t> id_by_code(512, -1);
    for (std::size_t id = 0; id < model.raw_symbols.size(); ++id) {
        const std::string& desc = model.raw_symbols[id];
        if (desc.size() == 9 && desc.find_first_not_of("01") == std::string::npos) {
            std::uint16_t code = 0;
            for (int i = 0; i < 9; ++i) code |= static_cast<std::uint16_t>((desc[i] == '1') << i);
            id_by_code[code] = static_cast<std::int32_t>(id);
        }
    }

    TestRoomsResult out;
    out.top_units = model.levels.empty() ? 0 : model.levels.back().n_clusters;
    const std::array<RoomType, 2> types = {RoomType::S, RoomType::Y};
    for (int i = 0; i < 2; ++i) {
        TestRoomRun& run = out.runs[static_cast<std::size_t>(i)];
        run.type = types[static_cast<std::size_t>(i)];
        Simulation sim = Simulation::test_room(run.type, seed + 1 + static_cast<std::uint64_t>(i));
        run.grid = sim.grid();
        run.raw_ids.level = 0;

        auto map_symbol = [&](std::uint32_t raw, const TraceEntry& where) {
            const std::int32_t id = id_by_code[raw & 0x1ff];
            if (id < 0) {
                throw UnknownObservation("test room observation " +
                                         Observation::from_code(static_cast<std::uint16_t>(raw))
                                             .to_string() +
                                         " at (" + std::to_string(where.row) + ", " +
                                         std::to_string(where.col) + ") was never seen in training");
            }
            return id;
        };

        run.trace.push_back(sim.current_trace());
        run.raw_ids.ids.push_back(map_symbol(sim.observe_raw(), run.trace.back()));
        for (std::uint64_t t = 0; t < steps_per_room; ++t) {
            const auto r = sim.step();
            run.trace.push_back(r.trace);
            run.raw_ids.ids.push_back(map_symbol(r.raw_symbol, r.trace));
        }
        run.timeline = decode(model, run.raw_ids);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Heat-maps
// ---------------------------------------------------------------------------

struct Heatmap {
    int height = 0;
    int width = 0;
    Matrix<double> weights;          // normalized position distribution
    int level = 0;
    std::int32_t unit = 0;
    std::int64_t total_steps = 0;    // raw steps attributed to the unit
};

/// Position distribution of the agent while `unit` was the most recent
/// activation at `level`: every activation of the unit at time t owns the
/// trace positions [t, t') up to the next activation at the same level
/// (the stream end closes the last interval).
inline Heatmap make_heatmap(const ActivationTimeline& timeline,
                            const std::vector<TraceEntry>& trace, int level, std::int32_t unit,
                            int height, int width) {
    Heatmap h;
    h.height = height;
    h.width = width;
    h.level = level;
    h.unit = unit;
    h.weights = Matrix<double>(static_cast<std::size_t>(height), static_cast<std::size_t>(width));

    const auto& acts = timeline.levels.at(static_cast<std::size_t>(level));
    for (std::size_t i = 0; i < acts.size(); ++i) {
        if (acts[i].second != unit) continue;
        const std::int64_t begin = acts[i].first;
        const std::int64_t end = (i + 1 < acts.size()) ? acts[i + 1].first
                                                       : static_cast<std::int64_t>(trace.size());
        for (std::int64_t t = begin; t < end; ++t) {
            const TraceEntry& e = trace[static_cast<std::size_t>(t)];
            h.weights(static_cast<std::size_t>(e.row), static_cast<std::size_t>(e.col)) += 1.0;
            ++h.total_steps;
        }
    }
    if (h.total_steps > 0) {
        const double inv = 1.0 / static_cast<double>(h.total_steps);
        for (std::size_t r = 0; r < h.weights.rows(); ++r) {
            for (std::size_t c = 0; c < h.weights.cols(); ++c) h.weights(r, c) *= inv;
        }
    }
    return h;
}

/// Binary 8-bit PGM, weights scaled linearly so the maximum maps to 255.
/// Cells the agent never occupied (walls, objects) stay black.
inline void export_heatmap_pgm(const Heatmap& h, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
    out << "P5\n" << h.width << " " << h.height << "\n255\n";
    double max = 0.0;
    for (double v : h.weights.data()) max = std::max(max, v);
    const double scale = max > 0.0 ? 255.0 / max : 0.0;
    std::vector<unsigned char> pixels;
    pixels.reserve(h.weights.data().size());
    for (std::size_t r = 0; r < h.weights.rows(); ++r) {
        for (std::size_t c = 0; c < h.weights.cols(); ++c) {
            pixels.push_back(static_cast<unsigned char>(std::lround(h.weights(r, c) * scale)));
        }
    }
    out.write(reinterpret_cast<const char*>(pixels.data()),
              static_cast<std::streamsize>(pixels.size()));
    if (!out) throw std::runtime_error("write failed: " + path.string());
}

// ---------------------------------------------------------------------------
// Context separation
// ---------------------------------------------------------------------------

struct UnitShare {
    std::int32_t unit = 0;
    double share_s = 0.0;
    double share_y = 0.0;
    double share_corridor = 0.0;
    RoomType assigned = RoomType::S;
};

struct SeparationReport {
    std::vector<UnitShare> units;
    std::optional<double> accuracy;  // empty when the top level is degenerate
};

namespace detail {

struct TopLevelTally {
    std::vector<double> time_s, time_y, time_corridor;
    std::vector<std::int64_t> activations;
};

inline TopLevelTally tally_top_level(const TestRoomsResult& result, std::size_t top,
                                     std::int32_t n_units) {
    TopLevelTally tally;
    tally.time_s.assign(static_cast<std::size_t>(n_units), 0.0);
    tally.time_y.assign(static_cast<std::size_t>(n_units), 0.0);
    tally.time_corridor.assign(static_cast<std::size_t>(n_units), 0.0);
    tally.activations.assign(static_cast<std::size_t>(n_units), 0);

    for (const TestRoomRun& run : result.runs) {
        const auto& acts = run.timeline.levels.at(top);
        for (std::size_t i = 0; i < acts.size(); ++i) {
            const std::size_t unit = static_cast<std::size_t>(acts[i].second);
            ++tally.activations[unit];
            const std::int64_t begin = acts[i].first;
            const std::int64_t end = (i + 1 < acts.size())
                                         ? acts[i + 1].first
                                         : static_cast<std::int64_t>(run.trace.size());
            for (std::int64_t t = begin; t < end; ++t) {
                switch (run.trace[static_cast<std::size_t>(t)].tag) {
                    case ContextTag::S: tally.time_s[unit] += 1.0; break;
                    case ContextTag::Y: tally.time_y[unit] += 1.0; break;
                    case ContextTag::Corridor: tally.time_corridor[unit] += 1.0; break;
                    default: break;
                }
            }
        }
    }
    return tally;
}

inline RoomType majority_type(std::size_t unit, double s, double y) {
    if (s > y) return RoomType::S;
    if (y > s) return RoomType::Y;
    return unit == 0 ? RoomType::S : RoomType::Y;  // tie rule
}

}  // namespace detail

/// Per-unit time shares across contexts plus the overall context accuracy.
/// Each top-level unit is assigned the room type where it spends the
/// majority of its in-room time; accuracy is the fraction of in-room steps
/// whose active unit's assigned type matches the ground truth. Corridor
/// steps never count.
inline SeparationReport separation_report(const TestRoomsResult& result) {
    const TestRoomRun& first = result.runs[0];
    if (first.timeline.levels.empty()) throw DimensionError("separation_report: empty model");
    const std::size_t top = first.timeline.levels.size() - 1;
    // All units of the top level, whether or not they activated.
    std::int32_t n_units = result.top_units;
    for (const TestRoomRun& run : result.runs) {
        for (const auto& [t, u] : run.timeline.levels[top]) n_units = std::max(n_units, u + 1);
    }
    n_units = std::max(n_units, std::int32_t{1});

    const detail::TopLevelTally tally = detail::tally_top_level(result, top, n_units);

    SeparationReport report;
    bool degenerate = false;
    double correct = 0.0, total = 0.0;
    for (std::size_t u = 0; u < static_cast<std::size_t>(n_units); ++u) {
        UnitShare share;
        share.unit = static_cast<std::int32_t>(u);
        const double sum = tally.time_s[u] + tally.time_y[u] + tally.time_corridor[u];
        if (sum > 0.0) {
            share.share_s = tally.time_s[u] / sum;
            share.share_y = tally.time_y[u] / sum;
            share.share_corridor = tally.time_corridor[u] / sum;
        }
        share.assigned = detail::majority_type(u, tally.time_s[u], tally.time_y[u]);
        report.units.push_back(share);
        if (tally.activations[u] == 0) degenerate = true;
        correct += share.assigned == RoomType::S ? tally.time_s[u] : tally.time_y[u];
        total += tally.time_s[u] + tally.time_y[u];
    }
    if (!degenerate && total > 0.0) report.accuracy = correct / total;
    return report;
}

/// Context accuracy of a two-unit top level. Throws when a unit never
/// activates: the result would not be a property of both units.
inline double room_type_accuracy(const TestRoomsResult& result) {
    const TestRoomRun& first = result.runs[0];
    if (first.timeline.levels.empty()) throw DimensionError("room_type_accuracy: empty model");

    SeparationReport report = separation_report(result);
    if (report.units.size() != 2) {
        throw DimensionError("room_type_accuracy: top level must have exactly 2 units, has " +
                             std::to_string(report.units.size()));
    }
    if (!report.accuracy) {
        throw DegenerateTopLevel("room_type_accuracy: a top-level unit never activates");
    }
    return *report.accuracy;
}

// ---------------------------------------------------------------------------
// Pair-counting purity
// ---------------------------------------------------------------------------

/// Label-permutation-invariant agreement between a clustering and a set of
/// ground-truth classes: the fraction of point pairs on which the two
/// partitions agree (same/same or different/different).
inline double pair_counting_purity(const std::vector<std::int32_t>& clusters,
                                   const std::vector<std::int32_t>& classes) {
    if (clusters.size() != classes.size() || clusters.size() < 2) {
        throw DimensionError("pair_counting_purity: need two aligned label vectors");
    }
    const std::size_t n = clusters.size();
    std::int64_t agree = 0, total = 0;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            ++total;
            const bool same_cluster = clusters[i] == clusters[j];
            const bool same_class = classes[i] == classes[j];
            if (same_cluster == same_class) ++agree;
        }
    }
    return static_cast<double>(agree) / static_cast<double>(total);
}

}  // namespace cdsm
