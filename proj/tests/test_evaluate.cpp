#include <catch2/catch_amalgamated.hpp>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "cdsm/evaluate.hpp"
#include "cdsm/gridworld.hpp"
#include "cdsm/hierarchy.hpp"
#include "cdsm/io.hpp"
#include "cdsm/stream.hpp"

using namespace cdsm;

namespace {

std::vector<TraceEntry> flat_trace(std::size_t len, ContextTag tag) {
    std::vector<TraceEntry> out(len);
    for (std::size_t i = 0; i < len; ++i) {
        out[i] = TraceEntry{static_cast<std::int32_t>(i % 3), static_cast<std::int32_t>(i % 5),
                            tag};
    }
    return out;
}

ActivationTimeline single_level(std::vector<std::pair<std::int64_t, std::int32_t>> acts) {
    ActivationTimeline t;
    t.levels.push_back(std::move(acts));
    return t;
}

std::string read_bytes(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in);
    return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

std::filesystem::path temp_file(const std::string& name) {
    return std::filesystem::temp_directory_path() / name;
}

/// A small model trained on a half-million-step s/y exploration: long
/// enough that the test rooms of seed 11 contain no unseen pattern
/// (verified against the exhaustive room vocabularies), small enough for
/// fast tests. Built once.
const HierarchyModel& tiny_sy_model() {
    static const HierarchyModel model = [] {
        const ExplorationResult run = run_exploration(EnvKind::SyRooms, 500000, 3);
        const StreamFile file = intern_exploration(run);
        const std::vector<LevelSpec> specs = {{6, 2}, {2, 2}};
        HierarchyModel m = build_hierarchy(file.symbols, file.stream, specs, 3);
        m.config.env = file.env;
        return m;
    }();
    return model;
}

}  // namespace

// ---------------------------------------------------------------------------
// Heat-maps
// ---------------------------------------------------------------------------

TEST_CASE("a unit that never activates yields an all-zero heat-map") {
    const auto timeline = single_level({{0, 0}, {4, 0}});
    const auto trace = flat_trace(10, ContextTag::S);
    const Heatmap h = make_heatmap(timeline, trace, 0, 1, 3, 5);
    CHECK(h.total_steps == 0);
    for (double v : h.weights.data()) CHECK(v == 0.0);
}

TEST_CASE("a single activation at t=0 owns the whole trace") {
    const auto timeline = single_level({{0, 0}});
    const auto trace = flat_trace(30, ContextTag::S);
    const Heatmap h = make_heatmap(timeline, trace, 0, 0, 3, 5);
    CHECK(h.total_steps == 30);
    // Occupancy of the synthetic trace: every visited cell counted once
    // per visit, normalized by the trace length.
    double sum = 0.0;
    for (double v : h.weights.data()) sum += v;
    CHECK(sum == Catch::Approx(1.0).margin(1e-9));
    CHECK(h.weights(0, 0) == Catch::Approx(2.0 / 30.0).margin(1e-12));
}

TEST_CASE("heat-map weights sum to one whenever a unit activated") {
    const auto timeline = single_level({{2, 0}, {5, 1}, {9, 0}});
    const auto trace = flat_trace(12, ContextTag::Y);
    for (std::int32_t unit = 0; unit < 2; ++unit) {
        const Heatmap h = make_heatmap(timeline, trace, 0, unit, 3, 5);
        REQUIRE(h.total_steps > 0);
        double sum = 0.0;
        for (double v : h.weights.data()) sum += v;
        CHECK(sum == Catch::Approx(1.0).margin(1e-9));
    }
}

TEST_CASE("activation intervals tile the trace from the first activation") {
    const auto timeline = single_level({{2, 0}, {5, 1}, {9, 0}});
    const auto trace = flat_trace(12, ContextTag::Y);
    std::int64_t attributed = 0;
    for (std::int32_t unit = 0; unit < 2; ++unit) {
        attributed += make_heatmap(timeline, trace, 0, unit, 3, 5).total_steps;
    }
    CHECK(attributed == 10);  // [2, 12) exactly once
}

// ---------------------------------------------------------------------------
// PGM export
// ---------------------------------------------------------------------------

TEST_CASE("PGM header is byte-exact and zero maps stay black") {
    Heatmap h;
    h.height = 2;
    h.width = 3;
    h.weights = Matrix<double>(2, 3);
    const auto path = temp_file("cdsm_zero.pgm");
    export_heatmap_pgm(h, path);
    const std::string bytes = read_bytes(path);
    const std::string header = "P5\n3 2\n255\n";
    REQUIRE(bytes.size() == header.size() + 6);
    CHECK(bytes.substr(0, header.size()) == header);
    for (std::size_t i = header.size(); i < bytes.size(); ++i) CHECK(bytes[i] == '\0');
}

TEST_CASE("a single weighted cell maps to exactly one 255 pixel") {
    Heatmap h;
    h.height = 2;
    h.width = 2;
    h.weights = Matrix<double>(2, 2);
    h.weights(1, 0) = 1.0;
    h.total_steps = 7;
    const auto path = temp_file("cdsm_single.pgm");
    export_heatmap_pgm(h, path);
    const std::string bytes = read_bytes(path);
    const std::string header = "P5\n2 2\n255\n";
    REQUIRE(bytes.size() == header.size() + 4);
    CHECK(static_cast<unsigned char>(bytes[header.size() + 2]) == 255);
    CHECK(bytes[header.size() + 0] == '\0');
    CHECK(bytes[header.size() + 1] == '\0');
    CHECK(bytes[header.size() + 3] == '\0');
}

// ---------------------------------------------------------------------------
// Separation report and accuracy
// ---------------------------------------------------------------------------

namespace {

/// Two synthetic runs whose top-level activations are fully under test
/// control. Each run is 100 steps.
TestRoomsResult synthetic_result(std::vector<std::pair<std::int64_t, std::int32_t>> s_acts,
                                 std::vector<std::pair<std::int64_t, std::int32_t>> y_acts) {
    TestRoomsResult r;
    r.top_units = 2;
    r.runs[0].type = RoomType::S;
    r.runs[0].trace = flat_trace(100, ContextTag::S);
    r.runs[0].timeline = single_level(std::move(s_acts));
    r.runs[1].type = RoomType::Y;
    r.runs[1].trace = flat_trace(100, ContextTag::Y);
    r.runs[1].timeline = single_level(std::move(y_acts));
    return r;
}

}  // namespace

TEST_CASE("perfectly aligned units give accuracy 1") {
    const TestRoomsResult r = synthetic_result({{0, 0}}, {{0, 1}});
    CHECK(room_type_accuracy(r) == Catch::Approx(1.0));
    const SeparationReport report = separation_report(r);
    REQUIRE(report.units.size() == 2);
    CHECK(report.units[0].assigned == RoomType::S);
    CHECK(report.units[1].assigned == RoomType::Y);
    CHECK(report.units[0].share_s == Catch::Approx(1.0));
    CHECK(report.units[1].share_y == Catch::Approx(1.0));
}

TEST_CASE("context-blind units stay near chance level") {
    // Both units split their time evenly between the two rooms.
    std::vector<std::pair<std::int64_t, std::int32_t>> acts;
    for (std::int64_t t = 0; t < 100; t += 10) {
        acts.push_back({t, (t / 10) % 2 == 0 ? 0 : 1});
    }
    const TestRoomsResult r = synthetic_result(acts, acts);
    CHECK(room_type_accuracy(r) < 0.6);
}

TEST_CASE("accuracy is invariant under swapping the unit ids") {
    auto swap_units = [](std::vector<std::pair<std::int64_t, std::int32_t>> acts) {
        for (auto& [t, u] : acts) u = 1 - u;
        return acts;
    };
    const std::vector<std::pair<std::int64_t, std::int32_t>> s_acts = {{0, 0}, {40, 1}, {70, 0}};
    const std::vector<std::pair<std::int64_t, std::int32_t>> y_acts = {{0, 1}, {30, 0}, {50, 1}};
    const double a = room_type_accuracy(synthetic_result(s_acts, y_acts));
    const double b = room_type_accuracy(synthetic_result(swap_units(s_acts), swap_units(y_acts)));
    CHECK(a == Catch::Approx(b));
}

TEST_CASE("corridor steps are excluded from the accuracy") {
    TestRoomsResult r = synthetic_result({{0, 0}}, {{0, 1}});
    // Turn some S-room steps into corridor steps; accuracy must ignore them.
    for (std::size_t t = 10; t < 40; ++t) r.runs[0].trace[t].tag = ContextTag::Corridor;
    CHECK(room_type_accuracy(r) == Catch::Approx(1.0));
    const SeparationReport report = separation_report(r);
    CHECK(report.units[0].share_corridor == Catch::Approx(0.3));
}

TEST_CASE("a silent top-level unit is reported as degenerate") {
    const TestRoomsResult r = synthetic_result({{0, 0}}, {{0, 0}});
    CHECK_THROWS_AS(room_type_accuracy(r), DegenerateTopLevel);
    // The shares themselves are still available.
    const SeparationReport report = separation_report(r);
    CHECK_FALSE(report.accuracy.has_value());
}

// ---------------------------------------------------------------------------
// Test-room protocol
// ---------------------------------------------------------------------------

TEST_CASE("test-room runs are deterministic and stay inside the room") {
    const HierarchyModel& model = tiny_sy_model();
    const TestRoomsResult a = run_test_rooms(model, 11, 3000);
    const TestRoomsResult b = run_test_rooms(model, 11, 3000);
    for (int i = 0; i < 2; ++i) {
        CHECK(a.runs[i].trace == b.runs[i].trace);
        CHECK(a.runs[i].raw_ids == b.runs[i].raw_ids);
        REQUIRE(a.runs[i].timeline.levels.size() == b.runs[i].timeline.levels.size());
        for (std::size_t lvl = 0; lvl < a.runs[i].timeline.levels.size(); ++lvl) {
            CHECK(a.runs[i].timeline.levels[lvl] == b.runs[i].timeline.levels[lvl]);
        }
        // Sealed door: the agent never reaches the corridor.
        for (const TraceEntry& e : a.runs[i].trace) {
            CHECK(e.row < kRoomSize);
            CHECK(e.tag != ContextTag::Corridor);
        }
    }
    CHECK(a.runs[0].type == RoomType::S);
    CHECK(a.runs[1].type == RoomType::Y);
}

TEST_CASE("test-room visits spread over the whole room") {
    const HierarchyModel& model = tiny_sy_model();
    const TestRoomsResult r = run_test_rooms(model, 11, 100000);
    // Position visits approach uniformity over free cells: the most and
    // least visited free cells stay within a two-orders bound pinned from
    // a reference run at this scale.
    const TestRoomRun& run = r.runs[0];
    Matrix<std::int64_t> visits(kRoomSize, kRoomSize);
    for (const TraceEntry& e : run.trace) {
        visits(static_cast<std::size_t>(e.row), static_cast<std::size_t>(e.col)) += 1;
    }
    std::int64_t lo = 1 << 30, hi = 0;
    std::int64_t unvisited = 0;
    for (int row = 0; row < kRoomSize; ++row) {
        for (int col = 0; col < kRoomSize; ++col) {
            if (run.grid.occupied(row, col)) continue;
            const std::int64_t v = visits(static_cast<std::size_t>(row),
                                          static_cast<std::size_t>(col));
            if (v == 0) {
                ++unvisited;
                continue;
            }
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
    }
    CHECK(unvisited == 0);
    CHECK(hi < 100 * std::max<std::int64_t>(lo, 1));
}

// ---------------------------------------------------------------------------
// Pair-counting purity
// ---------------------------------------------------------------------------

TEST_CASE("pair-counting purity basics") {
    CHECK(pair_counting_purity({0, 0, 1, 1}, {5, 5, 9, 9}) == 1.0);
    CHECK(pair_counting_purity({0, 1, 0, 1}, {5, 5, 9, 9}) == Catch::Approx(1.0 / 3.0));
    // Label permutation invariance.
    CHECK(pair_counting_purity({1, 1, 0, 0}, {5, 5, 9, 9}) == 1.0);
}
