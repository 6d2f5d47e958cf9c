#pragma once

// A two-context walk used across the hierarchy tests: two five-observation
// loops (a "yellow" one over {0,1,2,3,4} and a "blue" one over {0,5,6,7,8})
// that share only the junction observation 0. The agent repeatedly executes
// whole circuits, one loop direction at a time, always advancing through the
// same phase cycle:
//
//   yellow clockwise -> yellow reversed -> blue clockwise -> blue reversed
//
// Each phase runs a hand-picked number of circuits. Every circuit starts and
// ends at the junction, so the raw stream is one continuous walk. The 20
// distinct transitions split into the four circuit groups, the group
// sequence collapses to the strict four-phase cycle, and the two top-level
// units come out as a yellow-core unit and a blue-core unit that share only
// the chains passing through the junction.

#include <array>
#include <cstdint>
#include <set>
#include <vector>

#include "cdsm/stream.hpp"

namespace toy {

inline constexpr std::int32_t kJunction = 0;

enum class Phase { YellowCw, YellowCcw, BlueCw, BlueCcw };

inline const std::vector<std::int32_t>& circuit(Phase p) {
    static const std::vector<std::int32_t> ycw = {1, 2, 3, 4, 0};
    static const std::vector<std::int32_t> yccw = {4, 3, 2, 1, 0};
    static const std::vector<std::int32_t> bcw = {5, 6, 7, 8, 0};
    static const std::vector<std::int32_t> bccw = {8, 7, 6, 5, 0};
    switch (p) {
        case Phase::YellowCw: return ycw;
        case Phase::YellowCcw: return yccw;
        case Phase::BlueCw: return bcw;
        case Phase::BlueCcw: return bccw;
    }
    return ycw;
}

/// The walk: 8 full phase cycles with varying circuit counts per phase.
inline cdsm::SymbolStream walk() {
    static const std::array<int, 32> counts = {2, 1, 1, 2, 1, 2, 2, 1, 3, 1, 2, 2, 1, 1, 1, 3,
                                               2, 2, 1, 1, 1, 3, 2, 1, 2, 1, 3, 2, 1, 2, 1, 1};
    static const std::array<Phase, 4> cycle = {Phase::YellowCw, Phase::YellowCcw, Phase::BlueCw,
                                               Phase::BlueCcw};
    cdsm::SymbolStream s;
    s.ids.push_back(kJunction);
    for (std::size_t i = 0; i < counts.size(); ++i) {
        const auto& loop = circuit(cycle[i % 4]);
        for (int rep = 0; rep < counts[i]; ++rep) {
            s.ids.insert(s.ids.end(), loop.begin(), loop.end());
        }
    }
    return s;
}

/// The four expected transition groups, one per loop direction, as raw
/// observation pairs.
inline std::array<std::set<std::pair<std::int32_t, std::int32_t>>, 4> expected_groups() {
    auto pairs_of = [](Phase p) {
        std::set<std::pair<std::int32_t, std::int32_t>> out;
        std::int32_t prev = kJunction;
        for (std::int32_t node : circuit(p)) {
            out.insert({prev, node});
            prev = node;
        }
        return out;
    };
    return {pairs_of(Phase::YellowCw), pairs_of(Phase::YellowCcw), pairs_of(Phase::BlueCw),
            pairs_of(Phase::BlueCcw)};
}

inline std::set<std::vector<std::int32_t>> yellow_round_trips() {
    return {{0, 1, 0}, {1, 2, 1}, {2, 3, 2}, {3, 4, 3}, {4, 0, 4}};
}

inline std::set<std::vector<std::int32_t>> blue_round_trips() {
    return {{0, 5, 0}, {5, 6, 5}, {6, 7, 6}, {7, 8, 7}, {8, 0, 8}};
}

inline std::vector<std::int32_t> yellow_observations() { return {1, 2, 3, 4}; }
inline std::vector<std::int32_t> blue_observations() { return {5, 6, 7, 8}; }

}  // namespace toy
