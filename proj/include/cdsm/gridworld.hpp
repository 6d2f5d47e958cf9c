#pragma once

#include <array>
#include <cassert>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "cdsm/errors.hpp"
#include "cdsm/rng.hpp"

namespace cdsm {

// ---------------------------------------------------------------------------
// Actions and observations
// ---------------------------------------------------------------------------

enum class Action : std::uint8_t { Up, Down, Left, Right };

inline constexpr std::array<Action, 4> kAllActions = {Action::Up, Action::Down, Action::Left,
                                                      Action::Right};

struct Displacement {
    int drow;
    int dcol;
};

/// Row 0 is the top of the grid, so Up decrements the row.
inline constexpr Displacement displacement(Action a) {
    switch (a) {
        case Action::Up: return {-1, 0};
        case Action::Down: return {1, 0};
        case Action::Left: return {0, -1};
        case Action::Right: return {0, 1};
    }
    return {0, 0};
}

/// Binary occupancy of the 3x3 window centered on the agent, row-major:
/// index 0 is the north-west neighbor, 4 the agent's own cell, 8 the
/// south-east neighbor.
struct Observation {
    std::array<std::uint8_t, 9> bits{};

    std::uint16_t code() const {
        std::uint16_t c = 0;
        for (int i = 0; i < 9; ++i) c |= static_cast<std::uint16_t>(bits[i] << i);
        return c;
    }

    static Observation from_code(std::uint16_t c) {
        Observation o;
        for (int i = 0; i < 9; ++i) o.bits[i] = static_cast<std::uint8_t>((c >> i) & 1);
        return o;
    }

    std::string to_string() const {
        std::string s(9, '0');
        for (int i = 0; i < 9; ++i) s[i] = bits[i] ? '1' : '0';
        return s;
    }

    friend bool operator==(const Observation&, const Observation&) = default;
};

// ---------------------------------------------------------------------------
// Grids and rooms
// ---------------------------------------------------------------------------

/// Occupancy grid. Cells outside the bounds count as occupied, which makes
/// the sensor total everywhere.
class Grid {
public:
    Grid() = default;
    Grid(int height, int width, bool occupied = false)
        : height_(height), width_(width), cells_(static_cast<std::size_t>(height) * width,
                                                 occupied ? 1 : 0) {}

    int height() const { return height_; }
    int width() const { return width_; }

    bool occupied(int r, int c) const {
        if (r < 0 || r >= height_ || c < 0 || c >= width_) return true;
        return cells_[static_cast<std::size_t>(r) * width_ + c] != 0;
    }

    void set(int r, int c, bool occ) {
        assert(r >= 0 && r < height_ && c >= 0 && c < width_);
        cells_[static_cast<std::size_t>(r) * width_ + c] = occ ? 1 : 0;
    }

    friend bool operator==(const Grid&, const Grid&) = default;

private:
    int height_ = 0;
    int width_ = 0;
    std::vector<std::uint8_t> cells_;
};

enum class RoomType : std::uint8_t { S, Y };

/// 3x3 object footprints, one letter-like glyph per room type.
inline constexpr std::array<std::array<std::uint8_t, 3>, 3> kYGlyph = {{
    {1, 0, 1},
    {0, 1, 0},
    {0, 1, 0},
}};
inline constexpr std::array<std::array<std::uint8_t, 3>, 3> kSGlyph = {{
    {0, 1, 1},
    {0, 1, 0},
    {1, 1, 0},
}};

inline constexpr const std::array<std::array<std::uint8_t, 3>, 3>& glyph(RoomType t) {
    return t == RoomType::S ? kSGlyph : kYGlyph;
}

inline constexpr int glyph_cell_count(RoomType t) {
    int n = 0;
    for (const auto& row : glyph(t)) {
        for (std::uint8_t v : row) n += v;
    }
    return n;
}

inline constexpr int kRoomSize = 50;
inline constexpr int kObjectCount = 20;
inline constexpr int kDoorCol = kRoomSize / 2 - 1;  // center column of the south wall
inline constexpr int kCorridorLength = 3;
inline constexpr int kPlacementRejectionCap = 10000;

struct RoomGrid {
    Grid grid;  // kRoomSize x kRoomSize including walls; door cell is free
    RoomType type = RoomType::S;
    int door_row = kRoomSize - 1;
    int door_col = kDoorCol;

    friend bool operator==(const RoomGrid&, const RoomGrid&) = default;
};

/// Randomly place 20 glyph objects in a walled 50x50 room. Anchors are
/// drawn uniformly; a draw is rejected while any glyph cell would come
/// within Chebyshev distance 1 of a wall or a previously placed object.
inline RoomGrid generate_room(RoomType type, Rng& rng) {
    RoomGrid room;
    room.type = type;
    room.grid = Grid(kRoomSize, kRoomSize, false);
    for (int i = 0; i < kRoomSize; ++i) {
        room.grid.set(0, i, true);
        room.grid.set(kRoomSize - 1, i, true);
        room.grid.set(i, 0, true);
        room.grid.set(i, kRoomSize - 1, true);
    }
    room.grid.set(room.door_row, room.door_col, false);

    const auto& mask = glyph(type);
    // Anchor range keeps the whole 3x3 footprint at Chebyshev distance
    // >= 2 from the walls: cells end up inside [2, kRoomSize-3].
    const int lo = 2;
    const int hi = kRoomSize - 5;  // inclusive
    const std::uint64_t span = static_cast<std::uint64_t>(hi - lo + 1);

    Grid objects(kRoomSize, kRoomSize, false);
    for (int obj = 0; obj < kObjectCount; ++obj) {
        int rejections = 0;
        for (;;) {
            const int ar = lo + static_cast<int>(uniform_below(rng, span));
            const int ac = lo + static_cast<int>(uniform_below(rng, span));
            bool ok = true;
            for (int dr = 0; dr < 3 && ok; ++dr) {
                for (int dc = 0; dc < 3 && ok; ++dc) {
                    if (!mask[dr][dc]) continue;
                    // No other object cell in the 8-neighborhood.
                    for (int nr = -1; nr <= 1 && ok; ++nr) {
                        for (int nc = -1; nc <= 1; ++nc) {
                            if (objects.occupied(ar + dr + nr, ac + dc + nc)) {
                                ok = false;
                                break;
                            }
                        }
                    }
                }
            }
            if (ok) {
                for (int dr = 0; dr < 3; ++dr) {
                    for (int dc = 0; dc < 3; ++dc) {
                        if (!mask[dr][dc]) continue;
                        objects.set(ar + dr, ac + dc, true);
                        room.grid.set(ar + dr, ac + dc, true);
                    }
                }
                break;
            }
            if (++rejections >= kPlacementRejectionCap) {
                throw PlacementFailure("generate_room: object " + std::to_string(obj) +
                                       " rejected " + std::to_string(rejections) + " times");
            }
        }
    }
    return room;
}

// ---------------------------------------------------------------------------
// The four-room world
// ---------------------------------------------------------------------------

// The classic 104-state four-room layout: an 11x11 playable area inside a
// wall ring, split by internal walls with four doorway gaps.
inline constexpr std::array<const char*, 13> kFourRoomsMap = {
    "XXXXXXXXXXXXX",
    "X     X     X",
    "X     X     X",
    "X           X",
    "X     X     X",
    "X     X     X",
    "XX XXXX     X",
    "X     XXX XXX",
    "X     X     X",
    "X     X     X",
    "X           X",
    "X     X     X",
    "XXXXXXXXXXXXX",
};

inline constexpr std::array<std::pair<int, int>, 4> kFourRoomsDoorways = {{
    {3, 6},
    {10, 6},
    {6, 2},
    {7, 9},
}};

enum class ObservabilityMode { Full, Partial };

struct FourRoomsWorld {
    Grid grid;
    ObservabilityMode mode = ObservabilityMode::Full;
    std::vector<std::pair<int, int>> free_cells;  // row-major; index is the position id
    std::vector<std::int32_t> position_ids;       // per cell, -1 for walls

    std::int32_t position_id(int r, int c) const {
        return position_ids[static_cast<std::size_t>(r) * grid.width() + c];
    }

    bool is_doorway(int r, int c) const {
        for (const auto& [dr, dc] : kFourRoomsDoorways) {
            if (dr == r && dc == c) return true;
        }
        return false;
    }

    /// Room index 0..3 (row-major quadrants), or -1 for doorway cells.
    int room_label(int r, int c) const {
        if (is_doorway(r, c)) return -1;
        if (c < 6) return r < 6 ? 0 : 2;
        return r < 7 ? 1 : 3;
    }
};

inline FourRoomsWorld build_four_rooms(ObservabilityMode mode) {
    FourRoomsWorld w;
    w.mode = mode;
    const int size = 13;
    w.grid = Grid(size, size, false);
    w.position_ids.assign(static_cast<std::size_t>(size) * size, -1);
    for (int r = 0; r < size; ++r) {
        for (int c = 0; c < size; ++c) {
            const bool wall = kFourRoomsMap[static_cast<std::size_t>(r)][c] == 'X';
            w.grid.set(r, c, wall);
            if (!wall) {
                w.position_ids[static_cast<std::size_t>(r) * size + c] =
                    static_cast<std::int32_t>(w.free_cells.size());
                w.free_cells.emplace_back(r, c);
            }
        }
    }
    return w;
}

// ---------------------------------------------------------------------------
// Simulation
// ---------------------------------------------------------------------------

/// 9-bit occupancy of the 3x3 window around (r, c); cells beyond the grid
/// bounds read as occupied.
inline Observation observe_at(const Grid& grid, int r, int c) {
    Observation o;
    int i = 0;
    for (int dr = -1; dr <= 1; ++dr) {
        for (int dc = -1; dc <= 1; ++dc, ++i) {
            o.bits[static_cast<std::size_t>(i)] = grid.occupied(r + dr, c + dc) ? 1 : 0;
        }
    }
    return o;
}

/// The actions whose target cell is free.
inline std::vector<Action> valid_actions_at(const Grid& grid, int r, int c) {
    std::vector<Action> out;
    for (Action a : kAllActions) {
        const Displacement d = displacement(a);
        if (!grid.occupied(r + d.drow, c + d.dcol)) out.push_back(a);
    }
    return out;
}

enum class EnvKind { FourRoomsFull, FourRoomsPartial, SyRooms };

enum class ContextTag : std::uint8_t { S, Y, Corridor, Room0, Room1, Room2, Room3, Doorway };

struct TraceEntry {
    std::int32_t row = 0;
    std::int32_t col = 0;
    ContextTag tag = ContextTag::S;

    friend bool operator==(const TraceEntry&, const TraceEntry&) = default;
};

/// One agent exploring one world. The policy picks uniformly among the
/// actions whose target cell is free; a single RNG drives action choice,
/// room type draws, and object placement, so a seed pins the whole run.
class Simulation {
public:
    Simulation(EnvKind kind, std::uint64_t seed) : kind_(kind), rng_(seed) {
        if (kind == EnvKind::SyRooms) {
            const RoomType type = draw_room_type(rng_);
            install_room(generate_room(type, rng_));
            row_ = kRoomSize - 2;  // interior cell just north of the door
            col_ = kDoorCol;
        } else {
            four_rooms_ = build_four_rooms(kind == EnvKind::FourRoomsFull
                                               ? ObservabilityMode::Full
                                               : ObservabilityMode::Partial);
            row_ = four_rooms_.free_cells.front().first;
            col_ = four_rooms_.free_cells.front().second;
        }
    }

    /// A single fixed room with the door sealed: no corridor, no
    /// regeneration. Used for evaluation runs.
    static Simulation test_room(RoomType type, std::uint64_t seed) {
        Simulation sim(seed);
        RoomGrid room = generate_room(type, sim.rng_);
        room.grid.set(room.door_row, room.door_col, true);
        sim.kind_ = EnvKind::SyRooms;
        sim.sealed_ = true;
        sim.room_type_ = type;
        sim.grid_ = room.grid;
        sim.row_ = kRoomSize - 2;
        sim.col_ = kDoorCol;
        return sim;
    }

    static RoomType draw_room_type(Rng& rng) {
        return uniform_below(rng, 2) == 0 ? RoomType::S : RoomType::Y;
    }

    int row() const { return row_; }
    int col() const { return col_; }
    const Grid& grid() const { return kind_ == EnvKind::SyRooms ? grid_ : four_rooms_.grid; }
    RoomType room_type() const { return room_type_; }
    EnvKind kind() const { return kind_; }
    std::uint64_t regenerations() const { return regenerations_; }
    const FourRoomsWorld& four_rooms() const { return four_rooms_; }

    Observation observe() const { return observe_at(grid(), row_, col_); }

    /// Raw symbol of the current position: the position id in the fully
    /// observable four-room world, the 9-bit sensor code otherwise.
    std::uint32_t observe_raw() const {
        if (kind_ == EnvKind::FourRoomsFull) {
            return static_cast<std::uint32_t>(four_rooms_.position_id(row_, col_));
        }
        return observe().code();
    }

    std::vector<Action> valid_actions() const { return valid_actions_at(grid(), row_, col_); }

    TraceEntry current_trace() const {
        TraceEntry t;
        t.row = row_;
        t.col = col_;
        if (kind_ == EnvKind::SyRooms) {
            if (row_ >= kRoomSize) {
                t.tag = ContextTag::Corridor;
            } else {
                t.tag = room_type_ == RoomType::S ? ContextTag::S : ContextTag::Y;
            }
        } else {
            const int room = four_rooms_.room_label(row_, col_);
            switch (room) {
                case 0: t.tag = ContextTag::Room0; break;
                case 1: t.tag = ContextTag::Room1; break;
                case 2: t.tag = ContextTag::Room2; break;
                case 3: t.tag = ContextTag::Room3; break;
                default: t.tag = ContextTag::Doorway; break;
            }
        }
        return t;
    }

    struct StepResult {
        std::uint32_t raw_symbol;
        TraceEntry trace;
        Action action;
    };

    /// Sample a valid action, move, and regenerate the room when the move
    /// carries the agent from the topmost corridor cell up through the door.
    StepResult step() {
        const std::vector<Action> acts = valid_actions();
        const Action a = acts[uniform_below(rng_, acts.size())];
        const Displacement d = displacement(a);
        if (kind_ == EnvKind::SyRooms && !sealed_ && a == Action::Up && row_ == kRoomSize &&
            col_ == kDoorCol) {
            const RoomType type = draw_room_type(rng_);
            install_room(generate_room(type, rng_));
            ++regenerations_;
        }
        row_ += d.drow;
        col_ += d.dcol;
        return {observe_raw(), current_trace(), a};
    }

private:
    explicit Simulation(std::uint64_t seed) : rng_(seed) {}

    // The s/y world grid is the room stacked on a 1-cell-wide corridor
    // below the door: three free cells, walls on both sides, sealed at
    // the bottom.
    void install_room(const RoomGrid& room) {
        room_type_ = room.type;
        if (grid_.height() == 0) {
            grid_ = Grid(kRoomSize + kCorridorLength + 1, kRoomSize, true);
            for (int r = 0; r < kCorridorLength; ++r) {
                grid_.set(kRoomSize + r, kDoorCol, false);
            }
        }
        for (int r = 0; r < kRoomSize; ++r) {
            for (int c = 0; c < kRoomSize; ++c) {
                grid_.set(r, c, room.grid.occupied(r, c));
            }
        }
    }

    EnvKind kind_ = EnvKind::SyRooms;
    Rng rng_;
    Grid grid_;              // sy world (room + corridor), or sealed test room
    RoomType room_type_ = RoomType::S;
    FourRoomsWorld four_rooms_;
    int row_ = 0;
    int col_ = 0;
    bool sealed_ = false;
    std::uint64_t regenerations_ = 0;
};

// ---------------------------------------------------------------------------
// Exploration runs
// ---------------------------------------------------------------------------

struct ExplorationResult {
    EnvKind kind = EnvKind::SyRooms;
    std::uint64_t steps = 0;
    std::uint64_t seed = 0;
    std::vector<std::uint32_t> raw;     // steps+1 symbols, initial observation first
    std::vector<TraceEntry> trace;      // aligned with raw
};

inline ExplorationResult run_exploration(EnvKind kind, std::uint64_t steps, std::uint64_t seed) {
    if (steps < 1) throw ConfigError("run_exploration: steps must be >= 1");
    ExplorationResult out;
    out.kind = kind;
    out.steps = steps;
    out.seed = seed;
    out.raw.reserve(steps + 1);
    out.trace.reserve(steps + 1);

    Simulation sim(kind, seed);
    out.raw.push_back(sim.observe_raw());
    out.trace.push_back(sim.current_trace());
    for (std::uint64_t i = 0; i < steps; ++i) {
        const auto r = sim.step();
        out.raw.push_back(r.raw_symbol);
        out.trace.push_back(r.trace);
    }
    return out;
}

}  // namespace cdsm
