#pragma once

#include <charconv>
#include <cinttypes>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "cdsm/errors.hpp"
#include "cdsm/gridworld.hpp"
#include "cdsm/spectral.hpp"
#include "cdsm/stream.hpp"

namespace cdsm {

inline std::string env_name(EnvKind kind) {
    switch (kind) {
        case EnvKind::FourRoomsFull: return "four_rooms_full";
        case EnvKind::FourRoomsPartial: return "four_rooms_partial";
        case EnvKind::SyRooms: return "sy_rooms";
    }
    return "?";
}

inline EnvKind parse_env(const std::string& name) {
    if (name == "four_rooms_full") return EnvKind::FourRoomsFull;
    if (name == "four_rooms_partial") return EnvKind::FourRoomsPartial;
    if (name == "sy_rooms") return EnvKind::SyRooms;
    throw ConfigError("unknown environment: " + name);
}

inline std::string tag_name(ContextTag tag) {
    switch (tag) {
        case ContextTag::S: return "S";
        case ContextTag::Y: return "Y";
        case ContextTag::Corridor: return "corridor";
        case ContextTag::Room0: return "R0";
        case ContextTag::Room1: return "R1";
        case ContextTag::Room2: return "R2";
        case ContextTag::Room3: return "R3";
        case ContextTag::Doorway: return "doorway";
    }
    return "?";
}

inline ContextTag parse_tag(const std::string& s) {
    if (s == "S") return ContextTag::S;
    if (s == "Y") return ContextTag::Y;
    if (s == "corridor") return ContextTag::Corridor;
    if (s == "R0") return ContextTag::Room0;
    if (s == "R1") return ContextTag::Room1;
    if (s == "R2") return ContextTag::Room2;
    if (s == "R3") return ContextTag::Room3;
    if (s == "doorway") return ContextTag::Doorway;
    throw ParseError("unknown context tag: " + s);
}

/// Symbol descriptor as written to stream and model files: the 9-bit
/// pattern for sensor observations, "POS <row> <col>" for position
/// symbols of the fully observable four-room world.
inline std::string symbol_descriptor(EnvKind kind, std::uint32_t raw, const TraceEntry& first_seen) {
    if (kind == EnvKind::FourRoomsFull) {
        return "POS " + std::to_string(first_seen.row) + " " + std::to_string(first_seen.col);
    }
    return Observation::from_code(static_cast<std::uint16_t>(raw)).to_string();
}

struct StreamFile {
    std::string env;
    std::uint64_t steps = 0;
    std::uint64_t seed = 0;
    SymbolStream stream;                // interned ids, first-appearance order
    std::vector<std::string> symbols;   // id -> descriptor
    std::vector<TraceEntry> trace;
};

/// Intern an exploration run. The id stream is what the model builder
/// consumes; descriptors keep the mapping back to raw sensor patterns.
inline StreamFile intern_exploration(const ExplorationResult& run) {
    StreamFile f;
    f.env = env_name(run.kind);
    f.steps = run.steps;
    f.seed = run.seed;
    f.trace = run.trace;
    f.stream.level = 0;
    f.stream.ids.reserve(run.raw.size());
    SymbolAlphabet alphabet;
    for (std::size_t i = 0; i < run.raw.size(); ++i) {
        const std::int32_t before = alphabet.size();
        const std::int32_t id = alphabet.intern(run.raw[i]);
        if (alphabet.size() > before) {
            f.symbols.push_back(symbol_descriptor(run.kind, run.raw[i], run.trace[i]));
        }
        f.stream.ids.push_back(id);
    }
    return f;
}

// Plain-text stream file: `CDSM1 <env> <steps> <seed>` header, one
// `<id> <row> <col> <tag>` line per time step (steps+1 lines, the initial
// observation included), then the `SYM <id> <descriptor>` table.
inline void write_stream_file(const std::filesystem::path& path, const StreamFile& f) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
    out << "CDSM1 " << f.env << " " << f.steps << " " << f.seed << "\n";
    for (std::size_t i = 0; i < f.stream.ids.size(); ++i) {
        const TraceEntry& t = f.trace[i];
        out << f.stream.ids[i] << " " << t.row << " " << t.col << " " << tag_name(t.tag) << "\n";
    }
    for (std::size_t id = 0; id < f.symbols.size(); ++id) {
        out << "SYM " << id << " " << f.symbols[id] << "\n";
    }
    if (!out) throw std::runtime_error("write failed: " + path.string());
}

inline StreamFile read_stream_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open stream file: " + path.string());

    StreamFile f;
    std::string line;
    if (!std::getline(in, line)) throw ParseError("empty stream file: " + path.string());
    {
        std::istringstream head(line);
        std::string magic;
        head >> magic >> f.env >> f.steps >> f.seed;
        if (!head || magic != "CDSM1") {
            throw ParseError("bad stream file header: " + line);
        }
    }
    parse_env(f.env);  // validates the name

    f.stream.level = 0;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream row(line);
        std::string first;
        row >> first;
        if (first == "SYM") {
            std::int64_t id = 0;
            row >> id;
            std::string rest;
            std::getline(row, rest);
            if (!rest.empty() && rest.front() == ' ') rest.erase(0, 1);
            if (!row || id != static_cast<std::int64_t>(f.symbols.size()) || rest.empty()) {
                throw ParseError("bad symbol line: " + line);
            }
            f.symbols.push_back(rest);
            continue;
        }
        std::int32_t id = 0;
        TraceEntry t;
        std::string tag;
        try {
            id = static_cast<std::int32_t>(std::stol(first));
        } catch (const std::exception&) {
            throw ParseError("bad stream line: " + line);
        }
        row >> t.row >> t.col >> tag;
        if (!row) throw ParseError("bad stream line: " + line);
        t.tag = parse_tag(tag);
        f.stream.ids.push_back(id);
        f.trace.push_back(t);
    }

    if (f.stream.ids.size() != f.steps + 1) {
        throw ParseError("stream file line count does not match header step count");
    }
    for (std::int32_t id : f.stream.ids) {
        if (id < 0 || static_cast<std::size_t>(id) >= f.symbols.size()) {
            throw ParseError("symbol id outside the SYM table");
        }
    }
    return f;
}

// ---------------------------------------------------------------------------
// CSV exports
// ---------------------------------------------------------------------------

inline std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline void write_matrix_csv(const std::filesystem::path& path, const Matrix<double>& m) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
    for (std::size_t i = 0; i < m.rows(); ++i) {
        for (std::size_t j = 0; j < m.cols(); ++j) {
            if (j) out << ",";
            out << format_double(m(i, j));
        }
        out << "\n";
    }
}

inline void write_alphabet_sidecar(const std::filesystem::path& path,
                                   const std::vector<std::string>& descriptors) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
    out << "id,symbol\n";
    for (std::size_t id = 0; id < descriptors.size(); ++id) {
        out << id << "," << descriptors[id] << "\n";
    }
}

inline void write_embedding_csv(const std::filesystem::path& path, const SpectralEmbedding& e) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
    out << "id";
    for (std::int32_t c = 0; c < e.k; ++c) out << ",v" << (c + 1);
    out << "\n";
    for (std::size_t id = 0; id < e.points.rows(); ++id) {
        if (!e.is_embedded(static_cast<std::int32_t>(id))) continue;
        out << id;
        for (std::size_t c = 0; c < e.points.cols(); ++c) {
            out << "," << format_double(e.points(id, c));
        }
        out << "\n";
    }
}

inline void write_clusters_csv(const std::filesystem::path& path,
                               const std::vector<std::int32_t>& ids,
                               const std::vector<std::int32_t>& labels) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
    out << "id,label\n";
    for (std::size_t i = 0; i < ids.size(); ++i) {
        out << ids[i] << "," << labels[i] << "\n";
    }
}

}  // namespace cdsm
