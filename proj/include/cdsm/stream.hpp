#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <unordered_map>
#include <utility>
#include <vector>

#include "cdsm/errors.hpp"
#include "cdsm/matrix.hpp"

namespace cdsm {

/// Sequence of dense symbol ids. level 0 means raw observations,
/// level >= 1 means meta-observations of a hierarchy level.
struct SymbolStream {
    std::vector<std::int32_t> ids;
    int level = 0;

    std::size_t size() const { return ids.size(); }
    bool empty() const { return ids.empty(); }

    friend bool operator==(const SymbolStream&, const SymbolStream&) = default;
};

/// Bijection between opaque 64-bit raw symbols and dense ids 0..m-1.
/// Ids are assigned in first-appearance order, so the mapping is fully
/// determined by the stream that built it.
class SymbolAlphabet {
public:
    std::int32_t intern(std::uint64_t raw) {
        auto [it, inserted] = index_.try_emplace(raw, static_cast<std::int32_t>(raws_.size()));
        if (inserted) raws_.push_back(raw);
        return it->second;
    }

    std::optional<std::int32_t> find(std::uint64_t raw) const {
        auto it = index_.find(raw);
        if (it == index_.end()) return std::nullopt;
        return it->second;
    }

    std::uint64_t raw(std::int32_t id) const { return raws_.at(static_cast<std::size_t>(id)); }
    std::int32_t size() const { return static_cast<std::int32_t>(raws_.size()); }
    const std::vector<std::uint64_t>& raws() const { return raws_; }

    friend bool operator==(const SymbolAlphabet& a, const SymbolAlphabet& b) {
        return a.raws_ == b.raws_;
    }

private:
    std::unordered_map<std::uint64_t, std::int32_t> index_;
    std::vector<std::uint64_t> raws_;
};

inline std::uint64_t pack_pair(std::int32_t a, std::int32_t b) {
    return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(a)) << 32) |
           static_cast<std::uint64_t>(static_cast<std::uint32_t>(b));
}

inline std::pair<std::int32_t, std::int32_t> unpack_pair(std::uint64_t packed) {
    return {static_cast<std::int32_t>(packed >> 32),
            static_cast<std::int32_t>(packed & 0xffffffffu)};
}

struct InternResult {
    SymbolAlphabet alphabet;
    SymbolStream stream;
};

/// Rewrite a raw-symbol sequence as dense ids, alphabet in
/// first-appearance order.
inline InternResult intern_stream(std::span<const std::uint64_t> raw, int level = 0) {
    InternResult out;
    out.stream.level = level;
    out.stream.ids.reserve(raw.size());
    for (std::uint64_t r : raw) out.stream.ids.push_back(out.alphabet.intern(r));
    return out;
}

/// Rewrite a stream of symbols as the stream of its consecutive pairs,
/// interned through a fresh pair alphabet. Output has length |s|-1.
inline InternResult extract_transitions(const SymbolStream& s) {
    if (s.size() < 2) throw StreamTooShort("extract_transitions: need at least 2 symbols");
    InternResult out;
    out.stream.level = s.level + 1;
    out.stream.ids.reserve(s.size() - 1);
    for (std::size_t i = 0; i + 1 < s.size(); ++i) {
        out.stream.ids.push_back(out.alphabet.intern(pack_pair(s.ids[i], s.ids[i + 1])));
    }
    return out;
}

/// C[i][j] = number of i -> j successions in the stream.
inline Matrix<std::int64_t> count_matrix(const SymbolStream& s, std::int32_t m) {
    Matrix<std::int64_t> counts(static_cast<std::size_t>(m), static_cast<std::size_t>(m));
    for (std::size_t i = 0; i + 1 < s.size(); ++i) {
        counts(static_cast<std::size_t>(s.ids[i]), static_cast<std::size_t>(s.ids[i + 1])) += 1;
    }
    return counts;
}

/// Row-stochastic estimate: rows with positive mass are normalized to sum
/// to one, never-visited rows stay exactly zero.
inline Matrix<double> row_normalize(const Matrix<std::int64_t>& counts) {
    Matrix<double> t(counts.rows(), counts.cols());
    for (std::size_t i = 0; i < counts.rows(); ++i) {
        std::int64_t total = 0;
        for (std::size_t j = 0; j < counts.cols(); ++j) total += counts(i, j);
        if (total == 0) continue;
        const double inv = 1.0 / static_cast<double>(total);
        for (std::size_t j = 0; j < counts.cols(); ++j) {
            t(i, j) = static_cast<double>(counts(i, j)) * inv;
        }
    }
    return t;
}

/// Merge runs of consecutive identical ids into a single occurrence.
inline SymbolStream collapse_runs(const SymbolStream& s) {
    SymbolStream out;
    out.level = s.level;
    out.ids.reserve(s.size());
    for (std::int32_t id : s.ids) {
        if (out.ids.empty() || out.ids.back() != id) out.ids.push_back(id);
    }
    return out;
}

}  // namespace cdsm
