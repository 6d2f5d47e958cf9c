#include <catch2/catch_amalgamated.hpp>

#include <cstdint>
#include <vector>

#include "cdsm/rng.hpp"
#include "cdsm/stream.hpp"

using namespace cdsm;

namespace {

SymbolStream make_stream(std::vector<std::int32_t> ids, int level = 0) {
    return SymbolStream{std::move(ids), level};
}

SymbolStream random_stream(Rng& rng, std::size_t len, std::int32_t alphabet) {
    SymbolStream s;
    for (std::size_t i = 0; i < len; ++i) {
        s.ids.push_back(static_cast<std::int32_t>(uniform_below(rng, alphabet)));
    }
    return s;
}

}  // namespace

TEST_CASE("intern assigns ids in first-appearance order") {
    const std::vector<std::uint64_t> raw = {'a', 'b', 'a', 'c'};
    const InternResult r = intern_stream(raw);
    CHECK(r.alphabet.size() == 3);
    CHECK(r.alphabet.raw(0) == 'a');
    CHECK(r.alphabet.raw(1) == 'b');
    CHECK(r.alphabet.raw(2) == 'c');
    CHECK(r.stream.ids == std::vector<std::int32_t>{0, 1, 0, 2});
}

TEST_CASE("intern handles a single-symbol stream") {
    const std::vector<std::uint64_t> raw = {'a'};
    const InternResult r = intern_stream(raw);
    CHECK(r.alphabet.size() == 1);
    CHECK(r.stream.ids == std::vector<std::int32_t>{0});
}

TEST_CASE("interning an id stream again is the identity") {
    const std::vector<std::uint64_t> raw = {5, 9, 5, 7, 9};
    const InternResult first = intern_stream(raw);
    std::vector<std::uint64_t> as_raw(first.stream.ids.begin(), first.stream.ids.end());
    const InternResult second = intern_stream(as_raw);
    CHECK(second.stream.ids == first.stream.ids);
}

TEST_CASE("extract_transitions builds the pair stream") {
    const InternResult r = extract_transitions(make_stream({0, 1, 0, 1}));
    CHECK(r.alphabet.size() == 2);
    CHECK(r.alphabet.raw(0) == pack_pair(0, 1));
    CHECK(r.alphabet.raw(1) == pack_pair(1, 0));
    CHECK(r.stream.ids == std::vector<std::int32_t>{0, 1, 0});
    CHECK(r.stream.level == 1);
}

TEST_CASE("extract_transitions merges repeated self-pairs into one symbol") {
    const InternResult r = extract_transitions(make_stream({0, 0, 0}));
    CHECK(r.alphabet.size() == 1);
    CHECK(r.stream.ids == std::vector<std::int32_t>{0, 0});
}

TEST_CASE("extract_transitions rejects streams shorter than two") {
    CHECK_THROWS_AS(extract_transitions(make_stream({3})), StreamTooShort);
    CHECK_THROWS_AS(extract_transitions(make_stream({})), StreamTooShort);
}

TEST_CASE("extract_transitions is deterministic on identical input") {
    Rng rng(11);
    const SymbolStream s = random_stream(rng, 500, 6);
    const InternResult a = extract_transitions(s);
    const InternResult b = extract_transitions(s);
    CHECK(a.alphabet == b.alphabet);
    CHECK(a.stream == b.stream);
}

TEST_CASE("count_matrix counts successions") {
    const Matrix<std::int64_t> c = count_matrix(make_stream({0, 1, 0, 1, 0}), 2);
    CHECK(c(0, 0) == 0);
    CHECK(c(0, 1) == 2);
    CHECK(c(1, 0) == 2);
    CHECK(c(1, 1) == 0);
}

TEST_CASE("count_matrix on a constant stream") {
    const Matrix<std::int64_t> c = count_matrix(make_stream({0, 0, 0}), 1);
    CHECK(c(0, 0) == 2);
}

TEST_CASE("count_matrix total mass is the stream length minus one") {
    Rng rng(42);
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t len = 2 + uniform_below(rng, 400);
        const SymbolStream s = random_stream(rng, len, 9);
        const Matrix<std::int64_t> c = count_matrix(s, 9);
        std::int64_t total = 0;
        for (std::int64_t v : c.data()) total += v;
        CHECK(total == static_cast<std::int64_t>(len) - 1);
    }
}

TEST_CASE("row_normalize produces stochastic rows") {
    Matrix<std::int64_t> c(2, 2);
    c(0, 1) = 2;
    c(1, 0) = 2;
    const Matrix<double> t = row_normalize(c);
    CHECK(t(0, 1) == 1.0);
    CHECK(t(1, 0) == 1.0);
    CHECK(t(0, 0) == 0.0);
}

TEST_CASE("row_normalize keeps never-visited rows at zero") {
    Matrix<std::int64_t> c(2, 2);
    c(0, 0) = 1;
    c(0, 1) = 1;
    const Matrix<double> t = row_normalize(c);
    CHECK(t(0, 0) == 0.5);
    CHECK(t(0, 1) == 0.5);
    CHECK(t(1, 0) == 0.0);
    CHECK(t(1, 1) == 0.0);
}

TEST_CASE("row_normalize rows sum to one or are exactly zero") {
    Rng rng(7);
    for (int trial = 0; trial < 20; ++trial) {
        const std::int32_t m = 3 + static_cast<std::int32_t>(uniform_below(rng, 12));
        const SymbolStream s = random_stream(rng, 50 + uniform_below(rng, 500), m);
        const Matrix<double> t = row_normalize(count_matrix(s, m));
        for (std::size_t i = 0; i < t.rows(); ++i) {
            double sum = 0.0;
            bool any = false;
            for (std::size_t j = 0; j < t.cols(); ++j) {
                sum += t(i, j);
                any = any || t(i, j) != 0.0;
            }
            if (any) {
                CHECK(sum == Catch::Approx(1.0).margin(1e-9));
            } else {
                CHECK(sum == 0.0);
            }
        }
    }
}

TEST_CASE("collapse_runs merges consecutive duplicates") {
    CHECK(collapse_runs(make_stream({0, 0, 1, 1, 1, 0})).ids ==
          std::vector<std::int32_t>{0, 1, 0});
    CHECK(collapse_runs(make_stream({0, 1, 2})).ids == std::vector<std::int32_t>{0, 1, 2});
    CHECK(collapse_runs(make_stream({5})).ids == std::vector<std::int32_t>{5});
}

TEST_CASE("collapse_runs is idempotent") {
    Rng rng(3);
    for (int trial = 0; trial < 50; ++trial) {
        const SymbolStream s = random_stream(rng, 1 + uniform_below(rng, 200), 3);
        const SymbolStream once = collapse_runs(s);
        CHECK(collapse_runs(once) == once);
    }
}

TEST_CASE("pack_pair round-trips") {
    const auto [a, b] = unpack_pair(pack_pair(123456, 654321));
    CHECK(a == 123456);
    CHECK(b == 654321);
}
