#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdint>
#include <vector>

#include "idcwh/centers.hpp"
#include "testutil.hpp"

using namespace idcwh;

TEST_CASE("init_centers: small random values, zero velocity, deterministic") {
    Rng rng(1);
    CenterBank cb = init_centers(5, 8, rng);
    REQUIRE(cb.class_count() == 5);
    REQUIRE(cb.code_length() == 8);
    bool nonzero = false;
    for (double v : cb.mu.data) {
        REQUIRE(std::abs(v) < 0.1);  // 0.01-scaled normals; |z| > 10 does not happen
        nonzero = nonzero || v != 0.0;
    }
    CHECK(nonzero);
    for (double v : cb.velocity.data) CHECK(v == 0.0);

    Rng r2(1);
    CHECK(init_centers(5, 8, r2) == cb);
    CHECK_THROWS_AS(init_centers(0, 8, rng), ConfigError);
    CHECK_THROWS_AS(init_centers(5, 0, rng), ConfigError);
}

TEST_CASE("vote_update: single sample votes its sign pattern into its class") {
    VoteAccumulator acc(3, 4);
    Mat h(1, 4);
    h.at(0, 0) = 0.5;
    h.at(0, 1) = -0.2;
    h.at(0, 2) = 0.0;  // sign(0) votes +1
    h.at(0, 3) = -7.0;
    LabelMatrix labels = testutil::one_hot(3, {1});
    vote_update(acc, h, labels);

    CHECK(acc.seen == std::vector<std::uint8_t>{0, 1, 0});
    CHECK(acc.sum_at(1, 0) == 1);
    CHECK(acc.sum_at(1, 1) == -1);
    CHECK(acc.sum_at(1, 2) == 1);
    CHECK(acc.sum_at(1, 3) == -1);
    for (std::uint32_t v = 0; v < 4; ++v) {
        CHECK(acc.sum_at(0, v) == 0);
        CHECK(acc.sum_at(2, v) == 0);
    }
}

TEST_CASE("vote_update: opposite votes cancel; multi-hot samples vote everywhere they belong") {
    VoteAccumulator acc(2, 2);
    Mat h(2, 2);
    h.at(0, 0) = 1.0;
    h.at(0, 1) = 1.0;
    h.at(1, 0) = -1.0;
    h.at(1, 1) = 1.0;
    LabelMatrix labels(2, 2);
    labels.set(0, 0);
    labels.set(0, 1);
    labels.set(1, 1);  // sample 1 carries both classes
    vote_update(acc, h, labels);

    CHECK(acc.sum_at(0, 0) == 0);  // +1 and -1 cancelled
    CHECK(acc.sum_at(0, 1) == 2);
    CHECK(acc.sum_at(1, 0) == -1);  // only sample 1 voted here
    CHECK(acc.sum_at(1, 1) == 1);
    CHECK(acc.seen == std::vector<std::uint8_t>{1, 1});
}

TEST_CASE("vote_update: accumulates across calls and matches a brute-force recount") {
    Rng rng(7);
    const std::uint32_t C = 4, l = 6;
    VoteAccumulator acc(C, l);
    std::vector<std::int64_t> expect(C * l, 0);
    std::vector<std::uint8_t> expect_seen(C, 0);

    for (int call = 0; call < 5; ++call) {
        std::uint32_t n = 1 + static_cast<std::uint32_t>(rng.below(6));
        Mat h = testutil::random_mat(rng, n, l);
        LabelMatrix labels = testutil::random_labels(rng, C, n, 2);
        vote_update(acc, h, labels);
        for (std::uint32_t i = 0; i < n; ++i)
            for (std::uint32_t c : labels.labels_of(i)) {
                expect_seen[c] = 1;
                for (std::uint32_t v = 0; v < l; ++v)
                    expect[c * l + v] += h.at(i, v) >= 0.0 ? 1 : -1;
            }
    }
    CHECK(acc.sums == expect);
    CHECK(acc.seen == expect_seen);
}

TEST_CASE("vote_update: shape mismatches are data errors") {
    VoteAccumulator acc(2, 3);
    Mat h(1, 4);  // wrong code length
    CHECK_THROWS_AS(vote_update(acc, h, testutil::one_hot(2, {0})), DataError);
    Mat h2(2, 3);  // two rows, one label column
    CHECK_THROWS_AS(vote_update(acc, h2, testutil::one_hot(2, {0})), DataError);
    Mat h3(1, 3);  // label class space differs from the accumulator's
    CHECK_THROWS_AS(vote_update(acc, h3, testutil::one_hot(5, {0})), DataError);
}

TEST_CASE("reset_epoch: clears sums and seen flags, idempotent") {
    VoteAccumulator acc(2, 2);
    Mat h(1, 2, 1.0);
    vote_update(acc, h, testutil::one_hot(2, {0}));
    REQUIRE(acc.seen[0] == 1);
    reset_epoch(acc);
    CHECK(acc.sums == std::vector<std::int64_t>(4, 0));
    CHECK(acc.seen == std::vector<std::uint8_t>(2, 0));
    reset_epoch(acc);
    CHECK(acc.sums == std::vector<std::int64_t>(4, 0));
}

TEST_CASE("estimate: majority sign per bit, zero votes resolve to +1, seen classes ascending") {
    VoteAccumulator acc(4, 3);
    // class 2: sums (3, -1, 0); class 0: sums (-2, 2, -2); classes 1 and 3 unseen
    acc.seen[2] = 1;
    acc.sums[2 * 3 + 0] = 3;
    acc.sums[2 * 3 + 1] = -1;
    acc.sums[2 * 3 + 2] = 0;
    acc.seen[0] = 1;
    acc.sums[0 * 3 + 0] = -2;
    acc.sums[0 * 3 + 1] = 2;
    acc.sums[0 * 3 + 2] = -2;

    EstimatedCenters u = estimate(acc);
    REQUIRE(u.classes == std::vector<std::uint32_t>{0, 2});
    REQUIRE(u.codes.size() == 2);
    CHECK(u.codes[0].to_signs() == std::vector<int>{-1, 1, -1});
    CHECK(u.codes[1].to_signs() == std::vector<int>{1, -1, 1});  // the zero bit goes +1
    CHECK(u.code_length == 3);
}

TEST_CASE("estimate: maximizes the vote inner product over all sign vectors") {
    Rng rng(3);
    for (int trial = 0; trial < 50; ++trial) {
        std::uint32_t l = 1 + static_cast<std::uint32_t>(rng.below(10));
        VoteAccumulator acc(1, l);
        acc.seen[0] = 1;
        for (std::uint32_t v = 0; v < l; ++v)
            acc.sums[v] = static_cast<std::int64_t>(rng.below(9)) - 4;  // in [-4, 4]

        EstimatedCenters u = estimate(acc);
        auto signs = u.codes[0].to_signs();
        std::int64_t got = 0;
        for (std::uint32_t v = 0; v < l; ++v) got += signs[v] * acc.sums[v];

        std::int64_t best = INT64_MIN;
        for (std::uint64_t mask = 0; mask < (1ull << l); ++mask) {
            std::int64_t s = 0;
            for (std::uint32_t v = 0; v < l; ++v)
                s += ((mask >> v) & 1 ? 1 : -1) * acc.sums[v];
            best = std::max(best, s);
        }
        REQUIRE(got == best);
    }
}

TEST_CASE("vote order does not change the accumulated sums") {
    Rng rng(9);
    const std::uint32_t C = 3, l = 4, n = 8;
    Mat h = testutil::random_mat(rng, n, l);
    LabelMatrix labels = testutil::random_labels(rng, C, n, 2);

    VoteAccumulator fwd(C, l);
    for (std::uint32_t i = 0; i < n; ++i) {
        Mat hi(1, l);
        for (std::uint32_t v = 0; v < l; ++v) hi.at(0, v) = h.at(i, v);
        std::vector<std::uint32_t> ids{i};
        vote_update(fwd, hi, labels.slice(ids));
    }
    VoteAccumulator rev(C, l);
    for (std::uint32_t i = n; i-- > 0;) {
        Mat hi(1, l);
        for (std::uint32_t v = 0; v < l; ++v) hi.at(0, v) = h.at(i, v);
        std::vector<std::uint32_t> ids{i};
        vote_update(rev, hi, labels.slice(ids));
    }
    CHECK(fwd.sums == rev.sums);
    CHECK(fwd.seen == rev.seen);
}

TEST_CASE("build_similarity: identity rows without class tags") {
    SimilarityMatrix s = build_similarity({1, 3}, 4);
    REQUIRE(s.row_classes == std::vector<std::uint32_t>{1, 3});
    REQUIRE(s.class_count == 4);
    for (std::uint32_t c = 0; c < 4; ++c) {
        CHECK(s.at(0, c) == (c == 1));
        CHECK(s.at(1, c) == (c == 3));
    }

    // Full square case.
    SimilarityMatrix full = build_similarity({0, 1, 2}, 3);
    for (std::uint32_t r = 0; r < 3; ++r)
        for (std::uint32_t c = 0; c < 3; ++c) CHECK(full.at(r, c) == (r == c));
}

TEST_CASE("build_similarity: composite classes are similar when their tag sets intersect") {
    // Three classes over two tags: {0}, {1}, {0,1}. The third overlaps both.
    LabelMatrix tags(2, 3);
    tags.set(0, 0);
    tags.set(1, 1);
    tags.set(0, 2);
    tags.set(1, 2);

    SimilarityMatrix s = build_similarity({0, 1, 2}, 3, &tags);
    CHECK(s.at(0, 0));
    CHECK_FALSE(s.at(0, 1));
    CHECK(s.at(0, 2));
    CHECK_FALSE(s.at(1, 0));
    CHECK(s.at(1, 1));
    CHECK(s.at(1, 2));
    CHECK(s.at(2, 0));
    CHECK(s.at(2, 1));
    CHECK(s.at(2, 2));
}

TEST_CASE("build_similarity: empty row set is a data error") {
    CHECK_THROWS_AS(build_similarity({}, 4), DataError);
}
