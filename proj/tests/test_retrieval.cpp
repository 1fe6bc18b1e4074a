#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <json.hpp>
#include <numeric>
#include <sstream>

#include "idcwh/retrieval.hpp"
#include "testutil.hpp"

using namespace idcwh;

namespace {

BinaryCode code_of(const std::vector<int>& pm1) { return BinaryCode::from_bits(pm1); }

// Random code of length l.
BinaryCode random_code(Rng& rng, std::uint32_t l) {
    return BinaryCode::from_signs(testutil::random_signs(rng, l));
}

RetrievalIndex index_of(const std::vector<BinaryCode>& codes,
                        const std::vector<std::uint32_t>& cls, std::uint32_t classes) {
    return make_index(codes, testutil::one_hot(classes, cls));
}

}  // namespace

TEST_CASE("hamming: fixtures and per-bit oracle") {
    auto a = code_of({1, 1, 1, 1, 1});
    auto b = code_of({-1, -1, -1, -1, -1});
    CHECK(hamming(a, a) == 0);
    CHECK(hamming(a, b) == 5);
    CHECK(hamming(b, a) == 5);

    Rng rng(1);
    for (int trial = 0; trial < 200; ++trial) {
        auto x = random_code(rng, 19);
        auto y = random_code(rng, 19);
        REQUIRE(hamming(x, y) == testutil::naive_hamming(x, y));
        REQUIRE(hamming(x, y) == hamming(y, x));
    }

    auto short_code = code_of({1, 1});
    CHECK_THROWS_AS(hamming(a, short_code), DataError);
}

TEST_CASE("make_index: validates alignment and uniform lengths") {
    std::vector<BinaryCode> codes{code_of({1, 1}), code_of({1, -1})};
    CHECK_THROWS_AS(make_index(codes, testutil::one_hot(2, {0})), DataError);  // 2 codes, 1 label
    std::vector<BinaryCode> mixed{code_of({1, 1}), code_of({1, -1, 1})};
    CHECK_THROWS_AS(make_index(mixed, testutil::one_hot(2, {0, 1})), DataError);
    CHECK_NOTHROW(make_index(codes, testutil::one_hot(2, {0, 1})));
}

TEST_CASE("rank: ascending distance with ties broken by ascending id") {
    // Distances from the query: id0 -> 2, id1 -> 0, id2 -> 2, id3 -> 1.
    auto q = code_of({1, 1, 1});
    std::vector<BinaryCode> db{code_of({-1, -1, 1}), code_of({1, 1, 1}), code_of({1, -1, -1}),
                               code_of({-1, 1, 1})};
    RetrievalIndex idx = index_of(db, {0, 0, 0, 0}, 1);
    CHECK(rank(q, idx) == std::vector<std::uint32_t>{1, 3, 0, 2});
}

TEST_CASE("rank: equals a stable sort oracle on random databases") {
    Rng rng(2);
    for (std::uint32_t l : {1u, 7u, 32u}) {
        std::vector<BinaryCode> db;
        std::vector<std::uint32_t> cls;
        for (int i = 0; i < 80; ++i) {
            db.push_back(random_code(rng, l));
            cls.push_back(static_cast<std::uint32_t>(rng.below(3)));
        }
        RetrievalIndex idx = index_of(db, cls, 3);
        for (int t = 0; t < 10; ++t) {
            auto q = random_code(rng, l);
            auto got = rank(q, idx);

            std::vector<std::uint32_t> expect(db.size());
            std::iota(expect.begin(), expect.end(), 0);
            std::stable_sort(expect.begin(), expect.end(), [&](std::uint32_t x, std::uint32_t y) {
                return hamming(q, db[x]) < hamming(q, db[y]);
            });
            REQUIRE(got == expect);
        }
    }

    RetrievalIndex empty;
    empty.code_length = 4;
    empty.labels = LabelMatrix(1, 0);
    CHECK_THROWS_AS(rank(code_of({1, 1, 1, 1}), empty), DataError);
}

TEST_CASE("relevance: label-set intersection against each database item") {
    LabelMatrix queries(3, 2);
    queries.set(0, 0);
    queries.set(1, 1);
    queries.set(2, 1);

    std::vector<BinaryCode> db{code_of({1}), code_of({-1}), code_of({1})};
    LabelMatrix db_labels(3, 3);
    db_labels.set(0, 0);
    db_labels.set(1, 1);
    db_labels.set(0, 2);
    db_labels.set(2, 2);
    RetrievalIndex idx = make_index(db, db_labels);

    CHECK(relevance(queries, 0, idx) == std::vector<std::uint8_t>{1, 0, 1});
    CHECK(relevance(queries, 1, idx) == std::vector<std::uint8_t>{0, 1, 1});
}

TEST_CASE("average_precision: the canonical 5/6 example and edge cases") {
    std::vector<std::uint8_t> rel{1, 0, 1};
    auto ap = average_precision(rel);
    REQUIRE(ap.has_value());
    CHECK(*ap == doctest::Approx(5.0 / 6.0).epsilon(1e-15));

    std::vector<std::uint8_t> all{1, 1, 1, 1};
    CHECK(*average_precision(all) == 1.0);

    std::vector<std::uint8_t> none{0, 0, 0};
    CHECK_FALSE(average_precision(none).has_value());
    CHECK_FALSE(average_precision(std::vector<std::uint8_t>{}).has_value());

    // Truncation changes both the hits and the normalizer.
    std::vector<std::uint8_t> tail{0, 1};
    CHECK_FALSE(average_precision(tail, 1).has_value());
    std::vector<std::uint8_t> front{1, 1, 0, 1};
    CHECK(*average_precision(front, 2) == 1.0);       // both top-2 relevant
    CHECK(*average_precision(front, 4) ==
          doctest::Approx((1.0 + 1.0 + 0.75) / 3.0).epsilon(1e-15));

    Rng rng(3);
    for (int t = 0; t < 100; ++t) {
        std::vector<std::uint8_t> r(1 + rng.below(12));
        for (auto& v : r) v = rng.uniform() < 0.4;
        auto mine = average_precision(r);
        auto oracle = testutil::naive_ap(r);
        REQUIRE(mine.has_value() == oracle.has_value());
        if (mine) REQUIRE(*mine == doctest::Approx(*oracle).epsilon(1e-15));
    }
}

namespace {

// Hand-checkable two-class fixture: four database items, two queries.
// Query 0 (class 0) distances: 0, 1, 3, 4; query 1 (class 1): 4, 3, 1, 0.
struct SmallWorld {
    QuerySet queries;
    RetrievalIndex index;

    SmallWorld() {
        std::vector<BinaryCode> db{code_of({1, 1, 1, 1}), code_of({1, 1, 1, -1}),
                                   code_of({1, -1, -1, -1}), code_of({-1, -1, -1, -1})};
        index = make_index(db, testutil::one_hot(2, {0, 0, 1, 1}));
        queries.codes = {code_of({1, 1, 1, 1}), code_of({-1, -1, -1, -1})};
        queries.labels = testutil::one_hot(2, {0, 1});
    }
};

}  // namespace

TEST_CASE("precision and recall at radius 2: fixture values") {
    SmallWorld w;
    // Query 0 retrieves ids {0, 1} (dists 0, 1): both class 0 -> precision 1, recall 1.
    // Query 1 retrieves ids {2, 3} (dists 1, 0): both class 1 -> precision 1, recall 1.
    auto [p, r] = precision_recall_at_radius(w.queries, w.index);
    CHECK(p == 1.0);
    CHECK(r == 1.0);
}

TEST_CASE("precision at radius: an empty retrieval set scores zero precision") {
    std::vector<BinaryCode> db{code_of({-1, -1, -1, -1, -1})};
    RetrievalIndex idx = index_of(db, {0}, 1);
    QuerySet q;
    q.codes = {code_of({1, 1, 1, 1, 1})};  // distance 5 > radius 2
    q.labels = testutil::one_hot(1, {0});
    auto [p, r] = precision_recall_at_radius(q, idx);
    CHECK(p == 0.0);
    CHECK(r == 0.0);
}

TEST_CASE("radius metrics: zero-relevant queries are left out of the averages") {
    std::vector<BinaryCode> db{code_of({1, 1}), code_of({1, -1})};
    RetrievalIndex idx = index_of(db, {0, 0}, 2);
    QuerySet q;
    q.codes = {code_of({1, 1}), code_of({1, 1})};
    q.labels = testutil::one_hot(2, {0, 1});  // second query's class is absent from the db
    auto [p, r] = precision_recall_at_radius(q, idx);
    // Only the first query counts: retrieves both items, both relevant.
    CHECK(p == 1.0);
    CHECK(r == 1.0);
}

TEST_CASE("radius metrics: brute-force oracle on random data") {
    Rng rng(4);
    const std::uint32_t l = 6, C = 3;
    std::vector<BinaryCode> db;
    std::vector<std::uint32_t> cls;
    for (int i = 0; i < 40; ++i) {
        db.push_back(random_code(rng, l));
        cls.push_back(static_cast<std::uint32_t>(rng.below(C)));
    }
    RetrievalIndex idx = index_of(db, cls, C);
    QuerySet q;
    std::vector<std::uint32_t> qcls;
    for (int i = 0; i < 15; ++i) {
        q.codes.push_back(random_code(rng, l));
        qcls.push_back(static_cast<std::uint32_t>(rng.below(C)));
    }
    q.labels = testutil::one_hot(C, qcls);

    for (std::uint32_t radius : {0u, 2u, 3u}) {
        auto [p, r] = precision_recall_at_radius(q, idx, radius);
        double psum = 0, rsum = 0;
        int counted = 0;
        for (std::size_t i = 0; i < q.codes.size(); ++i) {
            int rel_total = 0, retrieved = 0, hits = 0;
            for (std::size_t j = 0; j < db.size(); ++j) {
                bool is_rel = cls[j] == qcls[i];
                rel_total += is_rel;
                if (hamming(q.codes[i], db[j]) <= radius) {
                    ++retrieved;
                    hits += is_rel;
                }
            }
            if (rel_total == 0) continue;
            ++counted;
            psum += retrieved ? double(hits) / retrieved : 0.0;
            rsum += double(hits) / rel_total;
        }
        REQUIRE(counted > 0);
        REQUIRE(p == doctest::Approx(psum / counted).epsilon(1e-12));
        REQUIRE(r == doctest::Approx(rsum / counted).epsilon(1e-12));
    }
}

TEST_CASE("exclude_self: drops the query's own database row") {
    // Two identical codes in one class; each query is the same set.
    std::vector<BinaryCode> db{code_of({1, 1}), code_of({1, 1})};
    RetrievalIndex idx = index_of(db, {0, 0}, 1);
    QuerySet q;
    q.codes = db;
    q.labels = testutil::one_hot(1, {0, 0});

    auto ranked = rank(q.codes[0], idx);
    CHECK(ranked.size() == 2);  // plain ranking sees both

    auto [p, r] = precision_recall_at_radius(q, idx, 2, true);
    CHECK(p == 1.0);  // the one remaining item is relevant
    CHECK(r == 1.0);

    QuerySet mismatched = q;
    mismatched.codes.pop_back();
    mismatched.labels = testutil::one_hot(1, {0});
    CHECK_THROWS_AS(precision_recall_at_radius(mismatched, idx, 2, true), DataError);
}

TEST_CASE("precision_at_n: fixture, boundary, and range errors") {
    SmallWorld w;
    auto rows = precision_at_n(w.queries, w.index, {1, 2, 3, 4});
    REQUIRE(rows.size() == 4);
    CHECK(rows[0] == std::pair<std::uint32_t, double>{1, 1.0});
    CHECK(rows[1] == std::pair<std::uint32_t, double>{2, 1.0});
    CHECK(rows[2].first == 3);
    CHECK(rows[2].second == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
    // Full retrieval: precision equals the relevant fraction of the database.
    CHECK(rows[3].second == doctest::Approx(0.5).epsilon(1e-12));

    CHECK_THROWS_AS(precision_at_n(w.queries, w.index, {0}), ConfigError);
    CHECK_THROWS_AS(precision_at_n(w.queries, w.index, {5}), ConfigError);
}

TEST_CASE("pr_curve: one point per cutoff, recall never decreases, brute-force oracle") {
    Rng rng(5);
    const std::uint32_t l = 5, C = 2;
    std::vector<BinaryCode> db;
    std::vector<std::uint32_t> cls;
    for (int i = 0; i < 12; ++i) {
        db.push_back(random_code(rng, l));
        cls.push_back(static_cast<std::uint32_t>(rng.below(C)));
    }
    RetrievalIndex idx = index_of(db, cls, C);
    QuerySet q;
    std::vector<std::uint32_t> qcls;
    for (int i = 0; i < 6; ++i) {
        q.codes.push_back(random_code(rng, l));
        qcls.push_back(static_cast<std::uint32_t>(rng.below(C)));
    }
    q.labels = testutil::one_hot(C, qcls);

    auto curve = pr_curve(q, idx);
    REQUIRE(curve.size() == db.size());
    for (std::size_t k = 1; k < curve.size(); ++k) REQUIRE(curve[k].first >= curve[k - 1].first);
    CHECK(curve.back().first == doctest::Approx(1.0).epsilon(1e-12));

    // Brute force at each cutoff.
    for (std::size_t cut = 1; cut <= db.size(); ++cut) {
        double psum = 0, rsum = 0;
        int counted = 0;
        for (std::size_t i = 0; i < q.codes.size(); ++i) {
            auto order = rank(q.codes[i], idx);
            int rel_total = 0;
            for (std::size_t j = 0; j < db.size(); ++j) rel_total += cls[j] == qcls[i];
            if (rel_total == 0) continue;
            ++counted;
            int hits = 0;
            for (std::size_t k = 0; k < cut; ++k) hits += cls[order[k]] == qcls[i];
            psum += double(hits) / double(cut);
            rsum += double(hits) / rel_total;
        }
        REQUIRE(curve[cut - 1].second == doctest::Approx(psum / counted).epsilon(1e-12));
        REQUIRE(curve[cut - 1].first == doctest::Approx(rsum / counted).epsilon(1e-12));
    }
}

TEST_CASE("map is invariant to materializing the tie-broken order") {
    Rng rng(6);
    const std::uint32_t l = 4;  // short codes force plenty of distance ties
    std::vector<BinaryCode> db;
    std::vector<std::uint32_t> cls;
    for (int i = 0; i < 30; ++i) {
        db.push_back(random_code(rng, l));
        cls.push_back(static_cast<std::uint32_t>(rng.below(2)));
    }
    RetrievalIndex idx = index_of(db, cls, 2);
    auto q = random_code(rng, l);
    auto order = rank(q, idx);

    // Rebuild the database with rows physically arranged in ranked order; the
    // re-ranked sequence must then be the identity and carry the same
    // relevance pattern, so AP is unchanged.
    std::vector<BinaryCode> sorted_db;
    std::vector<std::uint32_t> sorted_cls;
    for (auto id : order) {
        sorted_db.push_back(db[id]);
        sorted_cls.push_back(cls[id]);
    }
    RetrievalIndex idx2 = index_of(sorted_db, sorted_cls, 2);
    auto order2 = rank(q, idx2);
    for (std::size_t k = 0; k < order2.size(); ++k) REQUIRE(order2[k] == k);

    LabelMatrix qlab = testutil::one_hot(2, {0});
    std::vector<std::uint8_t> rel1, rel2;
    auto base_rel1 = relevance(qlab, 0, idx);
    auto base_rel2 = relevance(qlab, 0, idx2);
    for (std::size_t k = 0; k < order.size(); ++k) {
        rel1.push_back(base_rel1[order[k]]);
        rel2.push_back(base_rel2[order2[k]]);
    }
    CHECK(rel1 == rel2);
    auto ap1 = average_precision(rel1), ap2 = average_precision(rel2);
    REQUIRE(ap1.has_value());
    CHECK(*ap1 == *ap2);
}

TEST_CASE("dwdb_ratio: hand fixtures") {
    // Two tight classes: intra distances 2 and 2; inter 4, 2, 2, 4.
    std::vector<BinaryCode> codes{code_of({1, 1, 1, 1}), code_of({1, 1, -1, -1}),
                                  code_of({-1, -1, -1, -1}), code_of({-1, -1, 1, 1})};
    LabelMatrix labels = testutil::one_hot(2, {0, 0, 1, 1});
    CHECK(dwdb_ratio(codes, labels) == doctest::Approx(2.0 / 3.0).epsilon(1e-12));

    // Perfectly collapsed classes: intra distance zero.
    std::vector<BinaryCode> tight{code_of({1, 1, 1}), code_of({1, 1, 1}), code_of({-1, -1, -1})};
    CHECK(dwdb_ratio(tight, testutil::one_hot(2, {0, 0, 1})) == 0.0);
}

TEST_CASE("dwdb_ratio: near one for random codes with random labels") {
    Rng rng(7);
    std::vector<BinaryCode> codes;
    std::vector<std::uint32_t> cls;
    for (int i = 0; i < 60; ++i) {
        codes.push_back(random_code(rng, 32));
        cls.push_back(static_cast<std::uint32_t>(rng.below(3)));
    }
    double ratio = dwdb_ratio(codes, testutil::one_hot(3, cls));
    CHECK(ratio > 0.85);
    CHECK(ratio < 1.15);
}

TEST_CASE("dwdb_ratio: degenerate pair structures are data errors") {
    // All one class: no inter pairs.
    std::vector<BinaryCode> same{code_of({1, 1}), code_of({1, -1})};
    CHECK_THROWS_AS(dwdb_ratio(same, testutil::one_hot(1, {0, 0})), DataError);
    // All distinct classes: no intra pairs.
    CHECK_THROWS_AS(dwdb_ratio(same, testutil::one_hot(2, {0, 1})), DataError);
    // Identical codes across classes: inter mean is zero.
    std::vector<BinaryCode> flat{code_of({1, 1}), code_of({1, 1}), code_of({1, 1})};
    CHECK_THROWS_AS(dwdb_ratio(flat, testutil::one_hot(2, {0, 0, 1})), DataError);
    // A single item has no pairs at all.
    std::vector<BinaryCode> one{code_of({1, 1})};
    CHECK_THROWS_AS(dwdb_ratio(one, testutil::one_hot(1, {0})), DataError);
}

TEST_CASE("evaluate: composes the individual metrics verbatim") {
    Rng rng(8);
    const std::uint32_t l = 6, C = 3;
    std::vector<BinaryCode> db;
    std::vector<std::uint32_t> cls;
    for (int i = 0; i < 25; ++i) {
        db.push_back(random_code(rng, l));
        cls.push_back(static_cast<std::uint32_t>(rng.below(C)));
    }
    RetrievalIndex idx = index_of(db, cls, C);
    QuerySet q;
    std::vector<std::uint32_t> qcls;
    for (int i = 0; i < 10; ++i) {
        q.codes.push_back(random_code(rng, l));
        qcls.push_back(static_cast<std::uint32_t>(rng.below(C)));
    }
    q.labels = testutil::one_hot(C, qcls);
    std::vector<std::uint32_t> n_grid{1, 5, 25};

    MetricsReport rep = evaluate(q, idx, n_grid);
    CHECK(rep.query_count == 10);
    CHECK(rep.database_count == 25);
    CHECK(rep.code_length == l);
    CHECK_FALSE(rep.map_k.has_value());
    CHECK_FALSE(rep.exclude_self);

    // MAP by hand.
    double ap_sum = 0;
    int counted = 0;
    for (std::size_t i = 0; i < q.codes.size(); ++i) {
        auto order = rank(q.codes[i], idx);
        auto rel = relevance(q.labels, static_cast<std::uint32_t>(i), idx);
        std::vector<std::uint8_t> ranked;
        for (auto id : order) ranked.push_back(rel[id]);
        auto ap = average_precision(ranked);
        if (!ap) continue;
        ++counted;
        ap_sum += *ap;
    }
    REQUIRE(counted > 0);
    CHECK(rep.map == doctest::Approx(ap_sum / counted).epsilon(1e-12));

    auto [p2, r2] = precision_recall_at_radius(q, idx);
    CHECK(rep.p_at_h2 == doctest::Approx(p2).epsilon(1e-12));
    CHECK(rep.r_at_h2 == doctest::Approx(r2).epsilon(1e-12));

    auto pn = precision_at_n(q, idx, n_grid);
    REQUIRE(rep.p_at_n.size() == pn.size());
    for (std::size_t k = 0; k < pn.size(); ++k) {
        CHECK(rep.p_at_n[k].first == pn[k].first);
        CHECK(rep.p_at_n[k].second == doctest::Approx(pn[k].second).epsilon(1e-12));
    }

    auto curve = pr_curve(q, idx);
    REQUIRE(rep.pr.size() == curve.size());
    for (std::size_t k = 0; k < curve.size(); ++k) {
        CHECK(rep.pr[k].first == doctest::Approx(curve[k].first).epsilon(1e-12));
        CHECK(rep.pr[k].second == doctest::Approx(curve[k].second).epsilon(1e-12));
    }

    REQUIRE(rep.dwdb.has_value());
    CHECK(*rep.dwdb == doctest::Approx(dwdb_ratio(db, idx.labels)).epsilon(1e-12));

    // Truncated MAP.
    MetricsReport rep2 = evaluate(q, idx, n_grid, 3);
    REQUIRE(rep2.map_k.has_value());
    CHECK(*rep2.map_k == 3);
    double ap3_sum = 0;
    int counted3 = 0;
    for (std::size_t i = 0; i < q.codes.size(); ++i) {
        auto order = rank(q.codes[i], idx);
        auto rel = relevance(q.labels, static_cast<std::uint32_t>(i), idx);
        std::vector<std::uint8_t> ranked;
        for (auto id : order) ranked.push_back(rel[id]);
        if (!average_precision(ranked)) continue;  // counted iff relevant in the FULL ranking
        ++counted3;
        ap3_sum += average_precision(ranked, 3).value_or(0.0);
    }
    CHECK(rep2.map == doctest::Approx(ap3_sum / counted3).epsilon(1e-12));
}

TEST_CASE("evaluate: single-class database reports no distance ratio") {
    std::vector<BinaryCode> db{code_of({1, 1}), code_of({1, -1})};
    RetrievalIndex idx = index_of(db, {0, 0}, 1);
    QuerySet q;
    q.codes = {code_of({1, 1})};
    q.labels = testutil::one_hot(1, {0});
    MetricsReport rep = evaluate(q, idx, {1});
    CHECK_FALSE(rep.dwdb.has_value());
    CHECK(rep.map == 1.0);
}

TEST_CASE("evaluate: random codes score near the class prior") {
    Rng rng(9);
    const std::uint32_t C = 10, l = 32;
    std::vector<BinaryCode> db;
    std::vector<std::uint32_t> cls;
    for (int i = 0; i < 400; ++i) {
        db.push_back(random_code(rng, l));
        cls.push_back(static_cast<std::uint32_t>(rng.below(C)));
    }
    QuerySet q;
    std::vector<std::uint32_t> qcls;
    for (int i = 0; i < 60; ++i) {
        q.codes.push_back(random_code(rng, l));
        qcls.push_back(static_cast<std::uint32_t>(rng.below(C)));
    }
    q.labels = testutil::one_hot(C, qcls);
    MetricsReport rep = evaluate(q, index_of(db, cls, C), {10});
    CHECK(rep.map > 0.05);
    CHECK(rep.map < 0.17);  // prior is ~0.1 for balanced random labels
}

TEST_CASE("evaluate: query/database class spaces must agree") {
    std::vector<BinaryCode> db{code_of({1, 1})};
    RetrievalIndex idx = index_of(db, {0}, 2);
    QuerySet q;
    q.codes = {code_of({1, 1})};
    q.labels = testutil::one_hot(3, {0});  // three classes vs the database's two
    CHECK_THROWS_AS(evaluate(q, idx, {1}), DataError);

    QuerySet wrong_l;
    wrong_l.codes = {code_of({1, 1, 1})};
    wrong_l.labels = testutil::one_hot(2, {0});
    CHECK_THROWS_AS(evaluate(wrong_l, idx, {1}), DataError);
}

TEST_CASE("codes file: round-trip, empty-split header, corruption checks") {
    testutil::TmpDir tmp("codes");
    Rng rng(10);
    std::vector<BinaryCode> codes;
    std::vector<std::uint32_t> cls;
    for (int i = 0; i < 9; ++i) {
        codes.push_back(random_code(rng, 70));  // two words per code
        cls.push_back(static_cast<std::uint32_t>(rng.below(4)));
    }
    LabelMatrix labels = testutil::one_hot(4, cls);
    auto path = tmp.file("codes.idcb");
    save_codes(codes, labels, path);
    auto [back_codes, back_labels] = load_codes(path);
    CHECK(back_codes == codes);
    CHECK(back_labels == labels);

    // Empty code list: the pinned length keeps the header meaningful.
    auto empty_path = tmp.file("empty.idcb");
    save_codes({}, LabelMatrix(4, 0), empty_path, 70);
    auto [no_codes, no_labels] = load_codes(empty_path);
    CHECK(no_codes.empty());
    CHECK(no_labels.class_count == 4);
    CHECK(no_labels.sample_count == 0);

    // Length pin mismatch is refused.
    CHECK_THROWS_AS(save_codes(codes, labels, tmp.file("pin.idcb"), 64), DataError);

    std::string bytes = testutil::slurp(path);
    // A set bit beyond length 70 in the first code's second word (bytes 12..27
    // hold code 0; bits 64..69 live in the low byte of the second word).
    std::string corrupt = bytes;
    corrupt[12 + 8 + 7] = char(0x80);  // bit 127
    auto corrupt_path = tmp.file("corrupt.idcb");
    std::ofstream(corrupt_path, std::ios::binary).write(corrupt.data(), corrupt.size());
    try {
        load_codes(corrupt_path);
        FAIL("stray trailing bits accepted");
    } catch (const DataError& e) {
        CHECK(std::string(e.what()).find("corrupt") != std::string::npos);
    }

    std::string truncated = bytes.substr(0, 40);
    auto trunc_path = tmp.file("trunc.idcb");
    std::ofstream(trunc_path, std::ios::binary).write(truncated.data(), truncated.size());
    CHECK_THROWS_AS(load_codes(trunc_path), DataError);

    std::string bad_magic = bytes;
    bad_magic[0] = 'Z';
    auto magic_path = tmp.file("magic.idcb");
    std::ofstream(magic_path, std::ios::binary).write(bad_magic.data(), bad_magic.size());
    CHECK_THROWS_AS(load_codes(magic_path), DataError);
}

TEST_CASE("report writers: JSON and CSV round out the same numbers") {
    testutil::TmpDir tmp("report");
    SmallWorld w;
    MetricsReport rep = evaluate(w.queries, w.index, {1, 2});

    auto json_path = tmp.file("report.json");
    export_json(rep, json_path);
    auto parsed = nlohmann::json::parse(testutil::slurp(json_path));
    CHECK(parsed["map"].get<double>() == rep.map);
    CHECK(parsed["p_at_h2"].get<double>() == rep.p_at_h2);
    CHECK(parsed["r_at_h2"].get<double>() == rep.r_at_h2);
    CHECK(parsed["query_count"].get<std::uint32_t>() == 2);
    CHECK(parsed["database_count"].get<std::uint32_t>() == 4);
    CHECK(parsed["map_k"].is_null());
    REQUIRE(parsed["p_at_n"].size() == 2);
    CHECK(parsed["p_at_n"][0]["n"].get<std::uint32_t>() == 1);
    CHECK(parsed["p_at_n"][0]["precision"].get<double>() == rep.p_at_n[0].second);
    REQUIRE(parsed["pr_curve"].size() == 4);
    CHECK(parsed["pr_curve"][3]["recall"].get<double>() == rep.pr[3].first);
    REQUIRE(rep.dwdb.has_value());
    CHECK(parsed["dwdb"].get<double>() == *rep.dwdb);
    // Documented evaluation conventions ride along with the numbers.
    CHECK(parsed["conventions"]["tie_break"] == "ascending database id");
    CHECK(parsed["conventions"].contains("zero_relevant_queries"));
    CHECK(parsed["conventions"].contains("empty_radius_retrieval"));
    CHECK(parsed["conventions"].contains("sign_of_zero"));

    auto csv_path = tmp.file("report.csv");
    export_csv(rep, csv_path);
    std::istringstream in(testutil::slurp(csv_path));
    std::string line;
    int comments = 0;
    bool saw_header = false, saw_map = false, saw_pr = false;
    while (std::getline(in, line)) {
        if (line.starts_with("#")) {
            ++comments;
            continue;
        }
        if (line == "metric,x,y") {
            saw_header = true;
            continue;
        }
        if (line.starts_with("map,")) {
            saw_map = true;
            std::string tail = line.substr(line.rfind(',') + 1);
            CHECK(std::stod(tail) == rep.map);
        }
        saw_pr = saw_pr || line.starts_with("pr,");
    }
    CHECK(comments >= 1);
    CHECK(saw_header);
    CHECK(saw_map);
    CHECK(saw_pr);
}
