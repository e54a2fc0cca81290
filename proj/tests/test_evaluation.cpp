// Copyright 2026-present the amsh project
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <doctest.h>

#include <random>

#include "amsh/evaluation.hpp"
#include "oracles.hpp"

using namespace amsh;

namespace {

std::vector<RankedEntry> identity_ranking(Index n) {
    std::vector<RankedEntry> out;
    for (Index t = 0; t < n; ++t) out.push_back({t, static_cast<int>(t)});
    return out;
}

}  // namespace

TEST_CASE("relevance is label overlap") {
    Matrix db(3, 3);
    db << 1, 0, 1, 0, 1, 1, 0, 0, 0;
    Vector one_hot(3);
    one_hot << 1, 0, 0;
    auto rel = relevance_row(one_hot, db);
    CHECK(rel[0] == 1);  // identical one-hot
    CHECK(rel[1] == 0);  // disjoint
    CHECK(rel[2] == 1);  // multi-label overlap in exactly one class

    Matrix queries(3, 2);
    queries << 1, 0, 0, 1, 0, 0;
    auto judgment = relevance(queries, db);
    REQUIRE(judgment.rows() == 2);
    REQUIRE(judgment.cols() == 3);
    CHECK(judgment(0, 0));
    CHECK(!judgment(0, 1));
    CHECK(judgment(1, 1));
    CHECK(judgment(1, 2));
    Matrix wrong(2, 1);
    wrong << 1, 0;
    CHECK_THROWS_AS(relevance(wrong, db), std::invalid_argument);
}

TEST_CASE("average precision worked examples") {
    // all relevant in the top positions
    {
        std::vector<char> rel = {1, 1, 1, 0, 0};
        CHECK(average_precision(identity_ranking(5), rel, 5) == 1.0);
    }
    // the spec's enumerated sequence [1,0,1,0] at cutoff 4
    {
        std::vector<char> rel = {1, 0, 1, 0};
        const double ap = average_precision(identity_ranking(4), rel, 4);
        CHECK(ap == doctest::Approx((1.0 + 2.0 / 3.0) / 2.0).epsilon(1e-15));
        CHECK(ap == doctest::Approx(0.83333333333).epsilon(1e-9));
    }
    // relevant items exist but none inside the cutoff
    {
        std::vector<char> rel = {0, 0, 0, 1};
        CHECK(average_precision(identity_ranking(4), rel, 2) == 0.0);
    }
    // no relevant item at all: undefined
    {
        std::vector<char> rel = {0, 0};
        CHECK_THROWS_AS(average_precision(identity_ranking(2), rel, 2), std::invalid_argument);
    }
}

TEST_CASE("average precision equals brute-force enumeration exactly") {
    std::mt19937_64 rng(1);
    std::uniform_int_distribution<Index> size(5, 60);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    int checked = 0;
    for (int rep = 0; rep < 1000; ++rep) {
        const Index n = size(rng);
        // random permutation as the ranking
        auto ranking = identity_ranking(n);
        std::shuffle(ranking.begin(), ranking.end(), rng);
        std::vector<char> rel(n, 0);
        bool any = false;
        for (Index t = 0; t < n; ++t) {
            rel[t] = unit(rng) < 0.35 ? 1 : 0;
            any = any || rel[t];
        }
        if (!any) rel[0] = 1;
        const Index cutoff = 1 + static_cast<Index>(unit(rng) * static_cast<double>(n - 1));
        const double fast = average_precision(ranking, rel, cutoff);
        const double slow = oracle::brute_force_ap(ranking, rel, cutoff);
        CHECK(fast == slow);  // bitwise: same summation order, recounted hits
        ++checked;
    }
    CHECK(checked == 1000);
}

TEST_CASE("mean average precision basics") {
    CHECK(mean_average_precision({0.75}) == 0.75);
    CHECK(mean_average_precision({1.0, 0.0}) == 0.5);
    std::vector<double> aps = {0.2, 0.9, 0.4, 0.7};
    std::vector<double> shuffled = {0.9, 0.7, 0.2, 0.4};
    CHECK(mean_average_precision(aps) == doctest::Approx(mean_average_precision(shuffled)));
    CHECK_THROWS_AS(mean_average_precision({}), std::invalid_argument);
}

TEST_CASE("pr_curve worked examples") {
    // perfect ranking, 3 relevant of 10
    {
        std::vector<char> rel(10, 0);
        rel[0] = rel[1] = rel[2] = 1;
        auto curve = pr_curve(identity_ranking(10), rel);
        REQUIRE(curve.size() == 3);
        CHECK(curve[0].recall == doctest::Approx(1.0 / 3.0));
        CHECK(curve[0].precision == 1.0);
        CHECK(curve[1].recall == doctest::Approx(2.0 / 3.0));
        CHECK(curve[1].precision == 1.0);
        CHECK(curve[2].recall == 1.0);
        CHECK(curve[2].precision == 1.0);
    }
    // worst ranking: all relevant at the end
    {
        std::vector<char> rel(10, 0);
        rel[7] = rel[8] = rel[9] = 1;
        auto curve = pr_curve(identity_ranking(10), rel);
        CHECK(curve.back().recall == 1.0);
        CHECK(curve.back().precision == doctest::Approx(3.0 / 10.0));
    }
    // the spec's [1,0,1] sequence
    {
        std::vector<char> rel = {1, 0, 1};
        auto curve = pr_curve(identity_ranking(3), rel);
        REQUIRE(curve.size() == 2);
        CHECK(curve[0].recall == 0.5);
        CHECK(curve[0].precision == 1.0);
        CHECK(curve[1].recall == 1.0);
        CHECK(curve[1].precision == doctest::Approx(2.0 / 3.0));
    }
    std::vector<char> none = {0, 0, 0};
    CHECK_THROWS_AS(pr_curve(identity_ranking(3), none), std::invalid_argument);

    // first pooled precision is 1 iff the top item is relevant
    std::vector<char> top_hit = {1, 0};
    CHECK(pr_curve(identity_ranking(2), top_hit).front().precision == 1.0);
    std::vector<char> top_miss = {0, 1};
    CHECK(pr_curve(identity_ranking(2), top_miss).front().precision < 1.0);
}

TEST_CASE("pr_curve recall is strictly increasing") {
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int rep = 0; rep < 50; ++rep) {
        std::vector<char> rel(30, 0);
        bool any = false;
        for (auto& c : rel) {
            c = unit(rng) < 0.3 ? 1 : 0;
            any = any || c;
        }
        if (!any) rel[11] = 1;
        auto curve = pr_curve(identity_ranking(30), rel);
        for (std::size_t k = 1; k < curve.size(); ++k)
            CHECK(curve[k].recall > curve[k - 1].recall);
        CHECK(curve.back().recall == 1.0);
    }
}

TEST_CASE("evaluate gives perfect scores for self-retrieval") {
    std::mt19937_64 rng(3);
    Matrix codes = oracle::random_signs(8, 12, rng);
    Matrix labels = Matrix::Zero(12, 12);
    for (Index t = 0; t < 12; ++t) labels(t, t) = 1.0;  // distinct one-hot labels
    auto report = evaluate(codes, codes, labels, labels, "self");
    CHECK(report.map == 1.0);
    CHECK(report.queries_excluded == 0);
    CHECK(report.cutoff == 12);
    CHECK(report.task == "self");
}

TEST_CASE("random codes on balanced 2-class labels score near one half") {
    std::mt19937_64 rng(4);
    const Index nq = 150, ndb = 1500;
    Matrix qcodes = oracle::random_signs(16, nq, rng);
    Matrix dbcodes = oracle::random_signs(16, ndb, rng);
    Matrix ql = Matrix::Zero(2, nq), dbl = Matrix::Zero(2, ndb);
    for (Index t = 0; t < nq; ++t) ql(t % 2, t) = 1.0;
    for (Index t = 0; t < ndb; ++t) dbl(t % 2, t) = 1.0;
    auto report = evaluate(qcodes, dbcodes, ql, dbl, "random");
    CHECK(report.map > 0.45);
    CHECK(report.map < 0.55);
}

TEST_CASE("evaluate is deterministic and tracks exclusions") {
    std::mt19937_64 rng(5);
    Matrix qcodes = oracle::random_signs(6, 8, rng);
    Matrix dbcodes = oracle::random_signs(6, 20, rng);
    Matrix ql = Matrix::Zero(3, 8), dbl = Matrix::Zero(3, 20);
    for (Index t = 0; t < 8; ++t) ql(t % 3, t) = 1.0;
    for (Index t = 0; t < 20; ++t) dbl(t % 2, t) = 1.0;  // class 2 absent from db
    auto a = evaluate(qcodes, dbcodes, ql, dbl, "t");
    auto b = evaluate(qcodes, dbcodes, ql, dbl, "t");
    CHECK(a.map == b.map);
    CHECK(a.queries_excluded == 2);  // queries labeled with the missing class
    CHECK(a.queries_total == 8);
    REQUIRE(a.pr_points.size() == 20);
    CHECK(a.pr_points.front().recall == doctest::Approx(0.05));
    CHECK(a.pr_points.back().recall == 1.0);
    for (std::size_t q = 0; q < a.per_query_ap.size(); ++q)
        CHECK(std::isnan(a.per_query_ap[q]) == (q % 3 == 2));
}

TEST_CASE("evaluate honors explicit cutoffs") {
    std::mt19937_64 rng(6);
    Matrix codes = oracle::random_signs(5, 10, rng);
    Matrix labels = Matrix::Zero(2, 10);
    for (Index t = 0; t < 10; ++t) labels(t % 2, t) = 1.0;
    auto report = evaluate(codes, codes, labels, labels, "k", 3);
    CHECK(report.cutoff == 3);
    CHECK_THROWS_AS(evaluate(codes, codes, labels, labels, "k", 11), std::invalid_argument);
}
