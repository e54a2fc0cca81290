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

#include <algorithm>
#include <random>
#include <set>

#include "amsh/function_learning.hpp"
#include "oracles.hpp"

using namespace amsh;

namespace {

Matrix centered(Matrix x) { return x.colwise() - Vector(x.rowwise().mean()); }

}  // namespace

TEST_CASE("fit_kernel with k = n selects every column once") {
    std::mt19937_64 rng(1);
    Matrix x = centered(oracle::random_gaussian(4, 9, rng));
    auto km = fit_kernel(x, Vector::Zero(4), 9, 5);
    REQUIRE(km.anchors.cols() == 9);
    std::multiset<std::string> a, b;
    for (Index j = 0; j < 9; ++j) {
        std::string sa, sb;
        for (Index i = 0; i < 4; ++i) {
            sa += std::to_string(x(i, j)) + ",";
            sb += std::to_string(km.anchors(i, j)) + ",";
        }
        a.insert(sa);
        b.insert(sb);
    }
    CHECK(a == b);
}

TEST_CASE("fit_kernel bandwidth on a two-point set is the point distance") {
    Matrix x(2, 2);
    x << 1.0, -1.0, 2.0, -2.0;  // columns (1,2) and (-1,-2)
    auto km = fit_kernel(x, Vector::Zero(2), 1, 3);
    CHECK(km.bandwidth == doctest::Approx((x.col(0) - x.col(1)).norm()).epsilon(1e-12));
}

TEST_CASE("fit_kernel is deterministic and validates input") {
    std::mt19937_64 rng(2);
    Matrix x = centered(oracle::random_gaussian(3, 12, rng));
    auto a = fit_kernel(x, Vector::Zero(3), 5, 77);
    auto b = fit_kernel(x, Vector::Zero(3), 5, 77);
    CHECK(a.anchors == b.anchors);
    CHECK(a.bandwidth == b.bandwidth);

    CHECK_THROWS_AS(fit_kernel(x, Vector::Zero(3), 13, 0), std::invalid_argument);
    CHECK_THROWS_AS(fit_kernel(x, Vector::Zero(3), 0, 0), std::invalid_argument);

    Matrix identical = Matrix::Zero(3, 4);
    CHECK_THROWS_AS(fit_kernel(identical, Vector::Zero(3), 2, 0), std::invalid_argument);
}

TEST_CASE("bandwidth modes differ exactly by the anchor-row exclusion") {
    Matrix x(1, 3);
    x << -1.0, 0.0, 1.0;
    // k = 2; compute both modes and check against hand-computed means
    for (std::uint64_t seed : {0ULL, 1ULL, 2ULL}) {
        auto all = fit_kernel(x, Vector::Zero(1), 2, seed, BandwidthMode::all);
        auto non = fit_kernel(x, Vector::Zero(1), 2, seed, BandwidthMode::non_anchor);
        double sum_all = 0.0;
        int cnt_all = 0;
        double sum_non = 0.0;
        int cnt_non = 0;
        std::vector<Index> picked;
        for (Index j = 0; j < 2; ++j) {
            for (Index t = 0; t < 3; ++t)
                if ((x.col(t) - all.anchors.col(j)).norm() == 0.0) picked.push_back(t);
        }
        std::sort(picked.begin(), picked.end());
        picked.erase(std::unique(picked.begin(), picked.end()), picked.end());
        REQUIRE(picked.size() == 2);
        for (Index t = 0; t < 3; ++t) {
            const bool is_anchor = std::find(picked.begin(), picked.end(), t) != picked.end();
            for (Index j = 0; j < 2; ++j) {
                const double d = (x.col(t) - all.anchors.col(j)).norm();
                if (x(0, t) != all.anchors(0, j)) {
                    sum_all += d;
                    ++cnt_all;
                    if (!is_anchor) {
                        sum_non += d;
                        ++cnt_non;
                    }
                }
            }
        }
        CHECK(all.bandwidth == doctest::Approx(sum_all / cnt_all).epsilon(1e-12));
        CHECK(non.bandwidth == doctest::Approx(sum_non / cnt_non).epsilon(1e-12));
    }
}

TEST_CASE("kernel_features honors the printed exponent form") {
    std::mt19937_64 rng(3);
    Matrix x = centered(oracle::random_gaussian(3, 10, rng));
    auto km = fit_kernel(x, Vector::Zero(3), 4, 1);
    Matrix phi = kernel_features(km, x);
    CHECK((phi.array() > 0.0).all());
    CHECK((phi.array() <= 1.0).all());

    // entry by entry: exp(-dist / (2 delta^2)) with the unsquared distance
    for (Index j = 0; j < km.anchors.cols(); ++j)
        for (Index t = 0; t < x.cols(); ++t) {
            const double d = (x.col(t) - km.anchors.col(j)).norm();
            CHECK(phi(j, t) ==
                  doctest::Approx(std::exp(-d / (2.0 * km.bandwidth * km.bandwidth)))
                      .epsilon(1e-12));
        }

    // a sample sitting on an anchor maps to exactly 1 in that coordinate
    Matrix probe = km.anchors.col(2);
    Matrix phi_probe = kernel_features(km, probe);
    CHECK(phi_probe(2, 0) == 1.0);

    // squared mode is the conventional Gaussian
    auto km_sq = km;
    km_sq.exp_mode = KernelExp::squared;
    Matrix phi_sq = kernel_features(km_sq, x);
    for (Index j = 0; j < km.anchors.cols(); ++j)
        for (Index t = 0; t < x.cols(); ++t) {
            const double d2 = (x.col(t) - km.anchors.col(j)).squaredNorm();
            CHECK(phi_sq(j, t) ==
                  doctest::Approx(std::exp(-d2 / (2.0 * km.bandwidth * km.bandwidth)))
                      .epsilon(1e-12));
        }
}

TEST_CASE("kernel features increase when the bandwidth grows") {
    std::mt19937_64 rng(4);
    Matrix x = centered(oracle::random_gaussian(2, 8, rng));
    auto km = fit_kernel(x, Vector::Zero(2), 3, 9);
    auto wide = km;
    wide.bandwidth = 2.0 * km.bandwidth;
    Matrix a = kernel_features(km, x);
    Matrix b = kernel_features(wide, x);
    CHECK(((b - a).array() >= -1e-15).all());
}

TEST_CASE("identity kernel passes centered features through") {
    std::mt19937_64 rng(5);
    Matrix x = centered(oracle::random_gaussian(3, 6, rng));
    auto km = identity_kernel(Vector::Zero(3));
    CHECK(kernel_features(km, x) == x);
    CHECK(km.size() == 3);
}

TEST_CASE("solve_hash_function with an identity design recovers the codes") {
    std::mt19937_64 rng(6);
    Matrix codes = oracle::random_signs(3, 5, rng);
    Matrix phi = Matrix::Identity(5, 5);
    Matrix f = solve_hash_function(codes, Matrix::Zero(3, 5), phi, 0.0);
    CHECK((f - codes).norm() <= 1e-10);
    CHECK((codes - f * phi).norm() <= 1e-10);
}

TEST_CASE("solve_hash_function matches the ridge oracle and is stationary") {
    std::mt19937_64 rng(7);
    for (int rep = 0; rep < 5; ++rep) {
        Matrix phi = oracle::random_gaussian(4, 10, rng).array().abs() + 0.05;
        Matrix codes = oracle::random_signs(3, 10, rng);
        Matrix margins = oracle::random_gaussian(3, 10, rng).cwiseAbs();
        for (double ridge : {0.0, 1e-6, 0.5}) {
            Matrix f = solve_hash_function(codes, margins, phi, ridge);
            Matrix f_oracle = oracle::ridge_regression(
                codes + codes.cwiseProduct(margins), phi, ridge);
            CHECK((f - f_oracle).norm() <= 1e-8 * std::max(1.0, f_oracle.norm()));
            const Matrix target = codes + codes.cwiseProduct(margins);
            Matrix grad = -2.0 * (target - f * phi) * phi.transpose() + 2.0 * ridge * f;
            CHECK(grad.cwiseAbs().maxCoeff() <= 1e-8 * std::max(1.0, target.norm()));
        }
    }
}

TEST_CASE("solve_hash_function reports singular systems at zero ridge") {
    std::mt19937_64 rng(8);
    Matrix phi = oracle::random_gaussian(5, 3, rng);  // rank <= 3 < k = 5
    Matrix codes = oracle::random_signs(2, 3, rng);
    CHECK_THROWS_WITH_AS(solve_hash_function(codes, Matrix::Zero(2, 3), phi, 0.0),
                         doctest::Contains("ridge"), std::runtime_error);
    CHECK_NOTHROW(solve_hash_function(codes, Matrix::Zero(2, 3), phi, 1e-6));
}

TEST_CASE("solve_bit_margins clamps the code-side residual") {
    Matrix codes(1, 2), value(1, 2);
    codes << 1.0, -1.0;
    value << 1.5, -2.0;
    // pick F, Phi with F*Phi = value
    Matrix f(1, 1), phi(1, 2);
    f << 1.0;
    phi = value;
    Matrix m = solve_bit_margins(codes, f, phi);
    CHECK(m(0, 0) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(m(0, 1) == doctest::Approx(1.0).epsilon(1e-15));

    // exact fit leaves margins at zero
    Matrix m0 = solve_bit_margins(codes, f, codes);
    CHECK((m0.array() == 0.0).all());
}

TEST_CASE("bit margins never hurt the step-2 residual") {
    std::mt19937_64 rng(9);
    for (int rep = 0; rep < 5; ++rep) {
        Matrix phi = oracle::random_gaussian(3, 8, rng);
        Matrix codes = oracle::random_signs(2, 8, rng);
        Matrix f = oracle::random_gaussian(2, 3, rng);
        Matrix m = solve_bit_margins(codes, f, phi);
        CHECK((m.array() >= 0.0).all());
        const Matrix fitted = f * phi;
        for (Index a = 0; a < 2; ++a)
            for (Index t = 0; t < 8; ++t) {
                const double with_margin =
                    std::pow(codes(a, t) * (1.0 + m(a, t)) - fitted(a, t), 2.0);
                const double without = std::pow(codes(a, t) - fitted(a, t), 2.0);
                CHECK(with_margin <= without + 1e-12);
                // per-entry minimality over sampled nonnegative margins
                std::uniform_real_distribution<double> unit(0.0, 3.0);
                for (int s = 0; s < 20; ++s) {
                    const double alt = unit(rng);
                    CHECK(with_margin <=
                          std::pow(codes(a, t) * (1.0 + alt) - fitted(a, t), 2.0) + 1e-12);
                }
            }
    }
}

TEST_CASE("train_functions decreases its objective and is deterministic") {
    std::mt19937_64 rng(10);
    std::vector<Matrix> phi, codes;
    for (Index n : {30, 24}) {
        Matrix x = centered(oracle::random_gaussian(5, n, rng));
        auto km = fit_kernel(x, Vector::Zero(5), 12, 3);
        phi.push_back(kernel_features(km, x));
        codes.push_back(oracle::random_signs(4, n, rng));
    }
    Hyperparams hp;
    hp.bits = 4;
    auto a = train_functions(phi, codes, hp);
    auto b = train_functions(phi, codes, hp);
    for (std::size_t i = 0; i < 2; ++i) {
        CHECK(a.hash_fn[i] == b.hash_fn[i]);
        CHECK((a.margins[i].array() >= 0.0).all());
    }
    REQUIRE(a.objective_trace.size() >= 2);
    for (std::size_t t = 1; t < a.objective_trace.size(); ++t)
        CHECK(a.objective_trace[t] <=
              a.objective_trace[t - 1] + 1e-9 * std::max(1.0, a.objective_trace[t - 1]));
}

TEST_CASE("margins strictly widen what the hash functions can fit") {
    std::mt19937_64 rng(11);
    std::vector<Matrix> phi, codes;
    Matrix x = centered(oracle::random_gaussian(4, 40, rng));
    auto km = fit_kernel(x, Vector::Zero(4), 6, 3);
    phi.push_back(kernel_features(km, x));
    codes.push_back(oracle::random_signs(3, 40, rng));
    Matrix x2 = centered(oracle::random_gaussian(4, 32, rng));
    auto km2 = fit_kernel(x2, Vector::Zero(4), 6, 4);
    phi.push_back(kernel_features(km2, x2));
    codes.push_back(oracle::random_signs(3, 32, rng));

    Hyperparams hp;
    hp.bits = 3;
    hp.max_iters = 8;
    hp.rel_tol = 0.0;
    auto active = train_functions(phi, codes, hp, true);
    auto frozen = train_functions(phi, codes, hp, false);
    REQUIRE(active.objective_trace.size() == frozen.objective_trace.size());
    for (std::size_t t = 0; t < active.objective_trace.size(); ++t)
        CHECK(active.objective_trace[t] <= frozen.objective_trace[t] + 1e-12);
    for (const auto& m : frozen.margins) CHECK((m.array() == 0.0).all());
}
