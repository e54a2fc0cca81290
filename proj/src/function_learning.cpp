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

#include "amsh/function_learning.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace amsh {

namespace {

// Pairwise Euclidean distances, samples (columns of x) against anchors.
Matrix pairwise_distances(const Matrix& x, const Matrix& anchors) {
    const Eigen::RowVectorXd xn = x.colwise().squaredNorm();
    const Vector an = anchors.colwise().squaredNorm().transpose();
    Matrix d2 = -2.0 * (anchors.transpose() * x);  // k x n
    d2.colwise() += an;
    d2.rowwise() += xn;
    return d2.cwiseMax(0.0).cwiseSqrt();
}

Eigen::LDLT<Matrix> factor_gram(const Matrix& phi, double ridge) {
    require(ridge >= 0.0, "solve_hash_function: negative ridge");
    Matrix gram = phi * phi.transpose();
    gram.diagonal().array() += ridge;
    Eigen::LDLT<Matrix> ldlt(gram);
    bool singular = ldlt.info() != Eigen::Success;
    if (!singular && ridge == 0.0) {
        const double dmax = ldlt.vectorD().cwiseAbs().maxCoeff();
        singular = !(ldlt.vectorD().minCoeff() > dmax * 1e-13);
    }
    if (singular)
        throw std::runtime_error(
            "hash-function system is singular; set ridge > 0 to regularize it");
    return ldlt;
}

Matrix solve_with_factor(const Matrix& codes, const Matrix& margins, const Matrix& phi,
                         const Eigen::LDLT<Matrix>& ldlt) {
    const Matrix target = codes + codes.cwiseProduct(margins);
    return ldlt.solve(phi * target.transpose()).transpose();
}

}  // namespace

KernelMap fit_kernel(const Matrix& centered_features, const Vector& centering_mean, int k,
                     std::uint64_t seed, BandwidthMode bandwidth_mode, KernelExp exp_mode) {
    const Index n = centered_features.cols();
    require(k >= 1 && k <= n, "fit_kernel: need 1 <= k <= n");
    require(centering_mean.size() == centered_features.rows(), "fit_kernel: mean size mismatch");

    std::vector<Index> pool(n);
    std::iota(pool.begin(), pool.end(), Index{0});
    std::mt19937_64 rng(seed);
    std::vector<Index> picked;
    std::sample(pool.begin(), pool.end(), std::back_inserter(picked), k, rng);

    KernelMap km;
    km.centering_mean = centering_mean;
    km.exp_mode = exp_mode;
    km.anchors.resize(centered_features.rows(), k);
    for (int j = 0; j < k; ++j) km.anchors.col(j) = centered_features.col(picked[j]);

    std::vector<char> is_anchor(n, 0);
    for (Index p : picked) is_anchor[p] = 1;

    const Matrix dist = pairwise_distances(centered_features, km.anchors);  // k x n
    double sum = 0.0;
    long long pairs = 0;
    for (Index t = 0; t < n; ++t) {
        if (bandwidth_mode == BandwidthMode::non_anchor && is_anchor[t]) continue;
        for (int j = 0; j < k; ++j) {
            if (picked[j] == t) continue;  // a sample paired with itself
            sum += dist(j, t);
            ++pairs;
        }
    }
    require(pairs > 0, "fit_kernel: no sample/anchor pairs left for the bandwidth");
    km.bandwidth = sum / static_cast<double>(pairs);
    require(km.bandwidth > 0.0, "fit_kernel: zero bandwidth (all training points identical)");
    return km;
}

KernelMap identity_kernel(const Vector& centering_mean) {
    KernelMap km;
    km.centering_mean = centering_mean;
    km.identity = true;
    return km;
}

Matrix kernel_features(const KernelMap& km, const Matrix& centered_features) {
    require(centered_features.rows() == km.dim(), "kernel_features: dimension mismatch");
    if (km.identity) return centered_features;
    Matrix dist = pairwise_distances(centered_features, km.anchors);
    if (km.exp_mode == KernelExp::squared) dist = dist.cwiseProduct(dist);
    const double scale = -1.0 / (2.0 * km.bandwidth * km.bandwidth);
    return ((scale * dist).array().exp()).matrix();
}

Matrix solve_hash_function(const Matrix& codes, const Matrix& margins, const Matrix& phi,
                           double ridge) {
    require(codes.rows() >= 1 && codes.cols() == phi.cols(),
            "solve_hash_function: code/feature sample mismatch");
    require(margins.rows() == codes.rows() && margins.cols() == codes.cols(),
            "solve_hash_function: margin shape mismatch");
    require((margins.array() >= 0.0).all(), "solve_hash_function: negative margin");
    return solve_with_factor(codes, margins, phi, factor_gram(phi, ridge));
}

Matrix solve_bit_margins(const Matrix& codes, const Matrix& hash_fn, const Matrix& phi) {
    const Matrix residual = hash_fn * phi - codes;
    return codes.cwiseProduct(residual).cwiseMax(0.0);
}

double step2_objective(const std::vector<Matrix>& codes, const std::vector<Matrix>& hash_fn,
                       const std::vector<Matrix>& margins, const std::vector<Matrix>& phi) {
    double value = 0.0;
    for (std::size_t i = 0; i < codes.size(); ++i) {
        const Matrix target = codes[i] + codes[i].cwiseProduct(margins[i]);
        value += (target - hash_fn[i] * phi[i]).squaredNorm();
    }
    return value;
}

FunctionLearningState train_functions(const std::vector<Matrix>& phi,
                                      const std::vector<Matrix>& codes, const Hyperparams& hp,
                                      bool margins_enabled) {
    require(!phi.empty() && phi.size() == codes.size(), "train_functions: modality mismatch");
    const std::size_t m = phi.size();

    FunctionLearningState state;
    std::vector<Eigen::LDLT<Matrix>> factors;
    factors.reserve(m);
    for (std::size_t i = 0; i < m; ++i) {
        require(phi[i].cols() == codes[i].cols(), "train_functions: sample count mismatch");
        factors.push_back(factor_gram(phi[i], hp.ridge));
        state.margins.push_back(Matrix::Zero(codes[i].rows(), codes[i].cols()));
        state.hash_fn.push_back(solve_with_factor(codes[i], state.margins[i], phi[i], factors[i]));
    }
    state.objective_trace.push_back(step2_objective(codes, state.hash_fn, state.margins, phi));

    for (int sweep = 1; sweep <= hp.max_iters; ++sweep) {
        for (std::size_t i = 0; i < m; ++i)
            state.hash_fn[i] = solve_with_factor(codes[i], state.margins[i], phi[i], factors[i]);
        if (margins_enabled) {
            for (std::size_t i = 0; i < m; ++i)
                state.margins[i] = solve_bit_margins(codes[i], state.hash_fn[i], phi[i]);
        }

        const double prev = state.objective_trace.back();
        const double cur = step2_objective(codes, state.hash_fn, state.margins, phi);
        require(std::isfinite(cur), "train_functions: non-finite objective");
        if (cur > prev + 1e-9 * std::max(1.0, std::abs(prev)))
            throw std::runtime_error("train_functions: objective increased at sweep " +
                                     std::to_string(sweep));
        state.objective_trace.push_back(cur);
        state.sweeps = sweep;

        const double rel = (prev - cur) / std::max(std::abs(prev), 1e-300);
        if (rel < hp.rel_tol) break;
    }
    return state;
}

}  // namespace amsh
