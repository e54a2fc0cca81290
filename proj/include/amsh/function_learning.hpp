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

#pragma once

#include <vector>

#include "amsh/code_learning.hpp"
#include "amsh/matrix.hpp"

namespace amsh {

/// RBF anchor map into k-dimensional kernel space. The stored mean is the
/// training centering mean; queries are shifted by it before the map is
/// applied. identity == true bypasses the kernel entirely and passes
/// centered features through (the no-kernel ablation).
struct KernelMap {
    Matrix anchors;         // d x k (columns are training samples)
    double bandwidth = 0.0; // mean sample-to-anchor distance
    Vector centering_mean;  // length d
    KernelExp exp_mode = KernelExp::paper;
    bool identity = false;

    Index dim() const { return centering_mean.size(); }
    Index size() const { return identity ? centering_mean.size() : anchors.cols(); }
};

/// Picks k distinct training columns as anchors (seeded) and sets the
/// bandwidth to the mean distance between training samples and anchors.
/// BandwidthMode::all averages over every (sample, anchor) pair except a
/// sample paired with itself; non_anchor restricts to samples outside the
/// anchor set.
KernelMap fit_kernel(const Matrix& centered_features, const Vector& centering_mean, int k,
                     std::uint64_t seed, BandwidthMode bandwidth_mode = BandwidthMode::all,
                     KernelExp exp_mode = KernelExp::paper);

KernelMap identity_kernel(const Vector& centering_mean);

/// Kernelized features of already-centered samples, one column per sample.
/// paper mode uses exp(-||x - a|| / (2 delta^2)) with the unsquared distance
/// exactly as the method defines it; squared mode is the conventional
/// Gaussian.
Matrix kernel_features(const KernelMap& km, const Matrix& centered_features);

/// Ridge-regularized closed-form hash-function update:
/// (B + B .* M) Phi^T (Phi Phi^T + ridge I)^{-1}.
Matrix solve_hash_function(const Matrix& codes, const Matrix& margins, const Matrix& phi,
                           double ridge);

/// Per-entry bit-margin update: max(B .* (F Phi - B), 0).
Matrix solve_bit_margins(const Matrix& codes, const Matrix& hash_fn, const Matrix& phi);

double step2_objective(const std::vector<Matrix>& codes, const std::vector<Matrix>& hash_fn,
                       const std::vector<Matrix>& margins, const std::vector<Matrix>& phi);

struct FunctionLearningState {
    std::vector<Matrix> hash_fn;  // r x k per modality
    std::vector<Matrix> margins;  // r x n_i, >= 0
    std::vector<double> objective_trace;
    int sweeps = 0;
};

/// Second training loop: alternate hash-function and bit-margin updates for
/// all modalities until the summed objective stalls (rel_tol) or max_iters.
/// The per-modality problems are independent; the sweep updates them in
/// order and records one shared trace.
FunctionLearningState train_functions(const std::vector<Matrix>& phi,
                                      const std::vector<Matrix>& codes, const Hyperparams& hp,
                                      bool margins_enabled = true);

}  // namespace amsh
