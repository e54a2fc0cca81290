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

#include <functional>
#include <vector>

#include "amsh/data_model.hpp"
#include "amsh/matrix.hpp"

namespace amsh {

enum class KernelExp { paper, squared };
enum class BandwidthMode { all, non_anchor };

struct Hyperparams {
    double eta = 1.0;       // code/latent coupling weight
    double lambda = 1e-3;   // intra-modal similarity weight
    double beta = 1e-3;     // inter-modal similarity weight
    int bits = 16;          // code length r
    int max_iters = 15;     // sweep cap, both training steps
    double rel_tol = 1e-5;  // relative objective change stop
    int anchors = 1500;     // kernel anchor count cap
    double ridge = 1e-6;    // regularizer on the kernel Gram system
    std::uint64_t seed = 0;
    KernelExp kernel_exp = KernelExp::paper;
    BandwidthMode bandwidth_mode = BandwidthMode::all;
};

/// Alternating-minimization state for hash-code learning. One entry per
/// modality in every vector.
struct CodeLearningState {
    std::vector<Matrix> labels;       // c x n_i, {0,1}
    std::vector<Matrix> signs;        // c x n_i, +1 at set labels, -1 elsewhere
    std::vector<Matrix> labels_norm;  // column-normalized labels
    std::vector<Matrix> projection;   // c x r
    std::vector<Matrix> latent;       // r x n_i, V V^T = n I, V 1 = 0
    std::vector<Matrix> codes;        // r x n_i, {-1,+1}
    std::vector<Matrix> margins;      // c x n_i, >= 0
    std::vector<double> objective_trace;
    int sweeps = 0;

    std::size_t modality_count() const { return labels.size(); }
};

/// Regression target with margins pushed outward: L + signs .* margins.
/// Label positions move to >= 1, non-label positions to <= 0.
Matrix margin_targets(const Matrix& labels, const Matrix& signs, const Matrix& margins);

/// Closed-form projection update: T V^T / n (valid because V V^T = n I).
Matrix solve_projection(const Matrix& labels, const Matrix& signs, const Matrix& margins,
                        const Matrix& latent);

/// Coefficient matrix of the latent subproblem max tr(C V^T). Association is
/// forced as ((M * Ln^T) * Ln) so no n x n similarity matrix ever exists.
Matrix latent_coefficient(std::size_t modality, const CodeLearningState& state,
                          const Hyperparams& hp);

/// Sign update: sgn(eta V + lambda r V Ln^T Ln), zero mapping to -1.
Matrix solve_codes(const Matrix& latent, const Matrix& labels_norm, const Hyperparams& hp);

/// Per-entry margin update: max(signs .* (P V - L), 0).
Matrix solve_label_margins(const Matrix& projection, const Matrix& latent, const Matrix& labels,
                           const Matrix& signs);

/// Full step-1 objective, evaluated through trace identities so the largest
/// intermediates are r x n (never n x n). The inter-modal sum counts each
/// unordered modality pair once, which is the convention under which every
/// closed-form update is an exact block minimizer and the trace provably
/// never increases.
double step1_objective(const CodeLearningState& state, const Hyperparams& hp);

struct TrainObserver {
    std::function<void(int sweep, std::size_t modality, const Matrix& latent)> after_latent_update;
    std::function<void(int sweep, const CodeLearningState& state)> after_sweep;
};

/// First training loop: alternating closed-form updates of projection,
/// latent, codes, margins across all modalities. Sweep schedule is
/// Gauss-Seidel: each variable family is updated for modality 1..m in order
/// before moving to the next family, and latent updates see already-updated
/// latents of earlier modalities. Deterministic under hp.seed. Throws if the
/// monitored objective ever increases beyond the 1e-9 relative slack.
CodeLearningState train_codes(const MultiModalCorpus& corpus, const Hyperparams& hp,
                              bool margins_enabled = true, const TrainObserver* observer = nullptr);

}  // namespace amsh
