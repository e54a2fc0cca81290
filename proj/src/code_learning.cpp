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

#include "amsh/code_learning.hpp"

#include <cmath>
#include <random>
#include <string>

#include "amsh/stiefel.hpp"

namespace amsh {

Matrix margin_targets(const Matrix& labels, const Matrix& signs, const Matrix& margins) {
    require(labels.rows() == signs.rows() && labels.cols() == signs.cols(),
            "margin_targets: label/sign shape mismatch");
    require(labels.rows() == margins.rows() && labels.cols() == margins.cols(),
            "margin_targets: label/margin shape mismatch");
    require((margins.array() >= 0.0).all(), "margin_targets: negative margin entry");
    return labels + signs.cwiseProduct(margins);
}

Matrix solve_projection(const Matrix& labels, const Matrix& signs, const Matrix& margins,
                        const Matrix& latent) {
    require(labels.cols() == latent.cols(), "solve_projection: sample count mismatch");
    const Matrix target = margin_targets(labels, signs, margins);
    return target * latent.transpose() / static_cast<double>(latent.cols());
}

Matrix latent_coefficient(std::size_t modality, const CodeLearningState& state,
                          const Hyperparams& hp) {
    const std::size_t m = state.modality_count();
    require(modality < m, "latent_coefficient: modality out of range");
    const double r = static_cast<double>(hp.bits);

    const Matrix target =
        margin_targets(state.labels[modality], state.signs[modality], state.margins[modality]);
    Matrix coeff = state.projection[modality].transpose() * target;
    coeff.noalias() += hp.eta * state.codes[modality];
    if (hp.lambda != 0.0) {
        const Matrix codes_ln = state.codes[modality] * state.labels_norm[modality].transpose();
        coeff.noalias() += (hp.lambda * r) * (codes_ln * state.labels_norm[modality]);
    }
    if (hp.beta != 0.0) {
        for (std::size_t j = 0; j < m; ++j) {
            if (j == modality) continue;
            const Matrix latent_ln = state.latent[j] * state.labels_norm[j].transpose();
            coeff.noalias() += (hp.beta * r) * (latent_ln * state.labels_norm[modality]);
        }
    }
    return coeff;
}

Matrix solve_codes(const Matrix& latent, const Matrix& labels_norm, const Hyperparams& hp) {
    const double r = static_cast<double>(hp.bits);
    Matrix score = hp.eta * latent;
    if (hp.lambda != 0.0) {
        const Matrix latent_ln = latent * labels_norm.transpose();
        score.noalias() += (hp.lambda * r) * (latent_ln * labels_norm);
    }
    return score.unaryExpr([](double v) { return sign_value(v); });
}

Matrix solve_label_margins(const Matrix& projection, const Matrix& latent, const Matrix& labels,
                           const Matrix& signs) {
    const Matrix residual = projection * latent - labels;
    return signs.cwiseProduct(residual).cwiseMax(0.0);
}

namespace {

// tr(A B) for A (p x q), B (q x p) without forming the product.
double trace_product(const Matrix& a, const Matrix& b) {
    return (a.array() * b.transpose().array()).sum();
}

// || A^T V - r * Ln_a^T Ln_b ||_F^2 through trace identities; the largest
// intermediates are r x r, r x c and c x c.
double similarity_residual(const Matrix& a, const Matrix& v, const Matrix& ln_a,
                           const Matrix& ln_b, double r) {
    const Matrix gram_a = a * a.transpose();  // r x r
    const Matrix gram_v = v * v.transpose();  // r x r
    const double quad = (gram_a.array() * gram_v.array()).sum();
    const double cross = trace_product(ln_b * v.transpose(), a * ln_a.transpose());
    const Matrix label_gram_a = ln_a * ln_a.transpose();  // c x c
    const Matrix label_gram_b = ln_b * ln_b.transpose();  // c x c
    const double constant = (label_gram_a.array() * label_gram_b.array()).sum();
    return quad - 2.0 * r * cross + r * r * constant;
}

}  // namespace

double step1_objective(const CodeLearningState& state, const Hyperparams& hp) {
    const std::size_t m = state.modality_count();
    const double r = static_cast<double>(hp.bits);
    double value = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        const Matrix target = margin_targets(state.labels[i], state.signs[i], state.margins[i]);
        value += (target - state.projection[i] * state.latent[i]).squaredNorm();
        value += hp.eta * (state.codes[i] - state.latent[i]).squaredNorm();
        if (hp.lambda != 0.0)
            value += hp.lambda * similarity_residual(state.codes[i], state.latent[i],
                                                     state.labels_norm[i], state.labels_norm[i], r);
    }
    if (hp.beta != 0.0) {
        // each unordered modality pair enters once; the two directional
        // residuals are transposes of each other, and this is the counting
        // for which the closed-form latent update is the exact block
        // minimizer (the monotone-trace contract depends on that)
        for (std::size_t j = 0; j < m; ++j) {
            for (std::size_t i = j + 1; i < m; ++i) {
                value += hp.beta * similarity_residual(state.latent[j], state.latent[i],
                                                       state.labels_norm[j], state.labels_norm[i], r);
            }
        }
    }
    return value;
}

CodeLearningState train_codes(const MultiModalCorpus& corpus, const Hyperparams& hp,
                              bool margins_enabled, const TrainObserver* observer) {
    validate_corpus(corpus);
    require(hp.bits >= 2, "train_codes: bits must be >= 2");
    require(hp.max_iters >= 1, "train_codes: max_iters must be >= 1");
    require(hp.eta > 0.0 && hp.lambda >= 0.0 && hp.beta >= 0.0 && hp.rel_tol >= 0.0,
            "train_codes: invalid weights");
    const std::size_t m = corpus.modality_count();

    CodeLearningState state;
    std::mt19937_64 rng(mix_seed(hp.seed, 0xC0DE));
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::uniform_int_distribution<int> coin(0, 1);

    for (std::size_t i = 0; i < m; ++i) {
        const auto& ds = corpus.modalities[i];
        const Index n = ds.size();
        require(hp.bits <= n - 1,
                "train_codes: infeasible code length for modality " + std::to_string(i + 1) +
                    " (need bits <= n - 1)");
        state.labels.push_back(ds.labels);
        state.signs.push_back(label_signs(ds.labels));
        state.labels_norm.push_back(normalize_labels(ds.labels));
        state.margins.push_back(Matrix::Zero(ds.classes(), n));

        Matrix random_codes(hp.bits, n);
        for (Index a = 0; a < random_codes.rows(); ++a)
            for (Index b = 0; b < random_codes.cols(); ++b)
                random_codes(a, b) = coin(rng) == 1 ? 1.0 : -1.0;
        state.codes.push_back(std::move(random_codes));

        // feasible latent start: project a random matrix onto the constraint set
        Matrix random_coeff(hp.bits, n);
        for (Index a = 0; a < random_coeff.rows(); ++a)
            for (Index b = 0; b < random_coeff.cols(); ++b) random_coeff(a, b) = gauss(rng);
        state.latent.push_back(
            solve_centered_orthogonal(random_coeff, 1e-10, mix_seed(hp.seed, 0x1A + i)).latent);
    }
    for (std::size_t i = 0; i < m; ++i)
        state.projection.push_back(
            solve_projection(state.labels[i], state.signs[i], state.margins[i], state.latent[i]));

    state.objective_trace.push_back(step1_objective(state, hp));

    for (int sweep = 1; sweep <= hp.max_iters; ++sweep) {
        for (std::size_t i = 0; i < m; ++i)
            state.projection[i] =
                solve_projection(state.labels[i], state.signs[i], state.margins[i], state.latent[i]);
        for (std::size_t i = 0; i < m; ++i) {
            const Matrix coeff = latent_coefficient(i, state, hp);
            state.latent[i] =
                solve_centered_orthogonal(coeff, 1e-10, mix_seed(hp.seed, 0x2B00 + 97 * sweep + i))
                    .latent;
            if (observer && observer->after_latent_update)
                observer->after_latent_update(sweep, i, state.latent[i]);
        }
        for (std::size_t i = 0; i < m; ++i)
            state.codes[i] = solve_codes(state.latent[i], state.labels_norm[i], hp);
        if (margins_enabled) {
            for (std::size_t i = 0; i < m; ++i)
                state.margins[i] = solve_label_margins(state.projection[i], state.latent[i],
                                                       state.labels[i], state.signs[i]);
        }

        const double prev = state.objective_trace.back();
        const double cur = step1_objective(state, hp);
        require(std::isfinite(cur), "train_codes: non-finite objective");
        if (cur > prev + 1e-9 * std::max(1.0, std::abs(prev)))
            throw std::runtime_error("train_codes: objective increased at sweep " +
                                     std::to_string(sweep) + " (" + std::to_string(prev) + " -> " +
                                     std::to_string(cur) + ")");
        state.objective_trace.push_back(cur);
        state.sweeps = sweep;
        if (observer && observer->after_sweep) observer->after_sweep(sweep, state);

        const double rel = (prev - cur) / std::max(std::abs(prev), 1e-300);
        if (rel < hp.rel_tol) break;
    }
    return state;
}

}  // namespace amsh
