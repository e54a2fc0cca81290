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

#include <filesystem>
#include <string>
#include <vector>

#include "amsh/data_model.hpp"
#include "amsh/evaluation.hpp"
#include "amsh/function_learning.hpp"
#include "amsh/retrieval.hpp"

namespace amsh {

/// Training variants. All knobs configure the one code path:
///   no_intra  - intra-modal similarity term dropped (lambda forced to 0)
///   no_inter  - inter-modal similarity term dropped (beta forced to 0)
///   no_kernel - raw centered features replace the kernel map
///   no_margin - both margin matrices frozen at zero
enum class Variant { full, no_intra, no_inter, no_kernel, no_margin };

std::string to_string(Variant v);
Variant variant_from_string(const std::string& s);

struct TrainedModel {
    struct Modality {
        KernelMap kernel;
        Matrix hash_fn;  // r x k
        Matrix codes;    // r x n database codes, {-1,+1}
        Matrix labels;   // c x n database labels, {0,1}
    };
    struct Provenance {
        int step1_sweeps = 0;
        double step1_objective = 0.0;
        std::vector<double> step1_trace;
        int step2_sweeps = 0;
        double step2_objective = 0.0;
        std::vector<double> step2_trace;
        std::vector<double> label_margin_max;  // per modality, max entry of E
        std::vector<double> bit_margin_max;    // per modality, max entry of M
    };

    Hyperparams params;
    Variant variant = Variant::full;
    std::vector<Modality> modalities;
    Provenance provenance;
};

struct TrainTimings {
    double step1_seconds = 0.0;
    double kernel_seconds = 0.0;
    double step2_seconds = 0.0;
    double total() const { return step1_seconds + kernel_seconds + step2_seconds; }
};

TrainedModel train(const MultiModalCorpus& corpus, const Hyperparams& hp,
                   Variant variant = Variant::full, const TrainObserver* observer = nullptr,
                   TrainTimings* timings = nullptr);

/// Model directory: meta.kv plus per-modality m<i>/{F,anchors,mean,B,L}.dmt.
/// Save/load round-trips F, anchors, B and L bit-exactly.
void save_model(const std::filesystem::path& dir, const TrainedModel& model);
TrainedModel load_model(const std::filesystem::path& dir);

/// Encodes queries with the query modality's kernel map and hash function,
/// ranks them against the target modality's database codes and scores the
/// run. Query features are raw; centering happens inside.
EvalReport cross_modal_eval(const TrainedModel& model, const Matrix& raw_query_features,
                            const Matrix& query_labels, std::size_t query_modality,
                            std::size_t target_modality, Index cutoff = 0);

std::string task_name(std::size_t query_modality, std::size_t target_modality);

struct ScalingRow {
    int size = 0;
    TrainTimings timings;
};

/// Trains on synthetic two-modality corpora of the given sizes and reports
/// wall time per phase.
std::vector<ScalingRow> scaling_probe(const std::vector<int>& sizes, const Hyperparams& hp,
                                      int classes = 8, int dim = 32, double noise = 0.3);

}  // namespace amsh
