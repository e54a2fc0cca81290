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

#include "amsh/pipeline.hpp"

#include <chrono>

#include "amsh/matrix_io.hpp"

namespace amsh {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string kexp_to_string(KernelExp e) { return e == KernelExp::paper ? "paper" : "squared"; }
std::string bmode_to_string(BandwidthMode b) {
    return b == BandwidthMode::all ? "all" : "non_anchor";
}

KernelExp kexp_from_string(const std::string& s) {
    if (s == "paper") return KernelExp::paper;
    if (s == "squared") return KernelExp::squared;
    throw std::runtime_error("unknown kernel_exp '" + s + "'");
}

BandwidthMode bmode_from_string(const std::string& s) {
    if (s == "all") return BandwidthMode::all;
    if (s == "non_anchor") return BandwidthMode::non_anchor;
    throw std::runtime_error("unknown bandwidth_mode '" + s + "'");
}

}  // namespace

std::string to_string(Variant v) {
    switch (v) {
        case Variant::full: return "full";
        case Variant::no_intra: return "no_intra";
        case Variant::no_inter: return "no_inter";
        case Variant::no_kernel: return "no_kernel";
        case Variant::no_margin: return "no_margin";
    }
    throw std::logic_error("unreachable variant");
}

Variant variant_from_string(const std::string& s) {
    if (s == "full") return Variant::full;
    if (s == "no_intra") return Variant::no_intra;
    if (s == "no_inter") return Variant::no_inter;
    if (s == "no_kernel") return Variant::no_kernel;
    if (s == "no_margin") return Variant::no_margin;
    throw std::runtime_error("unknown variant '" + s + "'");
}

std::string task_name(std::size_t query_modality, std::size_t target_modality) {
    if (query_modality == 0 && target_modality == 1) return "i2t";
    if (query_modality == 1 && target_modality == 0) return "t2i";
    return "m" + std::to_string(query_modality + 1) + "2m" + std::to_string(target_modality + 1);
}

TrainedModel train(const MultiModalCorpus& corpus, const Hyperparams& hp, Variant variant,
                   const TrainObserver* observer, TrainTimings* timings) {
    validate_corpus(corpus);
    Hyperparams effective = hp;
    if (variant == Variant::no_intra) effective.lambda = 0.0;
    if (variant == Variant::no_inter) effective.beta = 0.0;
    const bool margins_enabled = variant != Variant::no_margin;
    const std::size_t m = corpus.modality_count();

    TrainTimings local;
    const auto t_step1 = Clock::now();
    CodeLearningState step1 = train_codes(corpus, effective, margins_enabled, observer);
    local.step1_seconds = seconds_since(t_step1);

    const auto t_kernel = Clock::now();
    std::vector<Matrix> phi(m);
    TrainedModel model;
    model.params = hp;
    model.variant = variant;
    model.modalities.resize(m);
    for (std::size_t i = 0; i < m; ++i) {
        const auto& ds = corpus.modalities[i];
        if (variant == Variant::no_kernel) {
            model.modalities[i].kernel = identity_kernel(ds.centering_mean);
        } else {
            const int k = static_cast<int>(std::min<Index>(hp.anchors, ds.size()));
            model.modalities[i].kernel =
                fit_kernel(ds.features, ds.centering_mean, k, mix_seed(hp.seed, 0xA2C40 + i),
                           hp.bandwidth_mode, hp.kernel_exp);
        }
        phi[i] = kernel_features(model.modalities[i].kernel, ds.features);
    }
    local.kernel_seconds = seconds_since(t_kernel);

    const auto t_step2 = Clock::now();
    FunctionLearningState step2 = train_functions(phi, step1.codes, effective, margins_enabled);
    local.step2_seconds = seconds_since(t_step2);

    for (std::size_t i = 0; i < m; ++i) {
        model.modalities[i].hash_fn = std::move(step2.hash_fn[i]);
        model.modalities[i].codes = std::move(step1.codes[i]);
        model.modalities[i].labels = corpus.modalities[i].labels;
        model.provenance.label_margin_max.push_back(
            step1.margins[i].size() > 0 ? step1.margins[i].maxCoeff() : 0.0);
        model.provenance.bit_margin_max.push_back(
            step2.margins[i].size() > 0 ? step2.margins[i].maxCoeff() : 0.0);
    }
    model.provenance.step1_sweeps = step1.sweeps;
    model.provenance.step1_objective = step1.objective_trace.back();
    model.provenance.step1_trace = std::move(step1.objective_trace);
    model.provenance.step2_sweeps = step2.sweeps;
    model.provenance.step2_objective = step2.objective_trace.back();
    model.provenance.step2_trace = std::move(step2.objective_trace);

    if (timings) *timings = local;
    return model;
}

void save_model(const std::filesystem::path& dir, const TrainedModel& model) {
    namespace fs = std::filesystem;
    fs::create_directories(dir);

    KvFile kv;
    kv["version"] = "1";
    kv["bits"] = std::to_string(model.params.bits);
    kv["modalities"] = std::to_string(model.modalities.size());
    kv["eta"] = format_double(model.params.eta);
    kv["lambda"] = format_double(model.params.lambda);
    kv["beta"] = format_double(model.params.beta);
    kv["anchors"] = std::to_string(model.params.anchors);
    kv["ridge"] = format_double(model.params.ridge);
    kv["seed"] = std::to_string(model.params.seed);
    kv["max_iters"] = std::to_string(model.params.max_iters);
    kv["rel_tol"] = format_double(model.params.rel_tol);
    kv["variant"] = to_string(model.variant);
    kv["kernel_exp"] = kexp_to_string(model.params.kernel_exp);
    kv["bandwidth_mode"] = bmode_to_string(model.params.bandwidth_mode);
    kv["step1.iters"] = std::to_string(model.provenance.step1_sweeps);
    kv["step1.objective"] = format_double(model.provenance.step1_objective);
    kv["step2.iters"] = std::to_string(model.provenance.step2_sweeps);
    kv["step2.objective"] = format_double(model.provenance.step2_objective);

    for (std::size_t i = 0; i < model.modalities.size(); ++i) {
        const auto& mod = model.modalities[i];
        const std::string prefix = "m" + std::to_string(i + 1);
        kv[prefix + ".bandwidth"] = format_double(mod.kernel.bandwidth);
        kv[prefix + ".n"] = std::to_string(mod.codes.cols());
        kv[prefix + ".d"] = std::to_string(mod.kernel.dim());
        kv[prefix + ".margin_e_max"] = format_double(model.provenance.label_margin_max.size() > i
                                                         ? model.provenance.label_margin_max[i]
                                                         : 0.0);
        kv[prefix + ".margin_m_max"] = format_double(model.provenance.bit_margin_max.size() > i
                                                         ? model.provenance.bit_margin_max[i]
                                                         : 0.0);
        const fs::path sub = dir / prefix;
        fs::create_directories(sub);
        store_matrix(sub / "F.dmt", mod.hash_fn);
        store_matrix(sub / "anchors.dmt", mod.kernel.anchors);
        store_matrix(sub / "mean.dmt", mod.kernel.centering_mean);
        store_matrix(sub / "B.dmt", mod.codes);
        store_matrix(sub / "L.dmt", mod.labels);
    }
    store_kv(dir / "meta.kv", kv);
}

TrainedModel load_model(const std::filesystem::path& dir) {
    const KvFile kv = load_kv(dir / "meta.kv");
    require(kv_get(kv, "version") == "1", "model: unsupported version");

    TrainedModel model;
    model.params.bits = static_cast<int>(kv_get_int(kv, "bits"));
    model.params.eta = kv_get_double(kv, "eta");
    model.params.lambda = kv_get_double(kv, "lambda");
    model.params.beta = kv_get_double(kv, "beta");
    model.params.anchors = static_cast<int>(kv_get_int(kv, "anchors"));
    model.params.ridge = kv_get_double(kv, "ridge");
    model.params.seed = static_cast<std::uint64_t>(kv_get_int(kv, "seed"));
    model.params.max_iters = static_cast<int>(kv_get_int(kv, "max_iters"));
    model.params.rel_tol = kv_get_double(kv, "rel_tol");
    model.params.kernel_exp = kexp_from_string(kv_get(kv, "kernel_exp"));
    model.params.bandwidth_mode = bmode_from_string(kv_get(kv, "bandwidth_mode"));
    model.variant = variant_from_string(kv_get(kv, "variant"));
    model.provenance.step1_sweeps = static_cast<int>(kv_get_int(kv, "step1.iters"));
    model.provenance.step1_objective = kv_get_double(kv, "step1.objective");
    model.provenance.step2_sweeps = static_cast<int>(kv_get_int(kv, "step2.iters"));
    model.provenance.step2_objective = kv_get_double(kv, "step2.objective");

    const long long m = kv_get_int(kv, "modalities");
    require(m >= 1, "model: modalities must be >= 1");
    for (long long i = 1; i <= m; ++i) {
        const std::string prefix = "m" + std::to_string(i);
        const auto sub = dir / prefix;
        TrainedModel::Modality mod;
        mod.hash_fn = load_matrix(sub / "F.dmt");
        mod.codes = load_matrix(sub / "B.dmt");
        mod.labels = load_matrix(sub / "L.dmt");
        const Matrix mean = load_matrix(sub / "mean.dmt");
        require(mean.cols() == 1, "model: mean.dmt must be a column vector");
        if (model.variant == Variant::no_kernel) {
            mod.kernel = identity_kernel(mean.col(0));
        } else {
            mod.kernel.anchors = load_matrix(sub / "anchors.dmt");
            mod.kernel.centering_mean = mean.col(0);
            mod.kernel.bandwidth = kv_get_double(kv, prefix + ".bandwidth");
            mod.kernel.exp_mode = model.params.kernel_exp;
            require(mod.kernel.bandwidth > 0.0, "model: bandwidth must be positive");
        }
        require(mod.codes.rows() == model.params.bits, "model: code width mismatch");
        require(mod.hash_fn.rows() == model.params.bits, "model: hash function width mismatch");
        require(mod.hash_fn.cols() == mod.kernel.size(), "model: hash function / kernel mismatch");
        require(mod.codes.cols() == mod.labels.cols(), "model: code/label count mismatch");
        require(mod.codes.cols() == kv_get_int(kv, prefix + ".n"), "model: sample count mismatch");
        require(mean.rows() == kv_get_int(kv, prefix + ".d"), "model: feature dim mismatch");
        require(((mod.codes.array() == 1.0) || (mod.codes.array() == -1.0)).all(),
                "model: database codes must be -1/+1");
        model.provenance.label_margin_max.push_back(kv_get_double(kv, prefix + ".margin_e_max"));
        model.provenance.bit_margin_max.push_back(kv_get_double(kv, prefix + ".margin_m_max"));
        model.modalities.push_back(std::move(mod));
    }
    return model;
}

EvalReport cross_modal_eval(const TrainedModel& model, const Matrix& raw_query_features,
                            const Matrix& query_labels, std::size_t query_modality,
                            std::size_t target_modality, Index cutoff) {
    require(query_modality != target_modality, "cross_modal_eval: modalities must differ");
    require(query_modality < model.modalities.size() && target_modality < model.modalities.size(),
            "cross_modal_eval: unknown modality");
    const auto& qm = model.modalities[query_modality];
    const auto& tm = model.modalities[target_modality];

    const auto t_encode = Clock::now();
    const Matrix query_codes = encode(qm.hash_fn, qm.kernel, raw_query_features);
    const double encode_seconds = seconds_since(t_encode);

    EvalReport report = evaluate(query_codes, tm.codes, query_labels, tm.labels,
                                 task_name(query_modality, target_modality), cutoff);
    report.encode_seconds = encode_seconds;
    return report;
}

std::vector<ScalingRow> scaling_probe(const std::vector<int>& sizes, const Hyperparams& hp,
                                      int classes, int dim, double noise) {
    require(!sizes.empty(), "scaling_probe: no sizes");
    for (std::size_t i = 1; i < sizes.size(); ++i)
        require(sizes[i] > sizes[i - 1], "scaling_probe: sizes must be increasing");

    std::vector<ScalingRow> rows;
    for (int n : sizes) {
        SynthSpec spec;
        spec.classes = classes;
        spec.sizes = {n, n};
        spec.dims = {dim, dim};
        spec.noise = noise;
        spec.seed = hp.seed;
        const MultiModalCorpus corpus = synth_corpus(spec);
        ScalingRow row;
        row.size = n;
        train(corpus, hp, Variant::full, nullptr, &row.timings);
        rows.push_back(row);
    }
    return rows;
}

}  // namespace amsh
