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

#include <algorithm>
#include <cstdlib>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "amsh/matrix_io.hpp"
#include "amsh/pipeline.hpp"

namespace {

using namespace amsh;

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::string join_ints(const std::vector<int>& v) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out += ',';
        out += std::to_string(v[i]);
    }
    return out;
}

// Expands a subcommand's "--config file" into ordinary arguments. Keys name
// long options without the leading dashes; values given explicitly on the
// command line win over the file.
std::vector<std::string> merge_config(const CLI::App& app, std::vector<std::string> args) {
    if (args.empty()) return args;
    const CLI::App* sub = app.get_subcommand_no_throw(args.front());
    if (sub == nullptr) return args;

    std::string config_path;
    for (std::size_t i = 1; i < args.size(); ++i) {
        if (args[i] == "--config" && i + 1 < args.size())
            config_path = args[i + 1];
        else if (args[i].rfind("--config=", 0) == 0)
            config_path = args[i].substr(9);
    }
    if (config_path.empty()) return args;

    for (const auto& [key, value] : load_kv(config_path)) {
        if (key == "config") continue;
        const std::string flag = "--" + key;
        const CLI::Option* op = sub->get_option_no_throw(flag);
        if (op == nullptr)
            throw UsageError("unknown key '" + key + "' in config file " + config_path);
        bool given = false;
        for (std::size_t i = 1; i < args.size(); ++i)
            given = given || args[i] == flag || args[i].rfind(flag + "=", 0) == 0;
        if (given) continue;
        if (op->get_expected_max() == 0) {  // flag option
            if (value == "true" || value == "1") args.push_back(flag);
        } else {
            args.push_back(flag);
            args.push_back(value);
        }
    }
    return args;
}

void add_hyperparam_flags(CLI::App* cmd, Hyperparams& hp, std::string& kernel_exp,
                          std::string& bandwidth_mode) {
    cmd->add_option("--bits", hp.bits, "code length r")->capture_default_str();
    cmd->add_option("--eta", hp.eta, "code/latent coupling weight")->capture_default_str();
    cmd->add_option("--lambda", hp.lambda, "intra-modal similarity weight")->capture_default_str();
    cmd->add_option("--beta", hp.beta, "inter-modal similarity weight")->capture_default_str();
    cmd->add_option("--anchors", hp.anchors, "kernel anchor count cap")->capture_default_str();
    cmd->add_option("--iters", hp.max_iters, "max training sweeps per step")->capture_default_str();
    cmd->add_option("--rel-tol", hp.rel_tol, "relative objective change stop")->capture_default_str();
    cmd->add_option("--ridge", hp.ridge, "kernel Gram regularizer")->capture_default_str();
    cmd->add_option("--seed", hp.seed, "random seed")->capture_default_str();
    cmd->add_option("--kernel-exp", kernel_exp, "kernel exponent: paper|squared")
        ->check(CLI::IsMember({"paper", "squared"}))
        ->capture_default_str();
    cmd->add_option("--bandwidth-mode", bandwidth_mode, "bandwidth pairs: all|non_anchor")
        ->check(CLI::IsMember({"all", "non_anchor"}))
        ->capture_default_str();
}

void apply_modes(Hyperparams& hp, const std::string& kernel_exp, const std::string& bandwidth_mode) {
    hp.kernel_exp = kernel_exp == "squared" ? KernelExp::squared : KernelExp::paper;
    hp.bandwidth_mode =
        bandwidth_mode == "non_anchor" ? BandwidthMode::non_anchor : BandwidthMode::all;
}

void print_trace(const std::string& prefix, const std::vector<double>& trace) {
    for (std::size_t t = 0; t < trace.size(); ++t)
        std::cout << prefix << ".obj[" << t << "]=" << format_double(trace[t]) << "\n";
}

void write_report(const std::filesystem::path& out_dir, const EvalReport& report) {
    std::filesystem::create_directories(out_dir);
    KvFile kv;
    kv["task"] = report.task;
    kv["map"] = format_double(report.map);
    kv["K"] = std::to_string(report.cutoff);
    kv["queries"] = std::to_string(report.queries_total);
    kv["queries_excluded"] = std::to_string(report.queries_excluded);
    kv["time.encode"] = format_double(report.encode_seconds);
    kv["time.rank"] = format_double(report.rank_seconds);
    kv["time.metrics"] = format_double(report.metric_seconds);
    store_kv(out_dir / ("report_" + report.task + ".kv"), kv);

    Matrix pr(report.pr_points.size(), 2);
    for (std::size_t i = 0; i < report.pr_points.size(); ++i) {
        pr(static_cast<Index>(i), 0) = report.pr_points[i].recall;
        pr(static_cast<Index>(i), 1) = report.pr_points[i].precision;
    }
    store_matrix(out_dir / ("pr_" + report.task + ".dmt"), pr);
}

std::vector<std::pair<std::size_t, std::size_t>> tasks_from_flags(const std::string& task,
                                                                  int query_mod, int target_mod) {
    if (query_mod > 0 || target_mod > 0) {
        if (query_mod <= 0 || target_mod <= 0)
            throw UsageError("give both --query-mod and --target-mod or neither");
        return {{static_cast<std::size_t>(query_mod - 1), static_cast<std::size_t>(target_mod - 1)}};
    }
    if (task == "i2t") return {{0, 1}};
    if (task == "t2i") return {{1, 0}};
    return {{0, 1}, {1, 0}};  // both
}

int run_app(int argc, char** argv) {
    CLI::App app{"adaptive marginalized semantic hashing for cross-modal retrieval"};
    app.require_subcommand(1);

    // ---- synth ----
    auto* synth = app.add_subcommand("synth", "generate a synthetic multi-modal corpus");
    synth->add_option("--config", "key=value config file; explicit flags override it");
    SynthSpec spec;
    std::string synth_out, query_out;
    std::vector<int> query_sizes;
    synth->add_option("--classes", spec.classes, "class count")->capture_default_str();
    synth->add_option("--sizes", spec.sizes, "samples per modality")->delimiter(',')->required();
    synth->add_option("--dims", spec.dims, "feature dims per modality")->delimiter(',')->required();
    synth->add_option("--noise", spec.noise, "cluster noise stddev")->capture_default_str();
    synth->add_option("--multilabel-p", spec.multilabel_p, "extra label probability")
        ->capture_default_str();
    synth->add_option("--seed", spec.seed, "random seed")->capture_default_str();
    synth->add_option("--out", synth_out, "output corpus directory")->required();
    synth->add_option("--query-sizes", query_sizes, "held-out query samples per modality")
        ->delimiter(',');
    synth->add_option("--query-out", query_out, "output directory for the query split");
    auto* paired_flag = synth->add_flag("--paired", "require equal sizes and mark corpus paired");
    auto* shuffle_flag =
        synth->add_flag("--shuffle", "independently permute each modality (unpaired)");
    paired_flag->excludes(shuffle_flag);
    synth->callback([&, paired_flag, shuffle_flag] {
        if (paired_flag->count() > 0) {
            for (int n : spec.sizes)
                if (n != spec.sizes.front())
                    throw UsageError("--paired requires equal modality sizes");
        }
        MultiModalCorpus corpus;
        if (!query_sizes.empty()) {
            if (query_out.empty()) throw UsageError("--query-sizes needs --query-out");
            auto [train_part, query_part] = synth_corpus_split(spec, query_sizes);
            corpus = std::move(train_part);
            save_raw_corpus(query_out, query_part, Pairing::unpaired);
        } else {
            corpus = synth_corpus(spec);
        }
        if (shuffle_flag->count() > 0) corpus = shuffle_unpaired(corpus, mix_seed(spec.seed, 0x51));
        save_corpus(synth_out, corpus);
        std::cout << "corpus modalities=" << corpus.modality_count() << " sizes="
                  << join_ints(spec.sizes) << " classes=" << spec.classes << " paired="
                  << (corpus.pairing == Pairing::paired ? "true" : "false") << " out=" << synth_out
                  << "\n";
        if (!query_sizes.empty())
            std::cout << "queries sizes=" << join_ints(query_sizes) << " out=" << query_out << "\n";
    });

    // ---- validate ----
    auto* validate = app.add_subcommand("validate", "check a corpus directory against invariants");
    validate->add_option("--config", "key=value config file; explicit flags override it");
    std::string validate_dir;
    validate->add_option("--corpus", validate_dir, "corpus directory")->required();
    validate->callback([&] {
        const MultiModalCorpus corpus = load_corpus(validate_dir);
        std::cout << "ok modalities=" << corpus.modality_count();
        for (std::size_t i = 0; i < corpus.modality_count(); ++i) {
            const auto& ds = corpus.modalities[i];
            std::cout << " m" << i + 1 << "=" << ds.dim() << "x" << ds.size();
        }
        std::cout << " classes=" << corpus.modalities.front().classes() << " paired="
                  << (corpus.pairing == Pairing::paired ? "true" : "false") << "\n";
    });

    // ---- train ----
    auto* train_cmd = app.add_subcommand("train", "two-step training on a corpus");
    train_cmd->add_option("--config", "key=value config file; explicit flags override it");
    Hyperparams hp;
    std::string train_corpus, train_out, train_variant = "full";
    std::string kernel_exp = "paper", bandwidth_mode = "all";
    train_cmd->add_option("--corpus", train_corpus, "corpus directory")->required();
    train_cmd->add_option("--out", train_out, "output model directory")->required();
    train_cmd->add_option("--variant", train_variant,
                          "full|no_intra|no_inter|no_kernel|no_margin")
        ->check(CLI::IsMember({"full", "no_intra", "no_inter", "no_kernel", "no_margin"}))
        ->capture_default_str();
    add_hyperparam_flags(train_cmd, hp, kernel_exp, bandwidth_mode);
    train_cmd->callback([&] {
        apply_modes(hp, kernel_exp, bandwidth_mode);
        const MultiModalCorpus corpus = load_corpus(train_corpus);
        TrainTimings timings;
        const TrainedModel model =
            train(corpus, hp, variant_from_string(train_variant), nullptr, &timings);
        save_model(train_out, model);
        print_trace("step1", model.provenance.step1_trace);
        std::cout << "step1.iters=" << model.provenance.step1_sweeps << "\n";
        print_trace("step2", model.provenance.step2_trace);
        std::cout << "step2.iters=" << model.provenance.step2_sweeps << "\n";
        std::cout << "time.step1=" << format_double(timings.step1_seconds) << "\n"
                  << "time.kernel=" << format_double(timings.kernel_seconds) << "\n"
                  << "time.step2=" << format_double(timings.step2_seconds) << "\n"
                  << "model=" << train_out << "\n";
    });

    // ---- eval ----
    auto* eval_cmd = app.add_subcommand("eval", "MAP / PR evaluation of a trained model");
    eval_cmd->add_option("--config", "key=value config file; explicit flags override it");
    std::string eval_model, eval_queries, eval_out, eval_task = "both";
    int eval_cutoff = 0, eval_qmod = 0, eval_tmod = 0;
    eval_cmd->add_option("--model", eval_model, "model directory")->required();
    eval_cmd->add_option("--queries", eval_queries, "query corpus directory")->required();
    eval_cmd->add_option("--out", eval_out, "report output directory")->required();
    eval_cmd->add_option("--task", eval_task, "i2t|t2i|both")
        ->check(CLI::IsMember({"i2t", "t2i", "both"}))
        ->capture_default_str();
    eval_cmd->add_option("--K", eval_cutoff, "ranking cutoff (0 = full retrieval set)")
        ->capture_default_str();
    eval_cmd->add_option("--query-mod", eval_qmod, "query modality (1-based, overrides --task)");
    eval_cmd->add_option("--target-mod", eval_tmod, "target modality (1-based, overrides --task)");
    eval_cmd->callback([&] {
        const TrainedModel model = load_model(eval_model);
        const auto raw = load_corpus_raw(eval_queries);
        for (auto [qmod, tmod] : tasks_from_flags(eval_task, eval_qmod, eval_tmod)) {
            require(qmod < raw.size() && tmod < model.modalities.size(),
                    "eval: modality out of range for the given model/queries");
            const EvalReport report = cross_modal_eval(model, raw[qmod].features, raw[qmod].labels,
                                                       qmod, tmod, eval_cutoff);
            write_report(eval_out, report);
            std::cout << report.task << ".map=" << format_double(report.map) << "\n"
                      << report.task << ".queries_excluded=" << report.queries_excluded << "\n"
                      << report.task << ".K=" << report.cutoff << "\n";
        }
    });

    // ---- query ----
    auto* query_cmd = app.add_subcommand("query", "rank database codes for raw query features");
    query_cmd->add_option("--config", "key=value config file; explicit flags override it");
    std::string query_model, query_file;
    int query_modality = 1, query_target = 2, query_top = 10;
    query_cmd->add_option("--model", query_model, "model directory")->required();
    query_cmd->add_option("--queries", query_file, "DMT file of raw query columns")->required();
    query_cmd->add_option("--modality", query_modality, "query modality (1-based)")
        ->capture_default_str();
    query_cmd->add_option("--target", query_target, "database modality (1-based)")
        ->capture_default_str();
    query_cmd->add_option("--k", query_top, "results per query")->capture_default_str();
    query_cmd->callback([&] {
        const TrainedModel model = load_model(query_model);
        require(query_modality >= 1 &&
                    static_cast<std::size_t>(query_modality) <= model.modalities.size(),
                "query: unknown query modality");
        require(query_target >= 1 &&
                    static_cast<std::size_t>(query_target) <= model.modalities.size(),
                "query: unknown target modality");
        require(query_top >= 1, "query: k must be >= 1");
        const auto& qm = model.modalities[static_cast<std::size_t>(query_modality - 1)];
        const auto& tm = model.modalities[static_cast<std::size_t>(query_target - 1)];
        const Matrix features = load_matrix(query_file);
        const Matrix codes = encode(qm.hash_fn, qm.kernel, features);
        const PackedCodes queries = PackedCodes::pack(codes);
        const PackedCodes db = PackedCodes::pack(tm.codes);
        const Index top = std::min<Index>(query_top, db.size());
        for (Index q = 0; q < queries.size(); ++q) {
            const auto ranking = rank_codes(queries, q, db);
            for (Index j = 0; j < top; ++j)
                std::cout << q << " " << ranking[j].index << " " << ranking[j].distance << "\n";
        }
    });

    // ---- ablate ----
    auto* ablate = app.add_subcommand("ablate", "train and score every variant");
    ablate->add_option("--config", "key=value config file; explicit flags override it");
    Hyperparams ablate_hp;
    std::string ablate_corpus, ablate_queries;
    std::string ablate_kexp = "paper", ablate_bmode = "all";
    int ablate_cutoff = 0;
    ablate->add_option("--corpus", ablate_corpus, "corpus directory")->required();
    ablate->add_option("--queries", ablate_queries, "query corpus directory")->required();
    ablate->add_option("--K", ablate_cutoff, "ranking cutoff (0 = full retrieval set)")
        ->capture_default_str();
    add_hyperparam_flags(ablate, ablate_hp, ablate_kexp, ablate_bmode);
    ablate->callback([&] {
        apply_modes(ablate_hp, ablate_kexp, ablate_bmode);
        const MultiModalCorpus corpus = load_corpus(ablate_corpus);
        const auto raw = load_corpus_raw(ablate_queries);
        require(raw.size() >= 2, "ablate: query corpus needs two modalities");
        std::cout << "# seed=" << ablate_hp.seed << " bits=" << ablate_hp.bits << " corpus="
                  << ablate_corpus << " queries=" << ablate_queries << "\n";
        std::cout << std::left << std::setw(12) << "variant" << std::setw(22) << "map_i2t"
                  << "map_t2i\n";
        const Variant order[] = {Variant::full, Variant::no_intra, Variant::no_inter,
                                 Variant::no_kernel, Variant::no_margin};
        for (Variant v : order) {
            const TrainedModel model = train(corpus, ablate_hp, v);
            const EvalReport i2t =
                cross_modal_eval(model, raw[0].features, raw[0].labels, 0, 1, ablate_cutoff);
            const EvalReport t2i =
                cross_modal_eval(model, raw[1].features, raw[1].labels, 1, 0, ablate_cutoff);
            std::cout << std::left << std::setw(12) << to_string(v) << std::setw(22)
                      << format_double(i2t.map) << format_double(t2i.map) << "\n";
        }
    });

    // ---- scale ----
    auto* scale = app.add_subcommand("scale", "training-time scaling probe on synthetic corpora");
    scale->add_option("--config", "key=value config file; explicit flags override it");
    Hyperparams scale_hp;
    scale_hp.bits = 32;
    std::string scale_kexp = "paper", scale_bmode = "all";
    std::vector<int> scale_sizes;
    int scale_classes = 8, scale_dim = 32;
    double scale_noise = 0.3;
    scale->add_option("--sizes", scale_sizes, "increasing corpus sizes")->delimiter(',')->required();
    scale->add_option("--classes", scale_classes, "class count")->capture_default_str();
    scale->add_option("--dim", scale_dim, "feature dim per modality")->capture_default_str();
    scale->add_option("--noise", scale_noise, "cluster noise stddev")->capture_default_str();
    add_hyperparam_flags(scale, scale_hp, scale_kexp, scale_bmode);
    scale->callback([&] {
        apply_modes(scale_hp, scale_kexp, scale_bmode);
        const auto rows = scaling_probe(scale_sizes, scale_hp, scale_classes, scale_dim, scale_noise);
        std::cout << "# bits=" << scale_hp.bits << " classes=" << scale_classes << " dim="
                  << scale_dim << " seed=" << scale_hp.seed << "\n";
        std::cout << std::left << std::setw(10) << "n" << std::setw(22) << "step1_s" << std::setw(22)
                  << "kernel_s" << std::setw(22) << "step2_s" << "total_s\n";
        for (const auto& row : rows) {
            std::cout << std::left << std::setw(10) << row.size << std::setw(22)
                      << format_double(row.timings.step1_seconds) << std::setw(22)
                      << format_double(row.timings.kernel_seconds) << std::setw(22)
                      << format_double(row.timings.step2_seconds)
                      << format_double(row.timings.total()) << "\n";
        }
        for (std::size_t i = 1; i < rows.size(); ++i) {
            const double ratio = rows[i].timings.total() / rows[i - 1].timings.total();
            std::cout << "ratio[" << rows[i - 1].size << "->" << rows[i].size
                      << "]=" << format_double(ratio) << "\n";
        }
    });

    std::vector<std::string> args(argv + 1, argv + argc);
    try {
        args = merge_config(app, std::move(args));
        std::reverse(args.begin(), args.end());
        app.parse(std::move(args));
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    if (const char* threads = std::getenv("AMSH_THREADS")) {
        const int t = std::atoi(threads);
        if (t > 0) Eigen::setNbThreads(t);
    }
    try {
        return run_app(argc, argv);
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
