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

#include <filesystem>
#include <random>

#include "amsh/matrix_io.hpp"
#include "amsh/pipeline.hpp"
#include "oracles.hpp"

using namespace amsh;
namespace fs = std::filesystem;

namespace {

Hyperparams tiny_hp() {
    Hyperparams hp;
    hp.bits = 4;
    hp.seed = 5;
    hp.anchors = 16;
    return hp;
}

}  // namespace

TEST_CASE("variant names round-trip") {
    for (Variant v : {Variant::full, Variant::no_intra, Variant::no_inter, Variant::no_kernel,
                      Variant::no_margin})
        CHECK(variant_from_string(to_string(v)) == v);
    CHECK_THROWS_AS(variant_from_string("nope"), std::runtime_error);
    CHECK(task_name(0, 1) == "i2t");
    CHECK(task_name(1, 0) == "t2i");
    CHECK(task_name(1, 2) == "m22m3");
}

TEST_CASE("no_margin keeps both margin families at exactly zero") {
    auto corpus = synth_corpus(oracle::small_spec(23));
    auto model = train(corpus, tiny_hp(), Variant::no_margin);
    for (double m : model.provenance.label_margin_max) CHECK(m == 0.0);
    for (double m : model.provenance.bit_margin_max) CHECK(m == 0.0);

    auto full = train(corpus, tiny_hp(), Variant::full);
    bool any_positive = false;
    for (double m : full.provenance.label_margin_max) any_positive = any_positive || m > 0.0;
    CHECK(any_positive);
}

TEST_CASE("no_kernel differs from full only in the feature map") {
    auto corpus = synth_corpus(oracle::small_spec(24));
    auto hp = tiny_hp();
    auto full = train(corpus, hp, Variant::full);
    auto raw = train(corpus, hp, Variant::no_kernel);
    // step 1 never touches features: identical codes under the same seed
    for (std::size_t i = 0; i < corpus.modality_count(); ++i) {
        CHECK(full.modalities[i].codes == raw.modalities[i].codes);
        CHECK(raw.modalities[i].kernel.identity);
        CHECK(!full.modalities[i].kernel.identity);
        CHECK(raw.modalities[i].hash_fn.cols() == corpus.modalities[i].dim());
    }
}

TEST_CASE("ablation weights only drop the matching term") {
    auto corpus = synth_corpus(oracle::small_spec(25));
    auto hp = tiny_hp();
    auto no_intra = train(corpus, hp, Variant::no_intra);
    Hyperparams zeroed = hp;
    zeroed.lambda = 0.0;
    auto manual = train(corpus, zeroed, Variant::full);
    for (std::size_t i = 0; i < corpus.modality_count(); ++i)
        CHECK(no_intra.modalities[i].codes == manual.modalities[i].codes);
    // the configured weight is still recorded, the variant tag carries the drop
    CHECK(no_intra.params.lambda == hp.lambda);
    CHECK(no_intra.variant == Variant::no_intra);
}

TEST_CASE("models round-trip through their directory format") {
    auto dir = fs::temp_directory_path() / "amsh_model_test";
    fs::remove_all(dir);
    auto corpus = synth_corpus(oracle::small_spec(26));
    auto hp = tiny_hp();
    hp.kernel_exp = KernelExp::squared;
    hp.bandwidth_mode = BandwidthMode::non_anchor;
    auto model = train(corpus, hp, Variant::full);
    save_model(dir, model);

    auto kv = load_kv(dir / "meta.kv");
    CHECK(kv_get(kv, "version") == "1");
    CHECK(kv_get_int(kv, "bits") == hp.bits);
    CHECK(kv_get(kv, "variant") == "full");
    CHECK(kv_get(kv, "kernel_exp") == "squared");
    CHECK(kv_get(kv, "bandwidth_mode") == "non_anchor");
    CHECK(kv_get_int(kv, "modalities") == 2);
    CHECK(kv_get_double(kv, "m1.bandwidth") == model.modalities[0].kernel.bandwidth);

    auto back = load_model(dir);
    CHECK(back.params.bits == hp.bits);
    CHECK(back.params.kernel_exp == KernelExp::squared);
    CHECK(back.params.bandwidth_mode == BandwidthMode::non_anchor);
    REQUIRE(back.modalities.size() == model.modalities.size());
    for (std::size_t i = 0; i < model.modalities.size(); ++i) {
        CHECK(back.modalities[i].hash_fn == model.modalities[i].hash_fn);
        CHECK(back.modalities[i].codes == model.modalities[i].codes);
        CHECK(back.modalities[i].labels == model.modalities[i].labels);
        CHECK(back.modalities[i].kernel.anchors == model.modalities[i].kernel.anchors);
        CHECK(back.modalities[i].kernel.centering_mean == model.modalities[i].kernel.centering_mean);
        CHECK(back.modalities[i].kernel.bandwidth == model.modalities[i].kernel.bandwidth);
        CHECK(back.modalities[i].kernel.exp_mode == KernelExp::squared);
    }
    fs::remove_all(dir);
}

TEST_CASE("a reloaded model reproduces every query ranking") {
    auto dir = fs::temp_directory_path() / "amsh_model_rank_test";
    fs::remove_all(dir);
    auto corpus = synth_corpus(oracle::small_spec(27));
    auto model = train(corpus, tiny_hp(), Variant::full);
    save_model(dir, model);
    auto back = load_model(dir);

    std::mt19937_64 rng(12);
    Matrix queries = oracle::random_gaussian(corpus.modalities[0].dim(), 100, rng);
    const auto& qa = model.modalities[0];
    const auto& qb = back.modalities[0];
    Matrix codes_a = encode(qa.hash_fn, qa.kernel, queries);
    Matrix codes_b = encode(qb.hash_fn, qb.kernel, queries);
    REQUIRE(codes_a == codes_b);
    auto db_a = PackedCodes::pack(model.modalities[1].codes);
    auto db_b = PackedCodes::pack(back.modalities[1].codes);
    auto packed_a = PackedCodes::pack(codes_a);
    for (Index q = 0; q < queries.cols(); ++q) {
        auto ra = rank_codes(packed_a, q, db_a);
        auto rb = rank_codes(packed_a, q, db_b);
        REQUIRE(ra.size() == rb.size());
        for (std::size_t k = 0; k < ra.size(); ++k) {
            CHECK(ra[k].index == rb[k].index);
            CHECK(ra[k].distance == rb[k].distance);
        }
    }
    fs::remove_all(dir);
}

TEST_CASE("no_kernel models round-trip too") {
    auto dir = fs::temp_directory_path() / "amsh_model_nk_test";
    fs::remove_all(dir);
    auto corpus = synth_corpus(oracle::small_spec(28));
    auto model = train(corpus, tiny_hp(), Variant::no_kernel);
    save_model(dir, model);
    auto back = load_model(dir);
    CHECK(back.variant == Variant::no_kernel);
    for (std::size_t i = 0; i < model.modalities.size(); ++i) {
        CHECK(back.modalities[i].kernel.identity);
        CHECK(back.modalities[i].hash_fn == model.modalities[i].hash_fn);
    }
    fs::remove_all(dir);
}

TEST_CASE("cross_modal_eval runs both directions independently") {
    auto spec = oracle::small_spec(29);
    auto [corpus, queries] = synth_corpus_split(spec, {12, 9});
    auto model = train(corpus, tiny_hp());
    auto i2t = cross_modal_eval(model, queries[0].features, queries[0].labels, 0, 1);
    auto t2i = cross_modal_eval(model, queries[1].features, queries[1].labels, 1, 0);
    CHECK(i2t.task == "i2t");
    CHECK(t2i.task == "t2i");
    CHECK(i2t.queries_total == 12);
    CHECK(t2i.queries_total == 9);
    CHECK(i2t.cutoff == corpus.modalities[1].size());
    CHECK(t2i.cutoff == corpus.modalities[0].size());
    auto again = cross_modal_eval(model, queries[0].features, queries[0].labels, 0, 1);
    CHECK(again.map == i2t.map);

    CHECK_THROWS_AS(cross_modal_eval(model, queries[0].features, queries[0].labels, 0, 0),
                    std::invalid_argument);
    CHECK_THROWS_AS(cross_modal_eval(model, queries[0].features, queries[0].labels, 0, 7),
                    std::invalid_argument);
}

TEST_CASE("training is deterministic end to end") {
    auto corpus = synth_corpus(oracle::small_spec(33));
    auto a = train(corpus, tiny_hp());
    auto b = train(corpus, tiny_hp());
    for (std::size_t i = 0; i < corpus.modality_count(); ++i) {
        CHECK(a.modalities[i].hash_fn == b.modalities[i].hash_fn);
        CHECK(a.modalities[i].codes == b.modalities[i].codes);
        CHECK(a.modalities[i].kernel.anchors == b.modalities[i].kernel.anchors);
        CHECK(a.modalities[i].kernel.bandwidth == b.modalities[i].kernel.bandwidth);
    }
    CHECK(a.provenance.step1_trace == b.provenance.step1_trace);
    CHECK(a.provenance.step2_trace == b.provenance.step2_trace);
}

TEST_CASE("training records provenance") {
    auto corpus = synth_corpus(oracle::small_spec(30));
    TrainTimings timings;
    auto model = train(corpus, tiny_hp(), Variant::full, nullptr, &timings);
    CHECK(model.provenance.step1_sweeps >= 1);
    CHECK(model.provenance.step2_sweeps >= 1);
    CHECK(model.provenance.step1_trace.size() ==
          static_cast<std::size_t>(model.provenance.step1_sweeps) + 1);
    CHECK(model.provenance.step1_objective == model.provenance.step1_trace.back());
    CHECK(timings.step1_seconds >= 0.0);
    CHECK(timings.kernel_seconds >= 0.0);
    CHECK(timings.step2_seconds >= 0.0);
    CHECK(timings.total() ==
          timings.step1_seconds + timings.kernel_seconds + timings.step2_seconds);
}

TEST_CASE("scaling probe reports one row per size with positive phases") {
    Hyperparams hp;
    hp.bits = 4;
    hp.anchors = 32;
    hp.max_iters = 3;
    auto rows = scaling_probe({80, 120}, hp, 3, 6, 0.3);
    REQUIRE(rows.size() == 2);
    CHECK(rows[0].size == 80);
    CHECK(rows[1].size == 120);
    for (const auto& row : rows) {
        CHECK(row.timings.step1_seconds >= 0.0);
        CHECK(row.timings.kernel_seconds >= 0.0);
        CHECK(row.timings.step2_seconds >= 0.0);
    }
    CHECK_THROWS_AS(scaling_probe({100, 100}, hp), std::invalid_argument);
}
