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

#include "amsh/data_model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "amsh/matrix_io.hpp"

namespace amsh {

std::pair<Matrix, Vector> zero_center(const Matrix& x) {
    require(x.size() > 0, "zero_center: empty matrix");
    require(x.allFinite(), "zero_center: non-finite entry");
    Vector mean = x.rowwise().mean();
    Matrix centered = x.colwise() - mean;
    return {std::move(centered), std::move(mean)};
}

Matrix normalize_labels(const Matrix& labels) {
    Matrix out(labels.rows(), labels.cols());
    for (Index j = 0; j < labels.cols(); ++j) {
        const double norm = labels.col(j).norm();
        require(norm > 0.0, "normalize_labels: zero label column " + std::to_string(j));
        out.col(j) = labels.col(j) / norm;
    }
    return out;
}

double cosine_similarity(const Eigen::Ref<const Vector>& a, const Eigen::Ref<const Vector>& b) {
    require(a.size() == b.size(), "cosine_similarity: length mismatch");
    const double na2 = a.squaredNorm();
    const double nb2 = b.squaredNorm();
    require(na2 > 0.0 && nb2 > 0.0, "cosine_similarity: zero column");
    return a.dot(b) / std::sqrt(na2 * nb2);
}

Matrix label_signs(const Matrix& labels) {
    for (Index j = 0; j < labels.cols(); ++j)
        for (Index i = 0; i < labels.rows(); ++i)
            require(labels(i, j) == 0.0 || labels(i, j) == 1.0, "labels: entry not in {0,1}");
    return 2.0 * labels.array() - 1.0;
}

void validate_labels(const Matrix& labels) {
    require(labels.rows() >= 1 && labels.cols() >= 1, "labels: empty matrix");
    for (Index j = 0; j < labels.cols(); ++j) {
        bool any = false;
        for (Index i = 0; i < labels.rows(); ++i) {
            const double v = labels(i, j);
            require(v == 0.0 || v == 1.0, "labels: entry not in {0,1}");
            any = any || v == 1.0;
        }
        require(any, "labels: column " + std::to_string(j) + " has no label");
    }
}

void validate_dataset(const ModalityDataset& ds) {
    require(ds.features.rows() >= 1 && ds.features.cols() >= 1, "dataset: empty feature matrix");
    require(ds.features.allFinite(), "dataset: non-finite feature");
    require(ds.features.cols() == ds.labels.cols(), "dataset: feature/label sample count mismatch");
    require(ds.centering_mean.size() == ds.features.rows(), "dataset: centering mean size mismatch");
    validate_labels(ds.labels);
    const double worst = ds.features.rowwise().mean().cwiseAbs().maxCoeff();
    require(worst <= 1e-9, "dataset: features not zero-centered");
}

void validate_corpus(const MultiModalCorpus& corpus) {
    require(corpus.modalities.size() >= 2, "corpus: needs at least two modalities");
    const Index c = corpus.modalities.front().classes();
    for (const auto& ds : corpus.modalities) {
        validate_dataset(ds);
        require(ds.classes() == c, "corpus: class count differs across modalities");
    }
    if (corpus.pairing == Pairing::paired) {
        const Index n = corpus.modalities.front().size();
        for (const auto& ds : corpus.modalities)
            require(ds.size() == n, "corpus: paired corpus with unequal sizes");
    }
}

namespace {

struct Assignment {
    int cls = 0;
    std::vector<int> extra;  // additional label indices
};

// Shared class/label stream: sample t gets the same labels in every
// modality, so equal-size corpora are truly paired. Draw counts per sample
// are fixed, which keeps any prefix of the stream stable when more samples
// are requested.
std::vector<Assignment> draw_assignments(const SynthSpec& spec, int count) {
    std::mt19937_64 rng(mix_seed(spec.seed, 0xA551));
    std::uniform_int_distribution<int> pick_class(0, spec.classes - 1);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<Assignment> out(count);
    for (int t = 0; t < count; ++t) {
        const int drawn = pick_class(rng);
        out[t].cls = t < spec.classes ? t : drawn;
        for (int c = 0; c < spec.classes; ++c) {
            const double u = unit(rng);
            if (c != out[t].cls && u < spec.multilabel_p) out[t].extra.push_back(c);
        }
    }
    return out;
}

RawModality draw_modality(const SynthSpec& spec, int modality, int count,
                          const std::vector<Assignment>& assign) {
    const int d = spec.dims[modality];
    std::mt19937_64 rng(mix_seed(spec.seed, 0xF0 + modality));
    std::normal_distribution<double> gauss(0.0, 1.0);

    Matrix protos(d, spec.classes);
    for (int c = 0; c < spec.classes; ++c)
        for (int i = 0; i < d; ++i) protos(i, c) = gauss(rng);

    RawModality m;
    m.features.resize(d, count);
    m.labels = Matrix::Zero(spec.classes, count);
    for (int t = 0; t < count; ++t) {
        for (int i = 0; i < d; ++i) m.features(i, t) = protos(i, assign[t].cls) + spec.noise * gauss(rng);
        m.labels(assign[t].cls, t) = 1.0;
        for (int c : assign[t].extra) m.labels(c, t) = 1.0;
    }
    return m;
}

void check_spec(const SynthSpec& spec, const std::vector<int>& totals) {
    require(spec.classes >= 2, "synth: classes must be >= 2");
    require(spec.sizes.size() >= 2, "synth: need at least two modalities");
    require(spec.sizes.size() == spec.dims.size(), "synth: sizes/dims length mismatch");
    require(spec.noise >= 0.0, "synth: negative noise");
    require(spec.multilabel_p >= 0.0 && spec.multilabel_p <= 1.0, "synth: multilabel_p outside [0,1]");
    for (std::size_t i = 0; i < totals.size(); ++i) {
        require(totals[i] >= spec.classes, "synth: modality size below class count");
        require(spec.dims[i] >= 1, "synth: modality dim must be >= 1");
    }
}

MultiModalCorpus corpus_from_raw(std::vector<RawModality> raw, Pairing pairing) {
    MultiModalCorpus corpus;
    corpus.pairing = pairing;
    for (auto& rm : raw) {
        ModalityDataset ds;
        std::tie(ds.features, ds.centering_mean) = zero_center(rm.features);
        ds.labels = std::move(rm.labels);
        corpus.modalities.push_back(std::move(ds));
    }
    return corpus;
}

Pairing natural_pairing(const std::vector<int>& sizes) {
    const bool equal = std::all_of(sizes.begin(), sizes.end(),
                                   [&](int n) { return n == sizes.front(); });
    return equal ? Pairing::paired : Pairing::unpaired;
}

}  // namespace

MultiModalCorpus synth_corpus(const SynthSpec& spec) {
    check_spec(spec, spec.sizes);
    const int max_n = *std::max_element(spec.sizes.begin(), spec.sizes.end());
    const auto assign = draw_assignments(spec, max_n);
    std::vector<RawModality> raw;
    for (std::size_t i = 0; i < spec.sizes.size(); ++i)
        raw.push_back(draw_modality(spec, static_cast<int>(i), spec.sizes[i], assign));
    return corpus_from_raw(std::move(raw), natural_pairing(spec.sizes));
}

std::pair<MultiModalCorpus, std::vector<RawModality>> synth_corpus_split(
    const SynthSpec& spec, const std::vector<int>& query_sizes) {
    require(query_sizes.size() == spec.sizes.size(), "synth: query_sizes length mismatch");
    std::vector<int> totals(spec.sizes.size());
    for (std::size_t i = 0; i < totals.size(); ++i) {
        require(query_sizes[i] >= 1, "synth: query size must be >= 1");
        totals[i] = spec.sizes[i] + query_sizes[i];
    }
    check_spec(spec, totals);
    const int max_n = *std::max_element(totals.begin(), totals.end());
    const auto assign = draw_assignments(spec, max_n);

    std::vector<RawModality> train, queries;
    for (std::size_t i = 0; i < totals.size(); ++i) {
        RawModality whole = draw_modality(spec, static_cast<int>(i), totals[i], assign);
        RawModality head, tail;
        head.features = whole.features.leftCols(spec.sizes[i]);
        head.labels = whole.labels.leftCols(spec.sizes[i]);
        tail.features = whole.features.rightCols(query_sizes[i]);
        tail.labels = whole.labels.rightCols(query_sizes[i]);
        train.push_back(std::move(head));
        queries.push_back(std::move(tail));
    }
    return {corpus_from_raw(std::move(train), natural_pairing(spec.sizes)), std::move(queries)};
}

MultiModalCorpus shuffle_unpaired(const MultiModalCorpus& corpus, std::uint64_t seed) {
    MultiModalCorpus out;
    out.pairing = Pairing::unpaired;
    for (std::size_t i = 0; i < corpus.modalities.size(); ++i) {
        const auto& ds = corpus.modalities[i];
        std::vector<Index> perm(ds.size());
        std::iota(perm.begin(), perm.end(), Index{0});
        std::mt19937_64 rng(mix_seed(seed, 0x5AFF + i));
        std::shuffle(perm.begin(), perm.end(), rng);

        ModalityDataset shuffled;
        shuffled.features.resize(ds.features.rows(), ds.features.cols());
        shuffled.labels.resize(ds.labels.rows(), ds.labels.cols());
        shuffled.centering_mean = ds.centering_mean;
        for (Index t = 0; t < ds.size(); ++t) {
            shuffled.features.col(t) = ds.features.col(perm[t]);
            shuffled.labels.col(t) = ds.labels.col(perm[t]);
        }
        out.modalities.push_back(std::move(shuffled));
    }
    return out;
}

void save_corpus(const std::filesystem::path& dir, const MultiModalCorpus& corpus) {
    std::vector<RawModality> raw;
    for (const auto& ds : corpus.modalities)
        raw.push_back({ds.raw_features(), ds.labels});
    save_raw_corpus(dir, raw, corpus.pairing);
}

void save_raw_corpus(const std::filesystem::path& dir, const std::vector<RawModality>& modalities,
                     Pairing pairing) {
    namespace fs = std::filesystem;
    fs::create_directories(dir);
    KvFile kv;
    kv["modalities"] = std::to_string(modalities.size());
    kv["paired"] = pairing == Pairing::paired ? "true" : "false";
    store_kv(dir / "corpus.kv", kv);
    for (std::size_t i = 0; i < modalities.size(); ++i) {
        const fs::path sub = dir / ("m" + std::to_string(i + 1));
        fs::create_directories(sub);
        store_matrix(sub / "X.dmt", modalities[i].features);
        store_matrix(sub / "L.dmt", modalities[i].labels);
    }
}

std::vector<RawModality> load_corpus_raw(const std::filesystem::path& dir) {
    const KvFile kv = load_kv(dir / "corpus.kv");
    const long long m = kv_get_int(kv, "modalities");
    require(m >= 1, "corpus.kv: modalities must be >= 1");
    std::vector<RawModality> out;
    for (long long i = 1; i <= m; ++i) {
        const auto sub = dir / ("m" + std::to_string(i));
        RawModality rm;
        rm.features = load_matrix(sub / "X.dmt");
        rm.labels = load_matrix(sub / "L.dmt");
        require(rm.features.cols() == rm.labels.cols(),
                "corpus: feature/label sample count mismatch in m" + std::to_string(i));
        validate_labels(rm.labels);
        out.push_back(std::move(rm));
    }
    return out;
}

MultiModalCorpus load_corpus(const std::filesystem::path& dir) {
    const KvFile kv = load_kv(dir / "corpus.kv");
    const std::string& paired = kv_get(kv, "paired");
    require(paired == "true" || paired == "false", "corpus.kv: paired must be true or false");
    auto corpus = corpus_from_raw(load_corpus_raw(dir),
                                  paired == "true" ? Pairing::paired : Pairing::unpaired);
    validate_corpus(corpus);
    return corpus;
}

}  // namespace amsh
