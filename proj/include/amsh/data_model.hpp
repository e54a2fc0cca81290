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
#include <utility>
#include <vector>

#include "amsh/matrix.hpp"

namespace amsh {

/// One modality of a multi-modal corpus. Features are stored zero-centered
/// (column = sample); the mean removed at load/build time is kept so that
/// queries can be mapped into the same space later.
struct ModalityDataset {
    Matrix features;       // d x n, zero mean per feature row
    Matrix labels;         // c x n, entries in {0,1}, every column nonzero
    Vector centering_mean; // length d

    Index dim() const { return features.rows(); }
    Index size() const { return features.cols(); }
    Index classes() const { return labels.rows(); }
    /// Features with the centering mean added back (the on-disk form).
    Matrix raw_features() const { return features.colwise() + centering_mean; }
};

enum class Pairing { paired, unpaired };

struct MultiModalCorpus {
    std::vector<ModalityDataset> modalities;
    Pairing pairing = Pairing::unpaired;

    std::size_t modality_count() const { return modalities.size(); }
};

/// Raw (uncentered) matrices as found in a corpus directory. Query sets are
/// consumed this way because queries must be centered with the *training*
/// mean, never their own.
struct RawModality {
    Matrix features;
    Matrix labels;
};

std::pair<Matrix, Vector> zero_center(const Matrix& x);

/// Column-normalized label matrix: every column scaled to unit 2-norm.
Matrix normalize_labels(const Matrix& labels);

/// Cosine similarity of two label columns, in [0, 1] for binary labels.
double cosine_similarity(const Eigen::Ref<const Vector>& a, const Eigen::Ref<const Vector>& b);

/// Sign matrix of a 0/1 label matrix: +1 where the label is set, -1 elsewhere.
Matrix label_signs(const Matrix& labels);

void validate_labels(const Matrix& labels);
void validate_dataset(const ModalityDataset& ds);
void validate_corpus(const MultiModalCorpus& corpus);

struct SynthSpec {
    int classes = 4;
    std::vector<int> sizes;       // samples per modality
    std::vector<int> dims;        // feature dims per modality
    double noise = 0.3;           // stddev around class prototypes
    double multilabel_p = 0.0;    // chance of each extra label
    std::uint64_t seed = 0;
};

/// Gaussian-cluster synthetic corpus: per-modality class prototypes, shared
/// class/label assignment across modalities (so equal sizes give a genuinely
/// paired corpus). Deterministic under seed; generating a longer corpus with
/// the same seed extends a shorter one sample-for-sample, which is what
/// synth_corpus_split relies on to produce held-out queries from the same
/// clusters.
MultiModalCorpus synth_corpus(const SynthSpec& spec);

/// Generates spec.sizes + query_sizes samples per modality and splits the
/// tail off as a raw query set.
std::pair<MultiModalCorpus, std::vector<RawModality>> synth_corpus_split(
    const SynthSpec& spec, const std::vector<int>& query_sizes);

/// Independently permutes each modality's columns (features and labels
/// together) and drops the pairing claim.
MultiModalCorpus shuffle_unpaired(const MultiModalCorpus& corpus, std::uint64_t seed);

/// Corpus directory: m<i>/X.dmt, m<i>/L.dmt (i = 1..m) plus corpus.kv with
/// "modalities" and "paired" keys. X.dmt holds raw (uncentered) features.
void save_corpus(const std::filesystem::path& dir, const MultiModalCorpus& corpus);
void save_raw_corpus(const std::filesystem::path& dir, const std::vector<RawModality>& modalities,
                     Pairing pairing);
MultiModalCorpus load_corpus(const std::filesystem::path& dir);
std::vector<RawModality> load_corpus_raw(const std::filesystem::path& dir);

}  // namespace amsh
