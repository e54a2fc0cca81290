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

#include "amsh/retrieval.hpp"

#include <bit>

namespace amsh {

PackedCodes PackedCodes::pack(const Matrix& sign_codes) {
    require(sign_codes.rows() >= 1, "pack: empty code matrix");
    require(((sign_codes.array() == 1.0) || (sign_codes.array() == -1.0)).all(),
            "pack: entries must be exactly -1 or +1");
    PackedCodes out;
    out.bits_ = static_cast<int>(sign_codes.rows());
    out.count_ = sign_codes.cols();
    out.words_ = (out.bits_ + 63) / 64;
    out.data_.assign(static_cast<std::size_t>(out.count_) * out.words_, 0);
    for (Index t = 0; t < out.count_; ++t) {
        std::uint64_t* words = out.data_.data() + static_cast<std::size_t>(t) * out.words_;
        for (int b = 0; b < out.bits_; ++b)
            if (sign_codes(b, t) > 0.0) words[b >> 6] |= std::uint64_t{1} << (b & 63);
    }
    return out;
}

Matrix PackedCodes::unpack() const {
    Matrix out(bits_, count_);
    for (Index t = 0; t < count_; ++t) {
        const std::uint64_t* words = data_.data() + static_cast<std::size_t>(t) * words_;
        for (int b = 0; b < bits_; ++b)
            out(b, t) = (words[b >> 6] >> (b & 63)) & 1 ? 1.0 : -1.0;
    }
    return out;
}

int PackedCodes::distance(Index i, std::span<const std::uint64_t> other) const {
    const std::uint64_t* words = data_.data() + static_cast<std::size_t>(i) * words_;
    int d = 0;
    for (int w = 0; w < words_; ++w) d += std::popcount(words[w] ^ other[w]);
    return d;
}

int hamming(const Eigen::Ref<const Vector>& a, const Eigen::Ref<const Vector>& b) {
    require(a.size() == b.size(), "hamming: length mismatch");
    int d = 0;
    for (Index i = 0; i < a.size(); ++i)
        if ((a(i) > 0.0) != (b(i) > 0.0)) ++d;
    return d;
}

std::vector<RankedEntry> rank_codes(const PackedCodes& queries, Index query_index,
                                    const PackedCodes& db) {
    require(queries.bits() == db.bits(), "rank_codes: code width mismatch");
    const auto q = queries.code(query_index);
    const Index n = db.size();

    // counting sort over distances; filling in index order keeps ties
    // ordered by database index
    std::vector<int> dist(static_cast<std::size_t>(n));
    std::vector<Index> bucket_start(static_cast<std::size_t>(db.bits()) + 2, 0);
    for (Index t = 0; t < n; ++t) {
        dist[t] = db.distance(t, q);
        ++bucket_start[dist[t] + 1];
    }
    for (std::size_t d = 1; d < bucket_start.size(); ++d) bucket_start[d] += bucket_start[d - 1];

    std::vector<RankedEntry> out(static_cast<std::size_t>(n));
    for (Index t = 0; t < n; ++t) out[bucket_start[dist[t]]++] = {t, dist[t]};
    return out;
}

Matrix encode(const Matrix& hash_fn, const KernelMap& km, const Matrix& raw_features) {
    require(raw_features.rows() == km.dim(), "encode: feature dimension mismatch");
    require(hash_fn.cols() == km.size(), "encode: hash function width mismatch");
    const Matrix centered = raw_features.colwise() - km.centering_mean;
    const Matrix phi = kernel_features(km, centered);
    return (hash_fn * phi).unaryExpr([](double v) { return sign_value(v); });
}

}  // namespace amsh
