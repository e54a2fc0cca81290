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

#include <span>
#include <vector>

#include "amsh/function_learning.hpp"
#include "amsh/matrix.hpp"

namespace amsh {

/// Sign codes packed one bit per entry (bit set <=> +1), 64 bits per word,
/// unused high bits zero. Immutable after pack.
class PackedCodes {
public:
    PackedCodes() = default;

    static PackedCodes pack(const Matrix& sign_codes);
    Matrix unpack() const;

    Index size() const { return count_; }
    int bits() const { return bits_; }
    int words_per_code() const { return words_; }
    std::span<const std::uint64_t> code(Index i) const {
        return {data_.data() + static_cast<std::size_t>(i) * words_, static_cast<std::size_t>(words_)};
    }
    int distance(Index i, std::span<const std::uint64_t> other) const;

private:
    Index count_ = 0;
    int bits_ = 0;
    int words_ = 0;
    std::vector<std::uint64_t> data_;
};

/// Hamming distance between two sign columns.
int hamming(const Eigen::Ref<const Vector>& a, const Eigen::Ref<const Vector>& b);

struct RankedEntry {
    Index index;
    int distance;
};

/// Full database ranking for one query: distance ascending, ties broken by
/// database index ascending.
std::vector<RankedEntry> rank_codes(const PackedCodes& queries, Index query_index,
                                    const PackedCodes& db);

/// Query encoding: center raw features with the kernel map's training mean,
/// apply the kernel map, take sgn(F phi(x)) per column (sgn(0) = -1).
Matrix encode(const Matrix& hash_fn, const KernelMap& km, const Matrix& raw_features);

}  // namespace amsh
