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

#include <string>
#include <vector>

#include "amsh/matrix.hpp"
#include "amsh/retrieval.hpp"

namespace amsh {

/// True neighbors share at least one semantic label with the query.
std::vector<char> relevance_row(const Eigen::Ref<const Vector>& query_labels,
                                const Matrix& db_labels);

/// Full judgment matrix, queries x database.
Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic> relevance(const Matrix& query_labels,
                                                             const Matrix& db_labels);

/// AP over the top cutoff positions of a full ranking. The true-neighbor
/// count normalizing the sum is taken over the whole database; a query with
/// no relevant item in the top cutoff scores 0. Callers exclude queries with
/// no relevant item anywhere (AP undefined there).
double average_precision(const std::vector<RankedEntry>& ranking, const std::vector<char>& rel,
                         Index cutoff);

double mean_average_precision(const std::vector<double>& per_query_ap);

struct PrPoint {
    double recall;
    double precision;
};

/// One point per rank position holding a relevant item, over the full list:
/// recall = hits / total relevant, precision = hits / position.
std::vector<PrPoint> pr_curve(const std::vector<RankedEntry>& ranking,
                              const std::vector<char>& rel);

struct EvalReport {
    std::string task;
    double map = 0.0;
    std::vector<double> per_query_ap;  // NaN marks excluded queries
    std::vector<PrPoint> pr_points;    // pooled over queries on a fixed recall grid
    Index cutoff = 0;
    Index queries_total = 0;
    Index queries_excluded = 0;  // queries with no relevant item at all
    double encode_seconds = 0.0;
    double rank_seconds = 0.0;
    double metric_seconds = 0.0;
};

/// Ranks every query against the database, computes MAP at the cutoff (<= 0
/// means the full database) and pools per-query PR curves onto the recall
/// grid 0.05..1.0 by linear interpolation.
EvalReport evaluate(const Matrix& query_codes, const Matrix& db_codes, const Matrix& query_labels,
                    const Matrix& db_labels, std::string task, Index cutoff = 0);

}  // namespace amsh
