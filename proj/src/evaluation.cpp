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

#include "amsh/evaluation.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

namespace amsh {

namespace {

constexpr int kRecallGridSize = 20;  // 0.05, 0.10, ..., 1.00

double grid_recall(int k) { return static_cast<double>(k + 1) / kRecallGridSize; }

// Precision at a recall level, linearly interpolated between curve points;
// constant extension left of the first point.
double interpolate_precision(const std::vector<PrPoint>& curve, double recall) {
    std::size_t hi = 0;
    while (hi < curve.size() && curve[hi].recall < recall) ++hi;
    if (hi == curve.size()) return curve.back().precision;
    if (hi == 0) return curve.front().precision;
    const auto& a = curve[hi - 1];
    const auto& b = curve[hi];
    const double w = (recall - a.recall) / (b.recall - a.recall);
    return a.precision + w * (b.precision - a.precision);
}

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

}  // namespace

std::vector<char> relevance_row(const Eigen::Ref<const Vector>& query_labels,
                                const Matrix& db_labels) {
    require(query_labels.size() == db_labels.rows(), "relevance: class count mismatch");
    const Eigen::RowVectorXd overlap = query_labels.transpose() * db_labels;
    std::vector<char> rel(static_cast<std::size_t>(db_labels.cols()));
    for (Index t = 0; t < db_labels.cols(); ++t) rel[t] = overlap(t) > 0.0 ? 1 : 0;
    return rel;
}

Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic> relevance(const Matrix& query_labels,
                                                             const Matrix& db_labels) {
    require(query_labels.rows() == db_labels.rows(), "relevance: class count mismatch");
    Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic> out(query_labels.cols(), db_labels.cols());
    for (Index q = 0; q < query_labels.cols(); ++q) {
        const auto row = relevance_row(query_labels.col(q), db_labels);
        for (Index t = 0; t < db_labels.cols(); ++t) out(q, t) = row[t] != 0;
    }
    return out;
}

double average_precision(const std::vector<RankedEntry>& ranking, const std::vector<char>& rel,
                         Index cutoff) {
    require(!ranking.empty(), "average_precision: empty ranking");
    require(ranking.size() == rel.size(), "average_precision: ranking/relevance size mismatch");
    require(cutoff >= 1 && cutoff <= static_cast<Index>(ranking.size()),
            "average_precision: cutoff out of range");
    Index total_relevant = 0;
    for (char r : rel) total_relevant += r ? 1 : 0;
    require(total_relevant > 0, "average_precision: no relevant item (AP undefined)");

    double sum = 0.0;
    Index hits = 0;
    for (Index k = 1; k <= cutoff; ++k) {
        if (rel[ranking[k - 1].index]) {
            ++hits;
            sum += static_cast<double>(hits) / static_cast<double>(k);
        }
    }
    return sum / static_cast<double>(total_relevant);
}

double mean_average_precision(const std::vector<double>& per_query_ap) {
    require(!per_query_ap.empty(), "mean_average_precision: no queries");
    double sum = 0.0;
    for (double ap : per_query_ap) sum += ap;
    return sum / static_cast<double>(per_query_ap.size());
}

std::vector<PrPoint> pr_curve(const std::vector<RankedEntry>& ranking,
                              const std::vector<char>& rel) {
    require(ranking.size() == rel.size(), "pr_curve: ranking/relevance size mismatch");
    Index total_relevant = 0;
    for (char r : rel) total_relevant += r ? 1 : 0;
    require(total_relevant > 0, "pr_curve: no relevant items");

    std::vector<PrPoint> out;
    out.reserve(static_cast<std::size_t>(total_relevant));
    Index hits = 0;
    for (std::size_t pos = 1; pos <= ranking.size(); ++pos) {
        if (!rel[ranking[pos - 1].index]) continue;
        ++hits;
        out.push_back({static_cast<double>(hits) / static_cast<double>(total_relevant),
                       static_cast<double>(hits) / static_cast<double>(pos)});
    }
    return out;
}

EvalReport evaluate(const Matrix& query_codes, const Matrix& db_codes, const Matrix& query_labels,
                    const Matrix& db_labels, std::string task, Index cutoff) {
    require(query_codes.rows() == db_codes.rows(), "evaluate: code width mismatch");
    require(query_codes.cols() == query_labels.cols(), "evaluate: query label count mismatch");
    require(db_codes.cols() == db_labels.cols(), "evaluate: database label count mismatch");
    require(query_labels.rows() == db_labels.rows(), "evaluate: class count mismatch");

    EvalReport report;
    report.task = std::move(task);
    report.queries_total = query_codes.cols();
    report.cutoff = cutoff <= 0 ? db_codes.cols() : cutoff;
    require(report.cutoff <= db_codes.cols(), "evaluate: cutoff exceeds database size");

    const PackedCodes queries = PackedCodes::pack(query_codes);
    const PackedCodes db = PackedCodes::pack(db_codes);

    std::vector<double> included_ap;
    std::vector<double> pooled(kRecallGridSize, 0.0);
    report.per_query_ap.assign(static_cast<std::size_t>(report.queries_total),
                               std::numeric_limits<double>::quiet_NaN());

    for (Index q = 0; q < report.queries_total; ++q) {
        const auto t_rank = Clock::now();
        const auto ranking = rank_codes(queries, q, db);
        report.rank_seconds += seconds_since(t_rank);

        const auto t_metric = Clock::now();
        const auto rel = relevance_row(query_labels.col(q), db_labels);
        const bool any = std::find(rel.begin(), rel.end(), char{1}) != rel.end();
        if (!any) {
            ++report.queries_excluded;
        } else {
            const double ap = average_precision(ranking, rel, report.cutoff);
            report.per_query_ap[static_cast<std::size_t>(q)] = ap;
            included_ap.push_back(ap);
            const auto curve = pr_curve(ranking, rel);
            for (int k = 0; k < kRecallGridSize; ++k)
                pooled[k] += interpolate_precision(curve, grid_recall(k));
        }
        report.metric_seconds += seconds_since(t_metric);
    }

    require(!included_ap.empty(), "evaluate: every query has an empty relevance set");
    report.map = mean_average_precision(included_ap);
    report.pr_points.reserve(kRecallGridSize);
    for (int k = 0; k < kRecallGridSize; ++k)
        report.pr_points.push_back({grid_recall(k),
                                    pooled[k] / static_cast<double>(included_ap.size())});
    return report;
}

}  // namespace amsh
