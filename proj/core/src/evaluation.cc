/*
 * Copyright 2026 The trex Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "trex/evaluation.h"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <sstream>

#include "trex/errors.h"
#include "trex/parallel.h"

namespace trex {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void put_real(std::ostream& out, double v) {
  if (std::isnan(v)) {
    out << "nan";
    return;
  }
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  out.write(buf, ptr - buf);
}

std::size_t count_produced(const std::vector<CounterfactualRecord>& records) {
  std::size_t n = 0;
  for (const auto& r : records) n += r.has_counterfactual() ? 1 : 0;
  return n;
}

std::size_t count_found(const std::vector<CounterfactualRecord>& records) {
  std::size_t n = 0;
  for (const auto& r : records) n += r.verdict == Verdict::kFound ? 1 : 0;
  return n;
}

double validity_or_nan(const std::vector<CounterfactualRecord>& records,
                       const ModelEnsemble* ensemble) {
  if (ensemble == nullptr || count_produced(records) == 0) return kNaN;
  return validity(records, *ensemble);
}

CostSummary cost_or_empty(const std::vector<CounterfactualRecord>& records,
                          Norm norm) {
  const auto summary = cost_summary(records);
  const auto it = summary.find(norm);
  if (it != summary.end()) return it->second;
  return CostSummary{kNaN, kNaN, 0};
}

LofSummary lof_or_empty(const std::vector<CounterfactualRecord>& records,
                        const LofIndex& index, double threshold) {
  if (count_produced(records) == 0) return LofSummary{kNaN, kNaN, 0};
  return lof_summary(records, index, threshold);
}

}  // namespace

double validity(const std::vector<CounterfactualRecord>& records,
                const ModelEnsemble& ensemble) {
  std::vector<std::size_t> rows;
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (records[i].has_counterfactual()) rows.push_back(i);
  }
  if (rows.empty()) {
    throw PreconditionError("validity: no records with a counterfactual");
  }
  const Eigen::Index d = records[rows.front()].counterfactual.size();
  PointMatrix points(static_cast<Eigen::Index>(rows.size()), d);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    points.row(static_cast<Eigen::Index>(i)) =
        records[rows[i]].counterfactual.transpose();
  }
  const Eigen::MatrixXd outputs = ensemble.predict_all(points);
  std::size_t valid = 0;
  for (Eigen::Index i = 0; i < outputs.rows(); ++i) {
    for (Eigen::Index j = 0; j < outputs.cols(); ++j) {
      valid += outputs(i, j) >= kDecisionThreshold ? 1 : 0;
    }
  }
  return 100.0 * static_cast<double>(valid) /
         static_cast<double>(outputs.size());
}

std::map<Norm, CostSummary> cost_summary(
    const std::vector<CounterfactualRecord>& records) {
  std::map<Norm, std::vector<double>> costs;
  for (const auto& r : records) {
    if (r.has_counterfactual()) costs[r.norm].push_back(r.cost);
  }
  if (costs.empty()) {
    throw PreconditionError("cost_summary: no records with a counterfactual");
  }
  std::map<Norm, CostSummary> out;
  for (const auto& [norm, values] : costs) {
    CostSummary s;
    s.count = values.size();
    for (const double v : values) s.mean += v;
    s.mean /= static_cast<double>(s.count);
    for (const double v : values) s.std += (v - s.mean) * (v - s.mean);
    s.std = std::sqrt(s.std / static_cast<double>(s.count));
    out[norm] = s;
  }
  return out;
}

LofSummary lof_summary(const std::vector<CounterfactualRecord>& records,
                       const LofIndex& index, double threshold) {
  LofSummary s;
  for (const auto& r : records) {
    if (!r.has_counterfactual()) continue;
    const double score = index.score(r.counterfactual);
    s.mean_score += score;
    s.mean_prediction += score > threshold ? -1.0 : 1.0;
    ++s.count;
  }
  if (s.count == 0) {
    throw PreconditionError("lof_summary: no records with a counterfactual");
  }
  s.mean_score /= static_cast<double>(s.count);
  s.mean_prediction /= static_cast<double>(s.count);
  return s;
}

std::vector<std::size_t> select_queries(const MlpModel& model,
                                        const Dataset& data) {
  std::vector<std::size_t> rows;
  if (data.empty()) return rows;
  const Vector outputs = model.forward_batch(data.features());
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (data.label(i) == 0 && outputs[static_cast<Eigen::Index>(i)] <
                                  kDecisionThreshold) {
      rows.push_back(i);
    }
  }
  return rows;
}

std::vector<CounterfactualRecord> generate_counterfactuals(
    const MlpModel& model, const Dataset& reference, const Dataset& queries,
    const std::vector<std::size_t>& query_rows, Generator generator, Norm norm,
    const GenerationConfig& cfg,
    const std::vector<CounterfactualRecord>* base) {
  cfg.trex.validate();
  if (generator == Generator::kTrexI &&
      (base == nullptr || base->size() != query_rows.size())) {
    throw PreconditionError(
        "generate_counterfactuals: trex-i needs one base record per query");
  }
  const StabilityConfig stab = cfg.trex.stability();
  std::vector<CounterfactualRecord> out(query_rows.size());
  parallel_for(
      query_rows.size(),
      [&](std::size_t i) {
        const Vector x = queries.row(query_rows[i]);
        CounterfactualRecord rec;
        switch (generator) {
          case Generator::kMinCost:
            rec = min_cost_cf(model, x, norm, cfg.min_cost);
            break;
          case Generator::kNearestNeighbor:
            rec = nn_cf(model, x, reference, norm);
            break;
          case Generator::kTrexI:
            rec = trex_i(model, x, (*base)[i], cfg.trex);
            break;
          case Generator::kTrexNN:
            rec = trex_nn(model, x, reference, cfg.trex, norm);
            break;
        }
        rec.row_id = static_cast<std::int64_t>(query_rows[i]);
        if (rec.has_counterfactual() && std::isnan(rec.stability)) {
          rec.stability = stability_relaxed(model, rec.counterfactual, stab);
        }
        out[i] = std::move(rec);
      },
      cfg.workers);
  return out;
}

void RobustnessReport::write_csv(std::ostream& out) const {
  out << "generator,norm,queries,counterfactuals,found,cost_mean,cost_std,"
         "lof_prediction,lof_score,wi_validity,lo_validity\n";
  for (const ReportRow& r : rows) {
    out << generator_name(r.generator) << ',' << norm_name(r.norm) << ','
        << r.queries << ',' << r.produced << ',' << r.found << ',';
    put_real(out, r.cost.mean);
    out << ',';
    put_real(out, r.cost.std);
    out << ',';
    put_real(out, r.lof.mean_prediction);
    out << ',';
    put_real(out, r.lof.mean_score);
    out << ',';
    put_real(out, r.wi_validity);
    out << ',';
    put_real(out, r.lo_validity);
    out << '\n';
  }
}

std::string RobustnessReport::render_table() const {
  std::ostringstream out;
  char line[160];
  std::snprintf(line, sizeof(line), "%-10s %-4s %-17s %6s %8s %8s %9s\n",
                "METHOD", "NORM", "COST", "LOF", "WI VAL.", "LO VAL.", "N");
  out << line;
  for (const ReportRow& r : rows) {
    char cost[32];
    std::snprintf(cost, sizeof(cost), "%.3f +/- %.3f", r.cost.mean,
                  r.cost.std);
    char wi[16];
    char lo[16];
    std::snprintf(wi, sizeof(wi), "%.1f%%", r.wi_validity);
    std::snprintf(lo, sizeof(lo), "%.1f%%", r.lo_validity);
    char count[24];
    std::snprintf(count, sizeof(count), "%zu/%zu", r.produced, r.queries);
    std::snprintf(line, sizeof(line), "%-10s %-4s %-17s %6.2f %8s %8s %9s\n",
                  std::string(generator_name(r.generator)).c_str(),
                  std::string(norm_name(r.norm)).c_str(), cost,
                  r.lof.mean_prediction, wi, lo, count);
    out << line;
  }
  return out.str();
}

RobustnessReport build_report(
    const std::vector<std::vector<CounterfactualRecord>>& groups,
    const LofIndex& lof, const ModelEnsemble* wi, const ModelEnsemble* lo,
    double lof_threshold) {
  RobustnessReport report;
  for (const auto& records : groups) {
    if (records.empty()) {
      throw PreconditionError("build_report: empty record group");
    }
    ReportRow row;
    row.generator = records.front().generator;
    row.norm = records.front().norm;
    for (const auto& r : records) {
      if (r.generator != row.generator || r.norm != row.norm) {
        throw PreconditionError(
            "build_report: a group mixes generators or norms");
      }
    }
    row.queries = records.size();
    row.produced = count_produced(records);
    row.found = count_found(records);
    row.cost = cost_or_empty(records, row.norm);
    row.lof = lof_or_empty(records, lof, lof_threshold);
    row.wi_validity = validity_or_nan(records, wi);
    row.lo_validity = validity_or_nan(records, lo);
    report.rows.push_back(row);
  }
  return report;
}

EvaluationResult evaluate(const Dataset& train, const Dataset& test,
                          const MlpModel& model,
                          const std::vector<Generator>& generators,
                          const std::vector<Norm>& norms,
                          const GenerationConfig& cfg, const ModelEnsemble* wi,
                          const ModelEnsemble* lo, int lof_neighbors) {
  const std::vector<std::size_t> queries = select_queries(model, test);
  if (queries.empty()) {
    throw PreconditionError("evaluate: the test split has no true negatives");
  }
  const LofIndex index = LofIndex::build(train.features(), lof_neighbors);
  EvaluationResult result;
  for (const Norm norm : norms) {
    std::optional<std::vector<CounterfactualRecord>> min_cost;
    const auto base_records = [&]() -> const std::vector<CounterfactualRecord>& {
      if (!min_cost) {
        min_cost = generate_counterfactuals(model, train, test, queries,
                                            Generator::kMinCost, norm, cfg);
      }
      return *min_cost;
    };
    for (const Generator g : generators) {
      if (g == Generator::kMinCost) {
        result.groups.push_back(base_records());
      } else if (g == Generator::kTrexI) {
        const auto& base = base_records();
        result.groups.push_back(generate_counterfactuals(
            model, train, test, queries, g, norm, cfg, &base));
      } else {
        result.groups.push_back(
            generate_counterfactuals(model, train, test, queries, g, norm, cfg));
      }
    }
  }
  result.report = build_report(result.groups, index, wi, lo);
  return result;
}

std::vector<AblationRow> ablation(
    const MlpModel& model, const std::vector<CounterfactualRecord>& base,
    const TrexConfig& trex, const std::vector<double>& taus,
    const std::vector<Measure>& measures, const LofIndex& lof,
    const ModelEnsemble* wi, const ModelEnsemble* lo, unsigned workers) {
  if (base.empty()) throw PreconditionError("ablation: no base records");
  std::vector<AblationRow> rows;
  for (const double tau : taus) {
    TrexConfig cfg = trex;
    cfg.tau = tau;
    cfg.validate();
    for (const Measure measure : measures) {
      std::vector<CounterfactualRecord> records(base.size());
      parallel_for(
          base.size(),
          [&](std::size_t i) {
            records[i] =
                trex_i(model, base[i].original, base[i], cfg, measure);
            records[i].row_id = base[i].row_id;
          },
          workers);
      AblationRow row;
      row.tau = tau;
      row.measure = measure;
      row.norm = base.front().norm;
      row.produced = count_produced(records);
      row.found = count_found(records);
      row.cost = cost_or_empty(records, row.norm);
      row.lof = lof_or_empty(records, lof, kDefaultLofThreshold);
      row.wi_validity = validity_or_nan(records, wi);
      row.lo_validity = validity_or_nan(records, lo);
      rows.push_back(row);
    }
  }
  return rows;
}

void write_ablation_csv(std::ostream& out,
                        const std::vector<AblationRow>& rows) {
  out << "tau,measure,norm,counterfactuals,found,cost_mean,cost_std,"
         "lof_prediction,lof_score,wi_validity,lo_validity\n";
  for (const AblationRow& r : rows) {
    put_real(out, r.tau);
    out << ',' << measure_name(r.measure) << ',' << norm_name(r.norm) << ','
        << r.produced << ',' << r.found << ',';
    put_real(out, r.cost.mean);
    out << ',';
    put_real(out, r.cost.std);
    out << ',';
    put_real(out, r.lof.mean_prediction);
    out << ',';
    put_real(out, r.lof.mean_score);
    out << ',';
    put_real(out, r.wi_validity);
    out << ',';
    put_real(out, r.lo_validity);
    out << '\n';
  }
}

}  // namespace trex
