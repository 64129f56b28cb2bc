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

#include "commands.h"

#include <openssl/evp.h>

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include "json.hpp"
#include "trex/counterfactual.h"
#include "trex/ensemble.h"
#include "trex/errors.h"
#include "trex/evaluation.h"
#include "trex/lof.h"
#include "trex/model_io.h"
#include "trex/theory.h"

namespace trex::cli {
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kToolVersion = "0.1.0";

void log(const CommandOptions& opts, const std::string& line) {
  if (!opts.quiet) std::cerr << line << '\n';
}

std::string real(double v) {
  if (std::isnan(v)) return "nan";
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return buf;
}

void write_file(const fs::path& path, const std::string& contents) {
  fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out << contents;
  if (!out) throw DataError("failed writing " + path.string());
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path model_path(const RunConfig& cfg) { return cfg.output_dir / "model.json"; }

MlpModel load_trained_model(const RunConfig& cfg) {
  const fs::path path = model_path(cfg);
  if (!fs::exists(path)) {
    throw DataError(path.string() + " not found; run `trex train` first");
  }
  return load_model(path);
}

fs::path counterfactual_path(const RunConfig& cfg, Generator g, Norm n) {
  return cfg.output_dir / "counterfactuals" /
         (std::string(generator_name(g)) + "_" + std::string(norm_name(n)) +
          ".csv");
}

std::vector<std::string> feature_names(const Dataset& data) {
  std::vector<std::string> names;
  for (const ColumnMeta& c : data.columns()) names.push_back(c.name);
  return names;
}

GenerationConfig generation_config(const RunConfig& cfg) {
  GenerationConfig g;
  g.trex = cfg.trex;
  g.min_cost = cfg.min_cost;
  g.workers = cfg.workers;
  return g;
}

std::vector<CounterfactualRecord> read_records(const fs::path& path,
                                               const Dataset& test) {
  if (!fs::exists(path)) {
    throw DataError(path.string() + " not found; run `trex generate` first");
  }
  std::ifstream in(path);
  std::vector<CounterfactualRecord> records = read_counterfactual_csv(in);
  for (CounterfactualRecord& r : records) {
    if (r.row_id < 0 || static_cast<std::size_t>(r.row_id) >= test.size()) {
      throw DataError(path.string() + ": row_id " + std::to_string(r.row_id) +
                      " is outside the test split");
    }
    r.original = test.row(static_cast<std::size_t>(r.row_id));
  }
  return records;
}

ModelEnsemble build_ensemble(const RunConfig& cfg, const MlpModel& base,
                             const Dataset& train, ChangeKind kind) {
  const std::uint64_t seed = kind == ChangeKind::kWeightInit
                                 ? cfg.seeds.weight_init
                                 : cfg.seeds.leave_out;
  return retrain_ensemble(base, train, cfg.model.train, cfg.ensembles.size,
                          kind, seed, cfg.ensembles.leave_out_fraction,
                          cfg.workers);
}

std::string hex(const unsigned char* bytes, unsigned int n) {
  static const char* digits = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < n; ++i) {
    out += digits[bytes[i] >> 4];
    out += digits[bytes[i] & 15];
  }
  return out;
}

}  // namespace

std::string sha256_hex(const std::string& bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(),
                 nullptr) != 1) {
    throw Error("SHA-256 computation failed");
  }
  return hex(digest, len);
}

Splits prepare_data(const RunConfig& cfg) {
  const DataSection& d = cfg.data;
  if (d.source == "moons") {
    const Dataset all = make_moons(d.n, d.noise, cfg.seeds.data);
    auto [train, test] = split(all, d.test_fraction, cfg.seeds.split);
    return {std::move(train), std::move(test)};
  }
  Dataset raw = load_csv(d.path, d.schema);
  if (!d.categorical.empty()) raw = one_hot_encode(raw, d.categorical);
  auto [train, test] = split(raw, d.test_fraction, cfg.seeds.split);
  const Scaler scaler = Scaler::fit(train);
  return {scaler.transform(train), scaler.transform(test)};
}

void cmd_train(const RunConfig& cfg, const CommandOptions& opts) {
  const Splits data = prepare_data(cfg);
  std::vector<int> sizes;
  sizes.push_back(static_cast<int>(data.train.dim()));
  sizes.insert(sizes.end(), cfg.model.hidden.begin(), cfg.model.hidden.end());
  sizes.push_back(1);
  const MlpModel model =
      train(init_mlp(sizes, cfg.seeds.init), data.train, cfg.model.train);
  fs::create_directories(cfg.output_dir);
  save_model(model, model_path(cfg));

  std::ostringstream train_csv;
  write_csv(train_csv, data.train);
  write_file(cfg.output_dir / "data" / "train.csv", train_csv.str());
  std::ostringstream test_csv;
  write_csv(test_csv, data.test);
  write_file(cfg.output_dir / "data" / "test.csv", test_csv.str());

  const double train_acc = accuracy(model, data.train);
  const double test_acc = accuracy(model, data.test);
  json metrics = {{"train_accuracy", train_acc},
                  {"test_accuracy", test_acc},
                  {"train_rows", data.train.size()},
                  {"test_rows", data.test.size()},
                  {"layer_sizes", sizes},
                  {"analytic_lipschitz_bound", analytic_lipschitz_bound(model)}};
  write_file(cfg.output_dir / "train_metrics.json", metrics.dump(2) + "\n");
  write_manifest(cfg);
  log(opts, "train: accuracy train " + fixed(train_acc, 4) + ", test " +
                fixed(test_acc, 4));
}

void cmd_generate(const RunConfig& cfg, const CommandOptions& opts) {
  const Splits data = prepare_data(cfg);
  const MlpModel model = load_trained_model(cfg);
  const std::vector<std::size_t> queries = select_queries(model, data.test);
  if (queries.empty()) {
    throw PreconditionError("generate: the test split has no true negatives");
  }
  const GenerationConfig gen = generation_config(cfg);
  const std::vector<std::string> names = feature_names(data.test);
  for (const Norm norm : cfg.evaluation.norms) {
    std::optional<std::vector<CounterfactualRecord>> min_cost;
    const auto base = [&]() -> const std::vector<CounterfactualRecord>& {
      if (!min_cost) {
        min_cost = generate_counterfactuals(model, data.train, data.test,
                                            queries, Generator::kMinCost, norm,
                                            gen);
      }
      return *min_cost;
    };
    for (const Generator g : cfg.evaluation.generators) {
      std::vector<CounterfactualRecord> records;
      if (g == Generator::kMinCost) {
        records = base();
      } else if (g == Generator::kTrexI) {
        records = generate_counterfactuals(model, data.train, data.test,
                                           queries, g, norm, gen, &base());
      } else {
        records = generate_counterfactuals(model, data.train, data.test,
                                           queries, g, norm, gen);
      }
      std::ostringstream out;
      write_counterfactual_csv(out, records, names);
      write_file(counterfactual_path(cfg, g, norm), out.str());
      log(opts, "generate: " + std::string(generator_name(g)) + " " +
                    std::string(norm_name(norm)) + ", " +
                    std::to_string(records.size()) + " queries");
    }
  }
  write_manifest(cfg);
}

void cmd_evaluate(const RunConfig& cfg, const CommandOptions& opts) {
  const Splits data = prepare_data(cfg);
  const MlpModel model = load_trained_model(cfg);
  std::optional<ModelEnsemble> wi;
  std::optional<ModelEnsemble> lo;
  for (const ChangeKind kind : cfg.ensembles.kinds) {
    log(opts, "evaluate: training " + std::to_string(cfg.ensembles.size) +
                  " " + std::string(change_kind_name(kind)) + " models");
    if (kind == ChangeKind::kWeightInit && !wi) {
      wi = build_ensemble(cfg, model, data.train, kind);
    } else if (kind == ChangeKind::kLeaveOut && !lo) {
      lo = build_ensemble(cfg, model, data.train, kind);
    }
  }
  const ModelEnsemble* wi_ptr = wi ? &*wi : nullptr;
  const ModelEnsemble* lo_ptr = lo ? &*lo : nullptr;
  const LofIndex lof =
      LofIndex::build(data.train.features(), cfg.evaluation.lof_neighbors);

  std::vector<std::vector<CounterfactualRecord>> groups;
  for (const Norm norm : cfg.evaluation.norms) {
    for (const Generator g : cfg.evaluation.generators) {
      groups.push_back(
          read_records(counterfactual_path(cfg, g, norm), data.test));
    }
  }
  const RobustnessReport report = build_report(
      groups, lof, wi_ptr, lo_ptr, cfg.evaluation.lof_threshold);
  std::ostringstream csv;
  report.write_csv(csv);
  write_file(cfg.output_dir / "report.csv", csv.str());
  write_file(cfg.output_dir / "report.txt", report.render_table());
  log(opts, report.render_table());

  if (cfg.evaluation.ablation_norm && !cfg.evaluation.ablation_taus.empty() &&
      !cfg.evaluation.ablation_measures.empty()) {
    const Norm norm = *cfg.evaluation.ablation_norm;
    const fs::path base_path = counterfactual_path(cfg, Generator::kMinCost, norm);
    std::vector<CounterfactualRecord> base;
    if (fs::exists(base_path)) {
      base = read_records(base_path, data.test);
    } else {
      base = generate_counterfactuals(model, data.train, data.test,
                                      select_queries(model, data.test),
                                      Generator::kMinCost, norm,
                                      generation_config(cfg));
    }
    const std::vector<AblationRow> rows = ablation(
        model, base, cfg.trex, cfg.evaluation.ablation_taus,
        cfg.evaluation.ablation_measures, lof, wi_ptr, lo_ptr, cfg.workers);
    std::ostringstream out;
    write_ablation_csv(out, rows);
    write_file(cfg.output_dir / "ablation.csv", out.str());
    log(opts, "evaluate: ablation over " + std::to_string(rows.size()) +
                  " settings");
  }
  write_manifest(cfg);
}

void cmd_theory(const RunConfig& cfg, const CommandOptions& opts) {
  const Splits data = prepare_data(cfg);
  const MlpModel model = load_trained_model(cfg);
  const TheorySection& t = cfg.theory;
  const fs::path dir = cfg.output_dir / "theory";

  const ModelEnsemble synthetic = synthetic_natural_ensemble(
      model, t.v_max, t.pairs, cfg.seeds.synthetic);
  const Eigen::Index n_queries = std::min<Eigen::Index>(
      t.queries, static_cast<Eigen::Index>(data.test.size()));
  const PointMatrix queries = data.test.features().topRows(n_queries);
  CoverageConfig coverage;
  coverage.ks = t.ks;
  coverage.eps = t.eps;
  coverage.sigma2 = cfg.trex.sigma2;
  coverage.sample_seeds = t.sample_seeds;
  coverage.seed = cfg.seeds.coverage;
  const CoverageResult cov = coverage_check(synthetic, queries, coverage);
  std::ostringstream cov_csv;
  write_coverage_csv(cov_csv, cov);
  write_file(dir / "coverage.csv", cov_csv.str());
  log(opts, "theory: coverage over " + std::to_string(cov.rows.front().trials) +
                " trials per grid point");

  std::ostringstream bound;
  bound << "k,eps,gamma,gamma_m,sigma2,bound\n";
  for (int k = 1; k <= 4096; k *= 2) {
    for (const double eps : t.eps) {
      bound << k << ',' << real(eps) << ',' << real(cov.gamma) << ','
            << real(cov.gamma_m) << ',' << real(cfg.trex.sigma2) << ','
            << real(concentration_bound(k, eps, cov.gamma, cov.gamma_m,
                                        cfg.trex.sigma2))
            << '\n';
    }
  }
  write_file(dir / "bound.csv", bound.str());

  std::ostringstream rashomon;
  rashomon << "ensemble,members,lhs,bound,centered_bound,holds\n";
  const auto rashomon_row = [&](const std::string& name, const ModelEnsemble& e) {
    const RashomonCheck c = rashomon_bound_check(e, data.train.features());
    rashomon << name << ',' << e.size() << ',' << real(c.lhs) << ','
          << real(c.bound) << ',' << real(c.centered_bound) << ','
          << (c.holds ? "true" : "false") << '\n';
  };
  rashomon_row("synthetic-natural", synthetic);
  PerturbationField constant;
  constant.shape = FieldShape::kConstant;
  constant.v_max = t.v_max;
  rashomon_row("synthetic-constant",
            synthetic_natural_ensemble(model, constant, t.pairs,
                                       cfg.seeds.synthetic));
  for (const ChangeKind kind : cfg.ensembles.kinds) {
    rashomon_row(std::string(change_kind_name(kind)),
              build_ensemble(cfg, model, data.train, kind));
  }
  write_file(dir / "rashomon.csv", rashomon.str());

  std::ostringstream targeted;
  targeted << "target,m_before,m_after,agreement,epochs,success,"
              "fidelity_weight\n";
  try {
    const Vector target = off_manifold_target(model, data.train);
    TargetedConfig tc;
    tc.max_epochs = t.targeted_epochs;
    tc.learning_rate = t.targeted_learning_rate;
    const TargetedResult r = targeted_invalidation(
        model, target, data.train, t.fidelity_weight, tc);
    std::string coords;
    for (Eigen::Index j = 0; j < target.size(); ++j) {
      coords += (j ? " " : "") + real(target[j]);
    }
    targeted << coords << ',' << real(model.forward(target)) << ','
             << real(r.target_output) << ',' << real(r.agreement) << ','
             << r.epochs << ',' << (r.success ? "true" : "false") << ','
             << real(t.fidelity_weight) << '\n';
    log(opts, std::string("theory: targeted invalidation ") +
                  (r.success ? "succeeded" : "did not succeed") +
                  ", agreement " + fixed(r.agreement, 4));
  } catch (const PreconditionError& e) {
    log(opts, std::string("theory: targeted invalidation skipped: ") +
                  e.what());
  }
  write_file(dir / "targeted.csv", targeted.str());
  write_manifest(cfg);
}

void write_manifest(const RunConfig& cfg) {
  json files = json::array();
  std::vector<fs::path> paths;
  for (const auto& entry : fs::recursive_directory_iterator(cfg.output_dir)) {
    if (!entry.is_regular_file()) continue;
    const fs::path rel = fs::relative(entry.path(), cfg.output_dir);
    if (rel == "manifest.json") continue;
    paths.push_back(rel);
  }
  std::sort(paths.begin(), paths.end());
  for (const fs::path& rel : paths) {
    files.push_back({{"path", rel.generic_string()},
                     {"sha256", sha256_hex(read_file(cfg.output_dir / rel))}});
  }
  const SeedSection& s = cfg.seeds;
  json manifest = {
      {"tool", "trex"},
      {"version", kToolVersion},
      {"config_sha256", sha256_hex(cfg.document.dump())},
      {"config", cfg.document},
      {"seeds",
       {{"master", s.master},
        {"data", s.data},
        {"split", s.split},
        {"init", s.init},
        {"train", s.train},
        {"trex", s.trex},
        {"weight_init", s.weight_init},
        {"leave_out", s.leave_out},
        {"synthetic", s.synthetic},
        {"coverage", s.coverage}}},
      {"files", files}};
  write_file(cfg.output_dir / "manifest.json", manifest.dump(2) + "\n");
}

}  // namespace trex::cli
