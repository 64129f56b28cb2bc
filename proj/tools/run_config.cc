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

#include "run_config.h"

#include <fstream>
#include <functional>
#include <limits>
#include <set>
#include <utility>

#include "trex/errors.h"
#include "trex/random.h"

namespace trex::cli {
namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& pointer, const std::string& what) {
  throw ConfigError(pointer + ": " + what);
}

// Reads the fields of one JSON object and rejects any key left unread.
class Section {
 public:
  Section(const json* j, std::string pointer) : pointer_(std::move(pointer)) {
    if (j != nullptr && !j->is_object()) fail(where(), "must be an object");
    j_ = j;
  }

  std::string at(const std::string& key) const { return pointer_ + "/" + key; }

  const json* find(const std::string& key) {
    seen_.insert(key);
    if (j_ == nullptr) return nullptr;
    const auto it = j_->find(key);
    return it == j_->end() ? nullptr : &*it;
  }

  double real(const std::string& key, double fallback) {
    const json* v = find(key);
    if (v == nullptr) return fallback;
    if (!v->is_number()) fail(at(key), "must be a number");
    return v->get<double>();
  }

  long long integer(const std::string& key, long long fallback) {
    const json* v = find(key);
    if (v == nullptr) return fallback;
    if (!v->is_number_integer()) fail(at(key), "must be an integer");
    return v->get<long long>();
  }

  std::optional<std::uint64_t> seed(const std::string& key) {
    const json* v = find(key);
    if (v == nullptr) return std::nullopt;
    if (v->is_number_unsigned()) return v->get<std::uint64_t>();
    if (v->is_number_integer() && v->get<long long>() >= 0) {
      return static_cast<std::uint64_t>(v->get<long long>());
    }
    fail(at(key), "must be a non-negative integer");
  }

  std::string string(const std::string& key, const std::string& fallback) {
    const json* v = find(key);
    if (v == nullptr) return fallback;
    if (!v->is_string()) fail(at(key), "must be a string");
    return v->get<std::string>();
  }

  template <typename T, typename Fn>
  std::vector<T> list(const std::string& key, std::vector<T> fallback,
                      Fn&& convert) {
    const json* v = find(key);
    if (v == nullptr) return fallback;
    if (!v->is_array()) fail(at(key), "must be an array");
    std::vector<T> out;
    for (std::size_t i = 0; i < v->size(); ++i) {
      out.push_back(convert((*v)[i], at(key) + "/" + std::to_string(i)));
    }
    return out;
  }

  void finish() const {
    if (j_ == nullptr) return;
    for (const auto& [key, value] : j_->items()) {
      if (!seen_.count(key)) fail(at(key), "unknown key");
    }
  }

  std::string where() const { return pointer_.empty() ? "/" : pointer_; }

 private:
  const json* j_ = nullptr;
  std::string pointer_;
  std::set<std::string> seen_;
};

double as_real(const json& v, const std::string& pointer) {
  if (!v.is_number()) fail(pointer, "must be a number");
  return v.get<double>();
}

int as_int(const json& v, const std::string& pointer) {
  if (!v.is_number_integer()) fail(pointer, "must be an integer");
  const long long x = v.get<long long>();
  if (x < std::numeric_limits<int>::min() ||
      x > std::numeric_limits<int>::max()) {
    fail(pointer, "out of range");
  }
  return static_cast<int>(x);
}

std::string as_string(const json& v, const std::string& pointer) {
  if (!v.is_string()) fail(pointer, "must be a string");
  return v.get<std::string>();
}

template <typename T, typename Parse>
auto named(Parse parse) {
  return [parse](const json& v, const std::string& pointer) -> T {
    const std::string s = as_string(v, pointer);
    try {
      return parse(s);
    } catch (const Error& e) {
      fail(pointer, e.what());
    }
  };
}

void require(bool ok, const std::string& pointer, const std::string& what) {
  if (!ok) fail(pointer, what);
}

void parse_data(Section& root, DataSection& d) {
  Section s(root.find("data"), "/data");
  d.source = s.string("source", d.source);
  require(d.source == "moons" || d.source == "csv", s.at("source"),
          "must be \"moons\" or \"csv\"");
  const long long n = s.integer("n", static_cast<long long>(d.n));
  require(n >= 0, s.at("n"), "must be >= 0");
  d.n = static_cast<std::size_t>(n);
  d.noise = s.real("noise", d.noise);
  require(d.noise >= 0.0, s.at("noise"), "must be >= 0");
  d.path = s.string("path", d.path);
  d.test_fraction = s.real("test_fraction", d.test_fraction);
  require(d.test_fraction > 0.0 && d.test_fraction < 1.0,
          s.at("test_fraction"), "must lie in (0, 1)");
  d.categorical = s.list<std::string>("categorical", d.categorical, as_string);

  const json* cols = s.find("columns");
  if (cols != nullptr) {
    if (!cols->is_array()) fail(s.at("columns"), "must be an array");
    for (std::size_t i = 0; i < cols->size(); ++i) {
      Section c(&(*cols)[i], s.at("columns") + "/" + std::to_string(i));
      CsvColumn col;
      col.name = c.string("name", "");
      require(!col.name.empty(), c.at("name"), "is required");
      const std::string kind = c.string("kind", "numeric");
      if (kind == "numeric") {
        col.kind = CsvColumnKind::kNumeric;
      } else if (kind == "categorical") {
        col.kind = CsvColumnKind::kCategorical;
      } else if (kind == "label") {
        col.kind = CsvColumnKind::kLabel;
      } else {
        fail(c.at("kind"), "must be numeric, categorical or label");
      }
      c.finish();
      d.schema.columns.push_back(col);
    }
  }
  if (d.source == "csv") {
    require(!d.path.empty(), s.at("path"), "is required for csv data");
    require(!d.schema.columns.empty(), s.at("columns"),
            "is required for csv data");
  }
  s.finish();
}

void parse_model(Section& root, ModelSection& m) {
  Section s(root.find("model"), "/model");
  m.hidden = s.list<int>("hidden", m.hidden, as_int);
  for (std::size_t i = 0; i < m.hidden.size(); ++i) {
    require(m.hidden[i] >= 1, s.at("hidden") + "/" + std::to_string(i),
            "must be >= 1");
  }
  TrainConfig& t = m.train;
  t.epochs = static_cast<int>(s.integer("epochs", t.epochs));
  require(t.epochs >= 1, s.at("epochs"), "must be >= 1");
  t.batch_size = static_cast<int>(s.integer("batch_size", t.batch_size));
  require(t.batch_size >= 1, s.at("batch_size"), "must be >= 1");
  t.learning_rate = s.real("learning_rate", t.learning_rate);
  require(t.learning_rate > 0.0, s.at("learning_rate"), "must be > 0");
  t.adam_beta1 = s.real("adam_beta1", t.adam_beta1);
  require(t.adam_beta1 >= 0.0 && t.adam_beta1 < 1.0, s.at("adam_beta1"),
          "must lie in [0, 1)");
  t.adam_beta2 = s.real("adam_beta2", t.adam_beta2);
  require(t.adam_beta2 >= 0.0 && t.adam_beta2 < 1.0, s.at("adam_beta2"),
          "must lie in [0, 1)");
  t.adam_epsilon = s.real("adam_epsilon", t.adam_epsilon);
  require(t.adam_epsilon > 0.0, s.at("adam_epsilon"), "must be > 0");
  s.finish();
}

void parse_trex(Section& root, TrexConfig& t) {
  Section s(root.find("trex"), "/trex");
  t.k = static_cast<int>(s.integer("k", t.k));
  require(t.k >= 1, s.at("k"), "must be >= 1");
  t.sigma2 = s.real("sigma2", t.sigma2);
  require(t.sigma2 >= 0.0, s.at("sigma2"), "must be >= 0");
  t.tau = s.real("tau", t.tau);
  require(t.tau > 0.0 && t.tau <= 1.0, s.at("tau"), "must lie in (0, 1]");
  t.eta = s.real("eta", t.eta);
  require(t.eta > 0.0, s.at("eta"), "must be > 0");
  t.max_steps = static_cast<int>(s.integer("max_steps", t.max_steps));
  require(t.max_steps >= 0, s.at("max_steps"), "must be >= 0");
  t.neighbor_budget =
      static_cast<int>(s.integer("neighbor_budget", t.neighbor_budget));
  require(t.neighbor_budget >= 1, s.at("neighbor_budget"), "must be >= 1");
  s.finish();
}

void parse_min_cost(Section& root, MinCostParams& p) {
  Section s(root.find("min_cost"), "/min_cost");
  p.lambda0 = s.real("lambda0", p.lambda0);
  require(p.lambda0 > 0.0, s.at("lambda0"), "must be > 0");
  p.lambda_growth = s.real("lambda_growth", p.lambda_growth);
  require(p.lambda_growth >= 1.0, s.at("lambda_growth"), "must be >= 1");
  p.max_rounds = static_cast<int>(s.integer("max_rounds", p.max_rounds));
  require(p.max_rounds >= 1, s.at("max_rounds"), "must be >= 1");
  p.inner_steps = static_cast<int>(s.integer("inner_steps", p.inner_steps));
  require(p.inner_steps >= 1, s.at("inner_steps"), "must be >= 1");
  p.learning_rate = s.real("learning_rate", p.learning_rate);
  require(p.learning_rate > 0.0, s.at("learning_rate"), "must be > 0");
  s.finish();
}

void parse_ensembles(Section& root, EnsembleSection& e) {
  Section s(root.find("ensembles"), "/ensembles");
  e.size = static_cast<int>(s.integer("size", e.size));
  require(e.size >= 1, s.at("size"), "must be >= 1");
  e.kinds = s.list<ChangeKind>("kinds", e.kinds,
                               named<ChangeKind>(parse_change_kind));
  for (std::size_t i = 0; i < e.kinds.size(); ++i) {
    require(e.kinds[i] != ChangeKind::kSyntheticNatural,
            s.at("kinds") + "/" + std::to_string(i),
            "retrained ensembles must be weight-init or leave-out");
  }
  e.leave_out_fraction = s.real("leave_out_fraction", e.leave_out_fraction);
  require(e.leave_out_fraction >= 0.0 && e.leave_out_fraction < 1.0,
          s.at("leave_out_fraction"), "must lie in [0, 1)");
  s.finish();
}

void parse_evaluation(Section& root, EvaluationSection& e) {
  Section s(root.find("evaluation"), "/evaluation");
  e.generators = s.list<Generator>("generators", e.generators,
                                   named<Generator>(parse_generator));
  require(!e.generators.empty(), s.at("generators"), "must not be empty");
  e.norms = s.list<Norm>("norms", e.norms, named<Norm>(parse_norm));
  require(!e.norms.empty(), s.at("norms"), "must not be empty");
  e.lof_neighbors = static_cast<int>(s.integer("lof_neighbors", e.lof_neighbors));
  require(e.lof_neighbors >= 1, s.at("lof_neighbors"), "must be >= 1");
  e.lof_threshold = s.real("lof_threshold", e.lof_threshold);
  require(e.lof_threshold > 1.0, s.at("lof_threshold"), "must be > 1");
  e.ablation_taus = s.list<double>("ablation_taus", e.ablation_taus, as_real);
  for (std::size_t i = 0; i < e.ablation_taus.size(); ++i) {
    require(e.ablation_taus[i] >= 0.0 && e.ablation_taus[i] <= 1.0,
            s.at("ablation_taus") + "/" + std::to_string(i),
            "must lie in [0, 1]");
  }
  e.ablation_measures = s.list<Measure>("ablation_measures",
                                        e.ablation_measures,
                                        named<Measure>(parse_measure));
  const json* norm = s.find("ablation_norm");
  if (norm != nullptr) {
    if (norm->is_null()) {
      e.ablation_norm.reset();
    } else {
      e.ablation_norm = named<Norm>(parse_norm)(*norm, s.at("ablation_norm"));
    }
  }
  s.finish();
}

void parse_theory(Section& root, TheorySection& t) {
  Section s(root.find("theory"), "/theory");
  t.v_max = s.real("v_max", t.v_max);
  require(t.v_max >= 0.0 && t.v_max < 0.5, s.at("v_max"),
          "must lie in [0, 0.5)");
  t.pairs = static_cast<int>(s.integer("pairs", t.pairs));
  require(t.pairs >= 1, s.at("pairs"), "must be >= 1");
  t.ks = s.list<int>("ks", t.ks, as_int);
  require(!t.ks.empty(), s.at("ks"), "must not be empty");
  for (std::size_t i = 0; i < t.ks.size(); ++i) {
    require(t.ks[i] >= 1, s.at("ks") + "/" + std::to_string(i),
            "must be >= 1");
  }
  t.eps = s.list<double>("eps", t.eps, as_real);
  require(!t.eps.empty(), s.at("eps"), "must not be empty");
  for (std::size_t i = 0; i < t.eps.size(); ++i) {
    require(t.eps[i] > 0.0, s.at("eps") + "/" + std::to_string(i),
            "must be > 0");
  }
  t.sample_seeds = static_cast<int>(s.integer("sample_seeds", t.sample_seeds));
  require(t.sample_seeds >= 1, s.at("sample_seeds"), "must be >= 1");
  t.queries = static_cast<int>(s.integer("queries", t.queries));
  require(t.queries >= 1, s.at("queries"), "must be >= 1");
  t.fidelity_weight = s.real("fidelity_weight", t.fidelity_weight);
  require(t.fidelity_weight >= 0.0, s.at("fidelity_weight"), "must be >= 0");
  t.targeted_epochs =
      static_cast<int>(s.integer("targeted_epochs", t.targeted_epochs));
  require(t.targeted_epochs >= 0, s.at("targeted_epochs"), "must be >= 0");
  t.targeted_learning_rate =
      s.real("targeted_learning_rate", t.targeted_learning_rate);
  require(t.targeted_learning_rate > 0.0, s.at("targeted_learning_rate"),
          "must be > 0");
  s.finish();
}

void parse_seeds(Section& root, SeedSection& seeds,
                 std::optional<std::uint64_t> master_override) {
  const std::optional<std::uint64_t> master = root.seed("seed");
  seeds.master = master_override ? *master_override : master.value_or(0);
  Section s(root.find("seeds"), "/seeds");
  const auto pick = [&](const char* key, std::uint64_t* out) {
    const std::optional<std::uint64_t> v = s.seed(key);
    *out = v ? *v : derive_seed(seeds.master, key);
  };
  pick("data", &seeds.data);
  pick("split", &seeds.split);
  pick("init", &seeds.init);
  pick("train", &seeds.train);
  pick("trex", &seeds.trex);
  pick("weight_init", &seeds.weight_init);
  pick("leave_out", &seeds.leave_out);
  pick("synthetic", &seeds.synthetic);
  pick("coverage", &seeds.coverage);
  s.finish();
}

}  // namespace

RunConfig parse_run_config(const json& doc,
                           std::optional<std::uint64_t> seed_override) {
  if (!doc.is_object()) fail("/", "config must be a JSON object");
  RunConfig cfg;
  Section root(&doc, "");
  cfg.output_dir = root.string("output_dir", cfg.output_dir.string());
  require(!cfg.output_dir.empty(), "/output_dir", "must not be empty");
  const long long workers = root.integer("workers", 0);
  require(workers >= 0 && workers <= 1024, "/workers", "must lie in [0, 1024]");
  cfg.workers = static_cast<unsigned>(workers);
  parse_seeds(root, cfg.seeds, seed_override);
  parse_data(root, cfg.data);
  parse_model(root, cfg.model);
  parse_trex(root, cfg.trex);
  parse_min_cost(root, cfg.min_cost);
  parse_ensembles(root, cfg.ensembles);
  parse_evaluation(root, cfg.evaluation);
  parse_theory(root, cfg.theory);
  root.finish();
  cfg.model.train.seed = cfg.seeds.train;
  cfg.trex.seed = cfg.seeds.trex;
  cfg.document = doc;
  if (seed_override) cfg.document["seed"] = *seed_override;
  return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path,
                          std::optional<std::uint64_t> seed_override) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path.string() + ": cannot open config file");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(path.string() + ": invalid JSON: " + e.what());
  }
  return parse_run_config(doc, seed_override);
}

}  // namespace trex::cli
