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

#include <charconv>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <string>
#include <vector>

#include "trex/counterfactual.h"
#include "trex/errors.h"

namespace trex {
namespace {

constexpr const char* kFixedColumns[] = {
    "row_id", "generator", "norm", "cost", "m_cf", "stability", "verdict",
    "steps"};
constexpr std::size_t kNumFixed = std::size(kFixedColumns);

void put_real(std::ostream& out, double v) {
  if (std::isnan(v)) {
    out << "nan";
    return;
  }
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  out.write(buf, ptr - buf);
}

std::vector<std::string> fields_of(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    fields.push_back(line.substr(start, comma - start));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return fields;
}

double get_real(const std::string& field, std::size_t line) {
  if (field == "nan") return std::numeric_limits<double>::quiet_NaN();
  double v = 0.0;
  const char* end = field.data() + field.size();
  const auto [ptr, ec] = std::from_chars(field.data(), end, v);
  if (field.empty() || ec != std::errc() || ptr != end) {
    throw DataError("counterfactual CSV line " + std::to_string(line) +
                    ": cannot parse '" + field + "' as a number");
  }
  return v;
}

long long get_int(const std::string& field, std::size_t line) {
  long long v = 0;
  const char* end = field.data() + field.size();
  const auto [ptr, ec] = std::from_chars(field.data(), end, v);
  if (field.empty() || ec != std::errc() || ptr != end) {
    throw DataError("counterfactual CSV line " + std::to_string(line) +
                    ": cannot parse '" + field + "' as an integer");
  }
  return v;
}

}  // namespace

void write_counterfactual_csv(std::ostream& out,
                              const std::vector<CounterfactualRecord>& records,
                              const std::vector<std::string>& feature_names) {
  for (std::size_t i = 0; i < kNumFixed; ++i) {
    out << (i ? "," : "") << kFixedColumns[i];
  }
  for (const std::string& name : feature_names) out << ',' << name;
  out << '\n';
  for (const CounterfactualRecord& rec : records) {
    out << rec.row_id << ',' << generator_name(rec.generator) << ','
        << norm_name(rec.norm) << ',';
    put_real(out, rec.has_counterfactual()
                      ? rec.cost
                      : std::numeric_limits<double>::quiet_NaN());
    out << ',';
    put_real(out, rec.has_counterfactual()
                      ? rec.model_output
                      : std::numeric_limits<double>::quiet_NaN());
    out << ',';
    put_real(out, rec.stability);
    out << ',' << verdict_name(rec.verdict) << ',' << rec.steps;
    for (std::size_t j = 0; j < feature_names.size(); ++j) {
      out << ',';
      if (rec.has_counterfactual()) {
        if (rec.counterfactual.size() != static_cast<Eigen::Index>(
                                             feature_names.size())) {
          throw PreconditionError(
              "write_counterfactual_csv: record dimension does not match "
              "the feature names");
        }
        put_real(out, rec.counterfactual[static_cast<Eigen::Index>(j)]);
      }
    }
    out << '\n';
  }
}

std::vector<CounterfactualRecord> read_counterfactual_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) {
    throw DataError("counterfactual CSV: missing header");
  }
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const std::vector<std::string> header = fields_of(line);
  if (header.size() < kNumFixed) {
    throw DataError("counterfactual CSV: header has too few columns");
  }
  for (std::size_t i = 0; i < kNumFixed; ++i) {
    if (header[i] != kFixedColumns[i]) {
      throw DataError("counterfactual CSV: expected column '" +
                      std::string(kFixedColumns[i]) + "' at position " +
                      std::to_string(i + 1) + ", found '" + header[i] + "'");
    }
  }
  const std::size_t d = header.size() - kNumFixed;
  std::vector<CounterfactualRecord> records;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::vector<std::string> f = fields_of(line);
    if (f.size() != header.size()) {
      throw DataError("counterfactual CSV line " + std::to_string(line_no) +
                      ": expected " + std::to_string(header.size()) +
                      " fields, found " + std::to_string(f.size()));
    }
    CounterfactualRecord rec;
    rec.row_id = get_int(f[0], line_no);
    rec.generator = parse_generator(f[1]);
    rec.norm = parse_norm(f[2]);
    rec.cost = get_real(f[3], line_no);
    rec.model_output = get_real(f[4], line_no);
    rec.stability = get_real(f[5], line_no);
    rec.verdict = parse_verdict(f[6]);
    rec.steps = static_cast<int>(get_int(f[7], line_no));
    if (rec.has_counterfactual()) {
      rec.counterfactual.resize(static_cast<Eigen::Index>(d));
      for (std::size_t j = 0; j < d; ++j) {
        rec.counterfactual[static_cast<Eigen::Index>(j)] =
            get_real(f[kNumFixed + j], line_no);
      }
    }
    records.push_back(std::move(rec));
  }
  return records;
}

}  // namespace trex
