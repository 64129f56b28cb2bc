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

#include "trex/dataset.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <ostream>
#include <set>
#include <sstream>

#include "trex/errors.h"
#include "trex/random.h"

namespace trex {

Dataset::Dataset(PointMatrix features, std::vector<int> labels,
                 std::vector<ColumnMeta> columns)
    : features_(std::move(features)),
      labels_(std::move(labels)),
      columns_(std::move(columns)) {
  if (static_cast<std::size_t>(features_.rows()) != labels_.size()) {
    throw PreconditionError("Dataset: " + std::to_string(features_.rows()) +
                            " feature rows but " +
                            std::to_string(labels_.size()) + " labels");
  }
  if (static_cast<std::size_t>(features_.cols()) != columns_.size()) {
    throw PreconditionError("Dataset: " + std::to_string(features_.cols()) +
                            " feature columns but " +
                            std::to_string(columns_.size()) +
                            " column descriptors");
  }
  for (std::size_t i = 0; i < labels_.size(); ++i) {
    if (labels_[i] != 0 && labels_[i] != 1) {
      throw PreconditionError("Dataset: label of row " + std::to_string(i) +
                              " is not binary");
    }
  }
  if (!features_.allFinite()) {
    throw PreconditionError("Dataset: non-finite feature value");
  }
}

Dataset Dataset::select(const std::vector<std::size_t>& rows) const {
  PointMatrix out(rows.size(), dim());
  std::vector<int> labels(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i] >= size()) {
      throw PreconditionError("Dataset::select: row index out of range");
    }
    out.row(i) = features_.row(rows[i]);
    labels[i] = labels_[rows[i]];
  }
  return Dataset(std::move(out), std::move(labels), columns_);
}

namespace {

std::vector<std::string> split_fields(const std::string& line) {
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

std::string strip_cr(std::string s) {
  if (!s.empty() && s.back() == '\r') s.pop_back();
  return s;
}

bool parse_double(const std::string& field, double* value) {
  if (field.empty()) return false;
  const char* begin = field.data();
  const char* end = begin + field.size();
  if (*begin == '+') ++begin;
  const auto [ptr, ec] = std::from_chars(begin, end, *value);
  return ec == std::errc() && ptr == end && std::isfinite(*value);
}

std::string cell_context(std::size_t line, const std::string& column) {
  return "row " + std::to_string(line) + " column '" + column + "'";
}

}  // namespace

Dataset parse_csv(std::istream& in, const CsvSchema& schema) {
  const auto label_count = std::count_if(
      schema.columns.begin(), schema.columns.end(),
      [](const CsvColumn& c) { return c.kind == CsvColumnKind::kLabel; });
  if (label_count != 1) {
    throw ConfigError("CSV schema must declare exactly one label column");
  }

  std::string line;
  if (!std::getline(in, line)) throw DataError("CSV input is empty (no header)");
  const std::vector<std::string> header = split_fields(strip_cr(line));
  if (header.size() != schema.columns.size()) {
    throw DataError("CSV header has " + std::to_string(header.size()) +
                    " columns, schema expects " +
                    std::to_string(schema.columns.size()));
  }
  for (std::size_t j = 0; j < header.size(); ++j) {
    if (header[j] != schema.columns[j].name) {
      throw DataError("CSV header mismatch at column " + std::to_string(j + 1) +
                      ": found '" + header[j] + "', schema expects '" +
                      schema.columns[j].name + "'");
    }
  }

  const std::size_t n_cols = schema.columns.size();
  std::vector<std::vector<double>> numeric_rows;
  std::vector<std::vector<std::string>> category_rows;
  std::vector<int> labels;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    line = strip_cr(line);
    if (line.empty()) continue;
    const std::vector<std::string> fields = split_fields(line);
    if (fields.size() != n_cols) {
      throw DataError("row " + std::to_string(line_no) + ": expected " +
                      std::to_string(n_cols) + " fields, found " +
                      std::to_string(fields.size()));
    }
    std::vector<double> numeric(n_cols, 0.0);
    std::vector<std::string> cats(n_cols);
    for (std::size_t j = 0; j < n_cols; ++j) {
      const CsvColumn& col = schema.columns[j];
      const std::string& field = fields[j];
      if (col.kind == CsvColumnKind::kCategorical) {
        if (field.empty()) {
          throw DataError(cell_context(line_no, col.name) + ": missing value");
        }
        cats[j] = field;
        continue;
      }
      double value = 0.0;
      if (!parse_double(field, &value)) {
        throw DataError(cell_context(line_no, col.name) + ": cannot parse '" +
                        field + "' as a number");
      }
      if (col.kind == CsvColumnKind::kLabel) {
        if (value != 0.0 && value != 1.0) {
          throw DataError(cell_context(line_no, col.name) +
                          ": label must be 0 or 1, found '" + field + "'");
        }
        labels.push_back(static_cast<int>(value));
      }
      numeric[j] = value;
    }
    numeric_rows.push_back(std::move(numeric));
    category_rows.push_back(std::move(cats));
  }

  std::vector<ColumnMeta> columns;
  std::vector<std::size_t> feature_index;
  std::vector<std::map<std::string, int>> codes(n_cols);
  for (std::size_t j = 0; j < n_cols; ++j) {
    const CsvColumn& col = schema.columns[j];
    if (col.kind == CsvColumnKind::kLabel) continue;
    ColumnMeta meta;
    meta.name = col.name;
    if (col.kind == CsvColumnKind::kCategorical) {
      meta.kind = ColumnKind::kCategorical;
      std::set<std::string> seen;
      for (const auto& row : category_rows) seen.insert(row[j]);
      meta.categories.assign(seen.begin(), seen.end());
      for (std::size_t c = 0; c < meta.categories.size(); ++c) {
        codes[j][meta.categories[c]] = static_cast<int>(c);
      }
    }
    columns.push_back(std::move(meta));
    feature_index.push_back(j);
  }

  PointMatrix features(numeric_rows.size(), feature_index.size());
  for (std::size_t i = 0; i < numeric_rows.size(); ++i) {
    for (std::size_t f = 0; f < feature_index.size(); ++f) {
      const std::size_t j = feature_index[f];
      features(i, f) = schema.columns[j].kind == CsvColumnKind::kCategorical
                           ? codes[j].at(category_rows[i][j])
                           : numeric_rows[i][j];
    }
  }
  return Dataset(std::move(features), std::move(labels), std::move(columns));
}

Dataset load_csv(const std::filesystem::path& path, const CsvSchema& schema) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open CSV file " + path.string());
  return parse_csv(in, schema);
}

void write_csv(std::ostream& out, const Dataset& data) {
  for (const ColumnMeta& col : data.columns()) out << col.name << ',';
  out << "label\n";
  char buf[32];
  for (std::size_t i = 0; i < data.size(); ++i) {
    for (std::size_t j = 0; j < data.dim(); ++j) {
      const auto [ptr, ec] =
          std::to_chars(buf, buf + sizeof(buf), data.features()(i, j));
      out.write(buf, ptr - buf);
      out << ',';
    }
    out << data.label(i) << '\n';
  }
}

Scaler::Scaler(Vector mins, Vector maxs)
    : mins_(std::move(mins)), maxs_(std::move(maxs)) {
  if (mins_.size() != maxs_.size()) {
    throw PreconditionError("Scaler: min/max size mismatch");
  }
  for (Eigen::Index j = 0; j < mins_.size(); ++j) {
    if (!(maxs_[j] >= mins_[j])) {
      throw PreconditionError("Scaler: max < min for column " +
                              std::to_string(j));
    }
  }
}

Scaler Scaler::fit(const Dataset& data) {
  if (data.empty()) {
    return Scaler(Vector::Zero(data.dim()), Vector::Ones(data.dim()));
  }
  return Scaler(data.features().colwise().minCoeff().transpose(),
                data.features().colwise().maxCoeff().transpose());
}

Vector Scaler::transform(const Vector& x) const {
  if (x.size() != mins_.size()) {
    throw PreconditionError("Scaler::transform: dimension mismatch");
  }
  Vector out(x.size());
  for (Eigen::Index j = 0; j < x.size(); ++j) {
    const double range = maxs_[j] - mins_[j];
    out[j] = range > 0.0 ? (x[j] - mins_[j]) / range : 0.0;
  }
  return out;
}

Vector Scaler::inverse_transform(const Vector& x) const {
  if (x.size() != mins_.size()) {
    throw PreconditionError("Scaler::inverse_transform: dimension mismatch");
  }
  return mins_.array() + x.array() * (maxs_ - mins_).array();
}

Dataset Scaler::transform(const Dataset& data) const {
  if (data.dim() != static_cast<std::size_t>(mins_.size())) {
    throw PreconditionError("Scaler::transform: dimension mismatch");
  }
  PointMatrix out(data.size(), data.dim());
  for (std::size_t i = 0; i < data.size(); ++i) {
    out.row(i) = transform(data.row(i)).transpose();
  }
  std::vector<ColumnMeta> columns = data.columns();
  for (std::size_t j = 0; j < columns.size(); ++j) {
    ColumnMeta& col = columns[j];
    const double span = col.original_max - col.original_min;
    const double lo = col.original_min + mins_[j] * span;
    const double hi = col.original_min + maxs_[j] * span;
    col.original_min = lo;
    col.original_max = hi;
  }
  return Dataset(std::move(out), data.labels(), std::move(columns));
}

std::pair<Dataset, Scaler> normalize_minmax(const Dataset& data) {
  for (const ColumnMeta& col : data.columns()) {
    if (col.kind == ColumnKind::kCategorical) {
      throw PreconditionError("normalize_minmax: column '" + col.name +
                              "' is categorical; one-hot encode it first");
    }
  }
  Scaler scaler = Scaler::fit(data);
  Dataset scaled = scaler.transform(data);
  return {std::move(scaled), std::move(scaler)};
}

Dataset one_hot_encode(const Dataset& data,
                       const std::vector<std::string>& categorical_columns) {
  const auto& cols = data.columns();
  for (const std::string& name : categorical_columns) {
    const auto it = std::find_if(cols.begin(), cols.end(), [&](const auto& c) {
      return c.name == name;
    });
    if (it == cols.end()) {
      throw PreconditionError("one_hot_encode: no column named '" + name + "'");
    }
    if (it->kind != ColumnKind::kCategorical) {
      throw PreconditionError("one_hot_encode: column '" + name +
                              "' is not categorical");
    }
  }
  const auto selected = [&](const std::string& name) {
    return std::find(categorical_columns.begin(), categorical_columns.end(),
                     name) != categorical_columns.end();
  };

  std::vector<ColumnMeta> out_cols;
  for (const ColumnMeta& col : cols) {
    if (!selected(col.name)) {
      out_cols.push_back(col);
      continue;
    }
    for (const std::string& category : col.categories) {
      ColumnMeta meta;
      meta.name = col.name + "=" + category;
      meta.kind = ColumnKind::kOneHot;
      meta.group = col.name;
      meta.category = category;
      out_cols.push_back(std::move(meta));
    }
  }

  PointMatrix out = PointMatrix::Zero(data.size(), out_cols.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    std::size_t k = 0;
    for (std::size_t j = 0; j < cols.size(); ++j) {
      const double value = data.features()(i, j);
      if (!selected(cols[j].name)) {
        out(i, k++) = value;
        continue;
      }
      const auto n_cat = cols[j].categories.size();
      const auto code = static_cast<long>(value);
      if (code < 0 || static_cast<std::size_t>(code) >= n_cat ||
          static_cast<double>(code) != value) {
        throw DataError("one_hot_encode: invalid category code in row " +
                        std::to_string(i) + " column '" + cols[j].name + "'");
      }
      out(i, k + code) = 1.0;
      k += n_cat;
    }
  }
  return Dataset(std::move(out), data.labels(), std::move(out_cols));
}

std::pair<Dataset, Dataset> split(const Dataset& data, double test_fraction,
                                  std::uint64_t seed) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
    throw PreconditionError("split: test_fraction must lie in (0, 1)");
  }
  const std::size_t n = data.size();
  if (n < 2) throw PreconditionError("split: need at least 2 rows");
  auto n_test = static_cast<std::size_t>(
      std::llround(static_cast<double>(n) * test_fraction));
  n_test = std::clamp<std::size_t>(n_test, 1, n - 1);

  std::vector<std::size_t> order = random_permutation(n, seed);
  std::vector<std::size_t> test(order.begin(), order.begin() + n_test);
  std::vector<std::size_t> train(order.begin() + n_test, order.end());
  std::sort(test.begin(), test.end());
  std::sort(train.begin(), train.end());
  return {data.select(train), data.select(test)};
}

Dataset leave_out_resample(const Dataset& data, double fraction,
                           std::uint64_t seed) {
  if (!(fraction >= 0.0 && fraction < 1.0)) {
    throw PreconditionError("leave_out_resample: fraction must lie in [0, 1)");
  }
  const std::size_t n = data.size();
  const auto n_remove = static_cast<std::size_t>(
      std::floor(static_cast<double>(n) * fraction + 1e-9));
  if (n_remove == 0) return data;

  // Partial Fisher-Yates: the first n_remove slots are the removed rows.
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  Rng rng(seed);
  for (std::size_t i = 0; i < n_remove; ++i) {
    const std::size_t j = i + rng.uniform_index(n - i);
    std::swap(order[i], order[j]);
  }
  std::vector<bool> removed(n, false);
  for (std::size_t i = 0; i < n_remove; ++i) removed[order[i]] = true;
  std::vector<std::size_t> keep;
  keep.reserve(n - n_remove);
  for (std::size_t i = 0; i < n; ++i) {
    if (!removed[i]) keep.push_back(i);
  }
  return data.select(keep);
}

Dataset make_moons(std::size_t n, double noise_std, std::uint64_t seed) {
  if (!(noise_std >= 0.0)) {
    throw PreconditionError("make_moons: noise_std must be non-negative");
  }
  const std::size_t n_outer = n / 2;
  const std::size_t n_inner = n - n_outer;
  const auto angle = [](std::size_t i, std::size_t count) {
    return count > 1 ? std::numbers::pi * static_cast<double>(i) /
                           static_cast<double>(count - 1)
                     : 0.0;
  };

  PointMatrix raw(n, 2);
  std::vector<int> labels(n);
  for (std::size_t i = 0; i < n_outer; ++i) {
    const double t = angle(i, n_outer);
    raw(i, 0) = std::cos(t);
    raw(i, 1) = std::sin(t);
    labels[i] = 0;
  }
  for (std::size_t i = 0; i < n_inner; ++i) {
    const double t = angle(i, n_inner);
    raw(n_outer + i, 0) = 1.0 - std::cos(t);
    raw(n_outer + i, 1) = 0.5 - std::sin(t);
    labels[n_outer + i] = 1;
  }

  Rng rng(seed);
  if (noise_std > 0.0) {
    for (std::size_t i = 0; i < n; ++i) {
      raw(i, 0) += noise_std * rng.gaussian();
      raw(i, 1) += noise_std * rng.gaussian();
    }
  }
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  rng.shuffle(order);

  std::vector<ColumnMeta> columns(2);
  columns[0].name = "x1";
  columns[1].name = "x2";
  Dataset shuffled = Dataset(std::move(raw), std::move(labels),
                             std::move(columns))
                         .select(order);
  return normalize_minmax(shuffled).first;
}

}  // namespace trex
