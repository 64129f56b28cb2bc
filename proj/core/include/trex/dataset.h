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

#ifndef TREX_DATASET_H_
#define TREX_DATASET_H_

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "trex/types.h"

namespace trex {

enum class ColumnKind {
  kNumeric,
  // Integer category codes into ColumnMeta::categories; must be one-hot
  // encoded before normalization or training.
  kCategorical,
  // Indicator column produced by one_hot_encode.
  kOneHot,
};

struct ColumnMeta {
  std::string name;
  ColumnKind kind = ColumnKind::kNumeric;
  // Range of the raw values this column was derived from. Normalization keeps
  // these so scaled values can be mapped back.
  double original_min = 0.0;
  double original_max = 1.0;
  // kCategorical: sorted category labels. kOneHot: unused.
  std::vector<std::string> categories;
  // kOneHot: source column name and the category this indicator stands for.
  std::string group;
  std::string category;
};

// A feature matrix with binary labels. Immutable after construction.
class Dataset {
 public:
  Dataset() = default;
  Dataset(PointMatrix features, std::vector<int> labels,
          std::vector<ColumnMeta> columns);

  std::size_t size() const { return labels_.size(); }
  std::size_t dim() const { return columns_.size(); }
  bool empty() const { return labels_.empty(); }

  const PointMatrix& features() const { return features_; }
  const std::vector<int>& labels() const { return labels_; }
  const std::vector<ColumnMeta>& columns() const { return columns_; }

  Vector row(std::size_t i) const { return features_.row(i).transpose(); }
  int label(std::size_t i) const { return labels_[i]; }

  // Rows in the given order.
  Dataset select(const std::vector<std::size_t>& rows) const;

 private:
  PointMatrix features_;
  std::vector<int> labels_;
  std::vector<ColumnMeta> columns_;
};

enum class CsvColumnKind { kNumeric, kCategorical, kLabel };

struct CsvColumn {
  std::string name;
  CsvColumnKind kind = CsvColumnKind::kNumeric;
};

// Expected header of a CSV file, in file order. Exactly one label column.
struct CsvSchema {
  std::vector<CsvColumn> columns;
};

// Comma-separated, header row required, '.' decimal point, no quoting.
// Rows are reported by 1-based file line (the header is line 1).
Dataset load_csv(const std::filesystem::path& path, const CsvSchema& schema);
Dataset parse_csv(std::istream& in, const CsvSchema& schema);

// Writes features then a trailing "label" column; reals in shortest exact form.
void write_csv(std::ostream& out, const Dataset& data);

// Per-column min/max affine map onto [0, 1]. A constant column maps to 0.
class Scaler {
 public:
  Scaler() = default;
  Scaler(Vector mins, Vector maxs);

  static Scaler fit(const Dataset& data);

  const Vector& mins() const { return mins_; }
  const Vector& maxs() const { return maxs_; }

  // Values outside the fitted range are not clipped.
  Vector transform(const Vector& x) const;
  Vector inverse_transform(const Vector& x) const;
  Dataset transform(const Dataset& data) const;

 private:
  Vector mins_;
  Vector maxs_;
};

// Rejects datasets that still contain kCategorical columns.
std::pair<Dataset, Scaler> normalize_minmax(const Dataset& data);

// Expands each named kCategorical column into one indicator column per
// category (sorted order), in place of the original column.
Dataset one_hot_encode(const Dataset& data,
                       const std::vector<std::string>& categorical_columns);

// Seeded shuffle then cut. The test part holds round(n * test_fraction) rows,
// clamped so both parts are non-empty; each part keeps ascending row order.
std::pair<Dataset, Dataset> split(const Dataset& data, double test_fraction,
                                  std::uint64_t seed);

// Removes floor(fraction * n) rows chosen uniformly without replacement.
Dataset leave_out_resample(const Dataset& data, double fraction,
                           std::uint64_t seed);

// Two interleaving half circles: label 0 on (cos t, sin t), label 1 on
// (1 - cos t, 0.5 - sin t), t in [0, pi], plus isotropic Gaussian noise,
// shuffled, then min-max normalized to [0, 1]^2. Column metadata keeps the
// raw range.
Dataset make_moons(std::size_t n, double noise_std, std::uint64_t seed);

}  // namespace trex

#endif  // TREX_DATASET_H_
