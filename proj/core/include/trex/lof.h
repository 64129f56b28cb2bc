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

#ifndef TREX_LOF_H_
#define TREX_LOF_H_

#include <vector>

#include "trex/types.h"

namespace trex {

inline constexpr int kDefaultLofNeighbors = 20;
inline constexpr double kDefaultLofThreshold = 1.5;

// Exact Local Outlier Factor over a fixed reference set with Euclidean
// distance.
//
// Every reference point keeps exactly k neighbors; ties in distance go to the
// lower row index. A query that coincides with a reference row (within 1e-12)
// is scored as that row, i.e. the row is excluded from its own neighborhood.
class LofIndex {
 public:
  // Requires 1 <= k < n and no two rows within 1e-12 of each other.
  static LofIndex build(const PointMatrix& reference, int k);

  int k() const { return k_; }
  std::size_t size() const { return static_cast<std::size_t>(reference_.rows()); }
  const PointMatrix& reference() const { return reference_; }

  const std::vector<std::size_t>& neighbors(std::size_t row) const {
    return neighbors_[row];
  }
  double k_distance(std::size_t row) const { return k_distance_[row]; }
  double local_reachability_density(std::size_t row) const { return lrd_[row]; }

  // LOF(x) = mean over neighbors o of lrd(o) / lrd(x).
  double score(const Eigen::Ref<const Vector>& x) const;
  // -1 when score > threshold, +1 otherwise. threshold must exceed 1.
  int predict(const Eigen::Ref<const Vector>& x,
              double threshold = kDefaultLofThreshold) const;

 private:
  struct Neighborhood {
    std::vector<std::size_t> rows;
    std::vector<double> distances;
  };
  // k nearest rows to x, skipping `exclude` (size() for none).
  Neighborhood nearest(const Eigen::Ref<const Vector>& x,
                       std::size_t exclude) const;

  int k_ = 0;
  PointMatrix reference_;
  std::vector<std::vector<std::size_t>> neighbors_;
  std::vector<double> k_distance_;
  std::vector<double> lrd_;
};

}  // namespace trex

#endif  // TREX_LOF_H_
