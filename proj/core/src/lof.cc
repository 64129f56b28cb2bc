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

#include "trex/lof.h"

#include <algorithm>
#include <numeric>
#include <string>

#include "trex/errors.h"

namespace trex {

namespace {
constexpr double kDuplicateTolerance = 1e-12;
}  // namespace

LofIndex::Neighborhood LofIndex::nearest(const Eigen::Ref<const Vector>& x,
                                         std::size_t exclude) const {
  const std::size_t n = size();
  std::vector<double> dist(n);
  std::vector<std::size_t> order;
  order.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    dist[i] = (reference_.row(i).transpose() - x).norm();
    if (i != exclude) order.push_back(i);
  }
  const auto kk = static_cast<std::size_t>(k_);
  const auto closer = [&](std::size_t a, std::size_t b) {
    return dist[a] < dist[b] || (dist[a] == dist[b] && a < b);
  };
  std::partial_sort(order.begin(), order.begin() + kk, order.end(), closer);
  Neighborhood out;
  out.rows.assign(order.begin(), order.begin() + kk);
  for (const std::size_t r : out.rows) out.distances.push_back(dist[r]);
  return out;
}

LofIndex LofIndex::build(const PointMatrix& reference, int k) {
  const auto n = static_cast<std::size_t>(reference.rows());
  if (k < 1 || static_cast<std::size_t>(k) >= n) {
    throw PreconditionError("LofIndex: need 1 <= k < n (k=" + std::to_string(k) +
                            ", n=" + std::to_string(n) + ")");
  }
  if (!reference.allFinite()) {
    throw PreconditionError("LofIndex: reference points must be finite");
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if ((reference.row(i) - reference.row(j)).norm() <= kDuplicateTolerance) {
        throw PreconditionError("LofIndex: rows " + std::to_string(i) + " and " +
                                std::to_string(j) + " are duplicates");
      }
    }
  }

  LofIndex index;
  index.k_ = k;
  index.reference_ = reference;
  index.neighbors_.resize(n);
  index.k_distance_.resize(n);
  std::vector<std::vector<double>> neighbor_dist(n);
  for (std::size_t i = 0; i < n; ++i) {
    Neighborhood nb = index.nearest(reference.row(i).transpose(), i);
    index.k_distance_[i] = nb.distances.back();
    index.neighbors_[i] = std::move(nb.rows);
    neighbor_dist[i] = std::move(nb.distances);
  }
  index.lrd_.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    double reach = 0.0;
    for (std::size_t j = 0; j < index.neighbors_[i].size(); ++j) {
      reach += std::max(neighbor_dist[i][j],
                        index.k_distance_[index.neighbors_[i][j]]);
    }
    index.lrd_[i] = static_cast<double>(k) / reach;
  }
  return index;
}

double LofIndex::score(const Eigen::Ref<const Vector>& x) const {
  if (x.size() != reference_.cols()) {
    throw PreconditionError("LofIndex::score: dimension mismatch");
  }
  if (!x.allFinite()) {
    throw PreconditionError("LofIndex::score: query must be finite");
  }
  std::size_t self = size();
  for (std::size_t i = 0; i < size(); ++i) {
    if ((reference_.row(i).transpose() - x).norm() <= kDuplicateTolerance) {
      self = i;
      break;
    }
  }
  const Neighborhood nb = nearest(x, self);
  double reach = 0.0;
  double lrd_sum = 0.0;
  for (std::size_t j = 0; j < nb.rows.size(); ++j) {
    reach += std::max(nb.distances[j], k_distance_[nb.rows[j]]);
    lrd_sum += lrd_[nb.rows[j]];
  }
  if (!(reach > 0.0)) {
    throw NumericalError(
        "LofIndex::score: reachability distances sum to zero");
  }
  const double count = static_cast<double>(nb.rows.size());
  const double lrd_x = count / reach;
  return (lrd_sum / count) / lrd_x;
}

int LofIndex::predict(const Eigen::Ref<const Vector>& x,
                      double threshold) const {
  if (!(threshold > 1.0)) {
    throw PreconditionError("LofIndex::predict: threshold must be > 1");
  }
  return score(x) > threshold ? -1 : 1;
}

}  // namespace trex
