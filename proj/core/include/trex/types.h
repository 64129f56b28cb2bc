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

#ifndef TREX_TYPES_H_
#define TREX_TYPES_H_

#include <string_view>

#include <Eigen/Core>

namespace trex {

using Vector = Eigen::VectorXd;

// One point per row.
using PointMatrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

enum class Norm { kL1, kL2 };

std::string_view norm_name(Norm norm);
Norm parse_norm(std::string_view name);

inline double distance(const Eigen::Ref<const Vector>& a,
                       const Eigen::Ref<const Vector>& b, Norm norm) {
  return norm == Norm::kL1 ? (a - b).lpNorm<1>() : (a - b).norm();
}

}  // namespace trex

#endif  // TREX_TYPES_H_
