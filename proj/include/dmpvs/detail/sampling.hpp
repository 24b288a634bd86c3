// Copyright 2026 The dmpvs Authors
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

#ifndef DMPVS_DETAIL_SAMPLING_HPP_
#define DMPVS_DETAIL_SAMPLING_HPP_

#include <cmath>
#include <random>

namespace dmpvs {

template <class Rng>
VectorX SampleBall(Rng& rng, int dim, double radius) {
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  VectorX d(dim);
  for (int i = 0; i < dim; ++i) d(i) = normal(rng);
  const double n = d.norm();
  if (n == 0.0) return VectorX::Zero(dim);
  return d * (radius * std::pow(uniform(rng), 1.0 / dim) / n);
}

template <class Rng>
Vector6 SampleBall6(Rng& rng, double radius) {
  return SampleBall(rng, 6, radius);
}

}  // namespace dmpvs

#endif  // DMPVS_DETAIL_SAMPLING_HPP_
