// Copyright 2026 The a2w Authors.
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

// Central finite-difference checks of analytic gradients.

#ifndef A2W_GRADCHECK_HPP_
#define A2W_GRADCHECK_HPP_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>

#include "a2w/graph.hpp"
#include "a2w/parameters.hpp"

namespace a2w {

struct GradCheckReport {
  std::size_t checked = 0;
  double max_rel_error = 0.0;
  std::string worst;  // "name[index]" of the largest error
  double worst_analytic = 0.0;
  double worst_numeric = 0.0;

  bool passed(double tolerance) const { return max_rel_error < tolerance; }
};

/// Relative error |a - n| / max(|a|, |n|, floor). The floor keeps entries
/// whose true gradient is zero from dividing round-off by round-off.
double relative_error(double analytic, double numeric, double floor = 1e-5);

/// `build` records the loss on the graph it is given. Every entry of every
/// parameter is perturbed by +-step and compared with backward().
GradCheckReport check_gradients(const ParameterList& params,
                                const std::function<Var(Graph&)>& build,
                                double step = 1e-5);

/// Tiny joint model (2 encoder layers, hidden 8, 20 words) on one toy
/// utterance with label smoothing on and dropout and sampling off.
GradCheckReport gradcheck_joint_model(std::uint64_t seed);

/// Tiny two-layer LM over a short token window with carried-in state.
GradCheckReport gradcheck_language_model(std::uint64_t seed);

}  // namespace a2w

#endif  // A2W_GRADCHECK_HPP_
