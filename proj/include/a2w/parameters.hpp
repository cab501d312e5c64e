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

#ifndef A2W_PARAMETERS_HPP_
#define A2W_PARAMETERS_HPP_

#include <string>
#include <vector>

#include "a2w/tensor.hpp"

namespace a2w {

/// Non-owning reference to a trainable tensor, keyed by a stable name used
/// in checkpoints.
struct NamedTensor {
  std::string name;
  Tensor* tensor;
};

using ParameterList = std::vector<NamedTensor>;

inline void append_prefixed(ParameterList& out, const std::string& prefix,
                            const ParameterList& in) {
  for (const auto& p : in) out.push_back({prefix + p.name, p.tensor});
}

inline void zero_grads(const ParameterList& params) {
  for (const auto& p : params) {
    p.tensor->enable_grad();
    p.tensor->zero_grad();
  }
}

inline std::size_t parameter_count(const ParameterList& params) {
  std::size_t n = 0;
  for (const auto& p : params) n += p.tensor->size();
  return n;
}

}  // namespace a2w

#endif  // A2W_PARAMETERS_HPP_
