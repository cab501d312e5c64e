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

#ifndef A2W_ERRORS_HPP_
#define A2W_ERRORS_HPP_

#include <stdexcept>
#include <string>

namespace a2w {

/// Shape disagreement between operands (matmul, add, attention lengths...).
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Argument outside an operation's mathematical domain (log of x <= 0).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Invalid configuration: even kernel width, beam of zero, bad flags.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or inconsistent input data (files, corpora, checkpoints).
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A loss or parameter became non-finite during optimization.
class NumericDivergence : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Violated calling contract (non-scalar loss passed to backward, ...).
class ContractError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace a2w

#endif  // A2W_ERRORS_HPP_
