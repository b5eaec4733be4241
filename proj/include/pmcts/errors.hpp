// Copyright 2026 The PMCTS Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef PMCTS_ERRORS_HPP_
#define PMCTS_ERRORS_HPP_

#include <stdexcept>
#include <string>

namespace pmcts {

// Bad or unknown configuration (names, keys). The CLI maps this to exit 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A value violates a documented precondition.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class RangeError : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

// The model cannot be enumerated (required by the exact solvers).
class CapabilityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Iterative solver hit its iteration cap without meeting tolerance.
class DivergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A proposal assigned zero probability to an action that was sampled, i.e.
// the proposal is not absolutely continuous w.r.t. the target.
class ImportanceSupportError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// The search produced nothing to act on (e.g. no visited root action).
class SearchFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Arena capacity exceeded. Unreachable unless the engine has a bug.
class InternalError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Rating fit cannot be computed (e.g. disconnected match graph).
class EstimationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace pmcts

#endif  // PMCTS_ERRORS_HPP_
