// Copyright 2026 The covlab Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef COVLAB_ERRORS_HPP
#define COVLAB_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace covlab {

/// Invalid configuration: lattice sizes, CFL, tolerances, schema.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An operation was called outside its domain (bad operands, failed precondition).
class DomainError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A numerical construction failed; carries a human-readable diagnostic.
class DiagnosticError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Transported generators disagree with the target's Gram data.
class CovarianceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace covlab

#endif  // COVLAB_ERRORS_HPP
