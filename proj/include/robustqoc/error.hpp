// Copyright 2026 The robustqoc Authors
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

#pragma once

#include <stdexcept>
#include <string>

namespace robustqoc {

/// Base of every error thrown by the library; kind() is a stable machine-readable tag.
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& what) : std::runtime_error(what), kind_(std::move(kind)) {}
  const std::string& kind() const { return kind_; }

 private:
  std::string kind_;
};

struct DimensionError : Error {
  explicit DimensionError(const std::string& w) : Error("dimension_mismatch", w) {}
};

struct DomainError : Error {
  explicit DomainError(const std::string& w) : Error("domain_error", w) {}
};

struct NumericalError : Error {
  explicit NumericalError(const std::string& w) : Error("numerical_error", w) {}
};

/// Time step too coarse for the Hamiltonian scale.
struct GridAccuracyError : Error {
  explicit GridAccuracyError(const std::string& w) : Error("grid_accuracy", w) {}
};

/// Density-matrix invariants broken during master-equation integration.
struct IntegrationError : Error {
  explicit IntegrationError(const std::string& w) : Error("integration_accuracy", w) {}
};

struct ConfigError : Error {
  explicit ConfigError(const std::string& w) : Error("config_error", w) {}
};

struct IoError : Error {
  explicit IoError(const std::string& w) : Error("io_error", w) {}
};

struct OptimizationError : Error {
  explicit OptimizationError(const std::string& w) : Error("optimization_failure", w) {}
};

}  // namespace robustqoc
