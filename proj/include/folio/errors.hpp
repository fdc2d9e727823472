// Copyright 2026 The Folio Authors
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

#include <cstdio>
#include <stdexcept>
#include <string>

namespace folio {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Shapes or indices that do not fit together (bad input, not bad math).
class StructuralError : public Error {
 public:
  using Error::Error;
};

/// Argument outside the mathematical domain of an operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Source and target masses differ beyond tolerance.
class UnbalancedError : public Error {
 public:
  using Error::Error;
};

/// Partition with an empty or out-of-range class.
class PartitionError : public Error {
 public:
  using Error::Error;
};

/// Operation requires a geometry (interval, circle, ...) the space lacks.
class GeometryError : public Error {
 public:
  using Error::Error;
};

class GenerationError : public Error {
 public:
  using Error::Error;
};

/// Iterative method stopped before reaching its tolerance.
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, double residual)
      : Error(what + " (residual " + format(residual) + ")"),
        residual_(residual) {}
  double residual() const noexcept { return residual_; }

 private:
  static std::string format(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3e", x);
    return buf;
  }
  double residual_;
};

/// Kernel graph disconnected at the requested bandwidth.
class BandwidthError : public Error {
 public:
  BandwidthError(const std::string& what, double suggested)
      : Error(what), suggested_(suggested) {}
  /// Smallest bandwidth at which the graph would be connected.
  double suggested_bandwidth() const noexcept { return suggested_; }

 private:
  double suggested_;
};

/// Non-convex optimizer stagnated on every restart.
class OptimizationError : public Error {
 public:
  using Error::Error;
};

/// Time stepping produced negative densities.
class StabilityError : public Error {
 public:
  using Error::Error;
};

}  // namespace folio
