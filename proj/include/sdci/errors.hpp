// Copyright 2026 The sdci Authors.
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

#ifndef SDCI_ERRORS_HPP
#define SDCI_ERRORS_HPP

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

/**
 * \file
 * \brief Exception hierarchy shared by every sdci module.
 *
 * Precondition violations (wrong sizes, negative weights, ...) are reported with
 * std::invalid_argument. Everything below derives from sdci::Error and names a
 * failure mode that callers are expected to handle.
 */

namespace sdci {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A KDE axis has zero weighted variance.
class DegenerateDimension : public Error {
 public:
  explicit DegenerateDimension(std::size_t axis)
      : Error("degenerate dimension: axis " + std::to_string(axis) + " has zero weighted variance"), axis_{axis} {}
  [[nodiscard]] std::size_t axis() const noexcept { return axis_; }

 private:
  std::size_t axis_;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

/// The predicted density underflowed at samples where the observed density is not negligible.
class PredictedUnderflow : public Error {
 public:
  explicit PredictedUnderflow(std::vector<std::size_t> indices)
      : Error("predicted density underflow at " + std::to_string(indices.size()) + " sample(s)"),
        indices_{std::move(indices)} {}
  [[nodiscard]] const std::vector<std::size_t>& indices() const noexcept { return indices_; }

 private:
  std::vector<std::size_t> indices_;
};

class InvalidNoiseModel : public Error {
 public:
  using Error::Error;
};

class RankDeficient : public Error {
 public:
  RankDeficient(std::size_t requested, std::size_t achievable)
      : Error("requested " + std::to_string(requested) + " components but achievable rank is " +
              std::to_string(achievable)),
        achievable_{achievable} {}
  [[nodiscard]] std::size_t achievable() const noexcept { return achievable_; }

 private:
  std::size_t achievable_;
};

class SingularPrediction : public Error {
 public:
  using Error::Error;
};

class WeightCollapse : public Error {
 public:
  using Error::Error;
};

class SimulationFailure : public Error {
 public:
  using Error::Error;
};

class ProtocolViolation : public Error {
 public:
  using Error::Error;
};

class IntegrationFailure : public Error {
 public:
  using Error::Error;
};

class SolverFailure : public Error {
 public:
  using Error::Error;
};

class InvalidSensor : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : Error("line " + std::to_string(line) + ": " + what), line_{line} {}
  [[nodiscard]] std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class IoError : public Error {
 public:
  using Error::Error;
};

class IncompatibleCheckpoint : public Error {
 public:
  using Error::Error;
};

/// Experiment configuration problem; the message starts with the offending field path.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace sdci

#endif
