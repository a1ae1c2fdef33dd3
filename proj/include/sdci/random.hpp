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

#ifndef SDCI_RANDOM_HPP
#define SDCI_RANDOM_HPP

#include <cstdint>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>

namespace sdci {

using Rng = std::mt19937_64;

// Distribution objects are created per draw so that the engine state alone
// determines the stream (std::normal_distribution caches a second variate).

template <typename Scalar = double>
Scalar standard_normal(Rng& rng) {
  return static_cast<Scalar>(std::normal_distribution<double>{0.0, 1.0}(rng));
}

template <typename Scalar = double>
Scalar uniform(Rng& rng, Scalar lower, Scalar upper) {
  return static_cast<Scalar>(
      std::uniform_real_distribution<double>{static_cast<double>(lower), static_cast<double>(upper)}(rng));
}

inline std::string serialize_rng(const Rng& rng) {
  std::ostringstream out;
  out << rng;
  return out.str();
}

inline Rng deserialize_rng(const std::string& text) {
  Rng rng;
  std::istringstream in{text};
  in >> rng;
  if (in.fail()) {
    throw std::invalid_argument("malformed random engine state");
  }
  return rng;
}

}  // namespace sdci

#endif
