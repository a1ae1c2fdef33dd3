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

#include <sdci/io/ensemble_store.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include <sdci/errors.hpp>
#include <sdci/io/csv.hpp>

namespace sdci::io {

namespace {

std::string window_file(int window) {
  char buffer[32];
  std::snprintf(buffer, sizeof buffer, "window_%04d.csv", window);
  return buffer;
}

std::vector<std::string> column_names(const std::string& prefix, Eigen::Index count) {
  std::vector<std::string> out;
  out.reserve(static_cast<std::size_t>(count));
  for (Eigen::Index j = 0; j < count; ++j) {
    out.push_back(prefix + std::to_string(j));
  }
  return out;
}

nlohmann::json numbers(const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

Eigen::VectorXd vector_of(const nlohmann::json& j) {
  const auto values = j.get<std::vector<double>>();
  return Eigen::Map<const Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size()));
}

bool same_time(double a, double b) { return std::abs(a - b) <= 1e-9 * std::max(1.0, std::abs(a)); }

}  // namespace

void EnsembleStore::validate() const {
  if (parameters.rows() < 1 || parameters.cols() < 1) {
    throw DimensionMismatch("ensemble store has no parameter samples");
  }
  if (static_cast<Eigen::Index>(parameter_names.size()) != parameters.cols()) {
    throw DimensionMismatch("ensemble store parameter names do not match the parameter columns");
  }
  for (std::size_t w = 0; w < windows.size(); ++w) {
    const StoreWindow& sw = windows[w];
    const Eigen::Index n = sw.simulated.cols();
    if (sw.simulated.rows() != parameters.rows()) {
      throw DimensionMismatch("window " + std::to_string(sw.window) + " has " + std::to_string(sw.simulated.rows()) +
                              " rows for " + std::to_string(parameters.rows()) + " parameter samples");
    }
    if (sw.times.size() != n || sw.sigmas.size() != n || static_cast<Eigen::Index>(sw.sensor_ids.size()) != n) {
      throw DimensionMismatch("window " + std::to_string(sw.window) + " column metadata does not match its columns");
    }
    if (!(sw.sigmas.array() > 0.0).all()) {
      throw DimensionMismatch("window " + std::to_string(sw.window) + " has a nonpositive sigma");
    }
    if (w > 0 && sw.window <= windows[w - 1].window) {
      throw DimensionMismatch("store windows must be strictly increasing");
    }
  }
}

const StoreWindow& EnsembleStore::window(int index) const {
  for (const auto& w : windows) {
    if (w.window == index) {
      return w;
    }
  }
  throw SimulationFailure("ensemble store holds no window " + std::to_string(index));
}

void write_ensemble_store(const std::filesystem::path& directory, const EnsembleStore& store) {
  store.validate();
  std::filesystem::create_directories(directory);
  write_matrix_csv(directory / "parameters.csv", store.parameter_names, store.parameters);
  nlohmann::json windows = nlohmann::json::array();
  for (const auto& w : store.windows) {
    const std::string file = window_file(w.window);
    write_matrix_csv(directory / file, column_names("m", w.simulated.cols()), w.simulated);
    windows.push_back({{"window", w.window},
                       {"file", file},
                       {"times", numbers(w.times)},
                       {"sigmas", numbers(w.sigmas)},
                       {"sensors", w.sensor_ids}});
  }
  const nlohmann::json manifest{{"format", "sdci-ensemble"},
                                {"version", 1},
                                {"parameters", "parameters.csv"},
                                {"windows", std::move(windows)}};
  std::ofstream out{directory / "manifest.json", std::ios::binary | std::ios::trunc};
  if (!out) {
    throw IoError("cannot write " + (directory / "manifest.json").string());
  }
  out << manifest.dump(1) << '\n';
  if (!out) {
    throw IoError("write failed: " + (directory / "manifest.json").string());
  }
}

EnsembleStore read_ensemble_store(const std::filesystem::path& directory) {
  const auto manifest_path = directory / "manifest.json";
  std::ifstream in{manifest_path};
  if (!in) {
    throw IoError("cannot open " + manifest_path.string());
  }
  std::ostringstream text;
  text << in.rdbuf();
  EnsembleStore store;
  try {
    const nlohmann::json manifest = nlohmann::json::parse(text.str());
    if (manifest.at("format").get<std::string>() != "sdci-ensemble" || manifest.at("version").get<int>() != 1) {
      throw IoError(manifest_path.string() + " is not a version-1 ensemble manifest");
    }
    store.parameters = read_matrix_csv(directory / manifest.at("parameters").get<std::string>(),
                                       &store.parameter_names);
    for (const auto& w : manifest.at("windows")) {
      StoreWindow sw;
      sw.window = w.at("window").get<int>();
      sw.times = vector_of(w.at("times"));
      sw.sigmas = vector_of(w.at("sigmas"));
      sw.sensor_ids = w.at("sensors").get<std::vector<std::string>>();
      sw.simulated = read_matrix_csv(directory / w.at("file").get<std::string>());
      store.windows.push_back(std::move(sw));
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(1, manifest_path.string() + ": " + e.what());
  }
  store.validate();
  return store;
}

EnsembleStore simulate_store(const Eigen::MatrixXd& parameters, ForwardModel& model,
                             const std::vector<DataPacket>& packets) {
  EnsembleStore store;
  store.parameters = parameters;
  store.parameter_names = column_names("p", parameters.cols());
  const Eigen::VectorXd mean = parameters.colwise().mean().transpose();
  for (const auto& packet : packets) {
    validate_packet(packet);
    StoreWindow sw{packet.window_index, packet.times, packet.sigmas, packet.sensor_ids,
                   model.simulate(parameters, packet)};
    store.windows.push_back(std::move(sw));
    model.advance(mean, packet);
  }
  store.validate();
  return store;
}

OfflineModel::OfflineModel(EnsembleStore store) : store_{std::move(store)} {
  store_.validate();
  for (Eigen::Index i = 0; i < store_.parameters.rows(); ++i) {
    std::vector<double> key(static_cast<std::size_t>(store_.parameters.cols()));
    for (Eigen::Index j = 0; j < store_.parameters.cols(); ++j) {
      key[static_cast<std::size_t>(j)] = store_.parameters(i, j);
    }
    rows_.emplace(std::move(key), i);
  }
}

Eigen::MatrixXd OfflineModel::simulate(const Eigen::MatrixXd& samples, const DataPacket& packet) {
  const StoreWindow& sw = store_.window(packet.window_index);
  std::vector<Eigen::Index> columns(static_cast<std::size_t>(packet.size()));
  for (Eigen::Index j = 0; j < packet.size(); ++j) {
    Eigen::Index found = -1;
    for (Eigen::Index c = 0; c < sw.simulated.cols(); ++c) {
      if (sw.sensor_ids[static_cast<std::size_t>(c)] == packet.sensor_ids[static_cast<std::size_t>(j)] &&
          same_time(sw.times(c), packet.times(j))) {
        found = c;
        break;
      }
    }
    if (found < 0) {
      throw SimulationFailure("ensemble store window " + std::to_string(packet.window_index) + " has no column for " +
                              packet.sensor_ids[static_cast<std::size_t>(j)] + " at t = " +
                              format_double(packet.times(j)));
    }
    columns[static_cast<std::size_t>(j)] = found;
  }
  Eigen::MatrixXd out(samples.rows(), packet.size());
  std::vector<double> key(static_cast<std::size_t>(samples.cols()));
  for (Eigen::Index i = 0; i < samples.rows(); ++i) {
    for (Eigen::Index j = 0; j < samples.cols(); ++j) {
      key[static_cast<std::size_t>(j)] = samples(i, j);
    }
    const auto it = rows_.find(key);
    if (it == rows_.end()) {
      throw SimulationFailure("sample " + std::to_string(i) + " is not part of the precomputed ensemble");
    }
    for (Eigen::Index j = 0; j < packet.size(); ++j) {
      out(i, j) = sw.simulated(it->second, columns[static_cast<std::size_t>(j)]);
    }
  }
  ++lookups_;
  return out;
}

}  // namespace sdci::io
