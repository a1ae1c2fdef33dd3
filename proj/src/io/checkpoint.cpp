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

#include <sdci/io/checkpoint.hpp>

#include <cmath>
#include <fstream>
#include <sstream>
#include <type_traits>
#include <variant>

#include <sdci/errors.hpp>
#include <sdci/random.hpp>

namespace sdci::io {

namespace {

nlohmann::json number(double x) {
  if (std::isnan(x)) {
    return "nan";
  }
  if (std::isinf(x)) {
    return x > 0 ? "inf" : "-inf";
  }
  return x;
}

double number_from(const nlohmann::json& j) {
  if (j.is_number()) {
    return j.get<double>();
  }
  const auto text = j.get<std::string>();
  if (text == "nan") {
    return std::nan("");
  }
  if (text == "inf") {
    return HUGE_VAL;
  }
  if (text == "-inf") {
    return -HUGE_VAL;
  }
  throw std::invalid_argument("not a number: " + text);
}

nlohmann::json box_json(const Box& box) { return {{"lower", to_json(box.lower)}, {"upper", to_json(box.upper)}}; }

Box box_from(const nlohmann::json& j) { return Box{vector_from_json(j.at("lower")), vector_from_json(j.at("upper"))}; }

}  // namespace

nlohmann::json to_json(const Eigen::MatrixXd& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      row.push_back(number(m(i, j)));
    }
    rows.push_back(std::move(row));
  }
  return {{"rows", m.rows()}, {"cols", m.cols()}, {"data", std::move(rows)}};
}

nlohmann::json to_json(const Eigen::VectorXd& v) {
  nlohmann::json out = nlohmann::json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    out.push_back(number(v(i)));
  }
  return out;
}

Eigen::MatrixXd matrix_from_json(const nlohmann::json& j) {
  const auto rows = j.at("rows").get<Eigen::Index>();
  const auto cols = j.at("cols").get<Eigen::Index>();
  const auto& data = j.at("data");
  if (static_cast<Eigen::Index>(data.size()) != rows) {
    throw std::invalid_argument("matrix row count mismatch");
  }
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const auto& row = data.at(static_cast<std::size_t>(i));
    if (static_cast<Eigen::Index>(row.size()) != cols) {
      throw std::invalid_argument("matrix column count mismatch");
    }
    for (Eigen::Index c = 0; c < cols; ++c) {
      m(i, c) = number_from(row.at(static_cast<std::size_t>(c)));
    }
  }
  return m;
}

Eigen::VectorXd vector_from_json(const nlohmann::json& j) {
  if (!j.is_array()) {
    throw std::invalid_argument("vector must be an array");
  }
  Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    v(static_cast<Eigen::Index>(i)) = number_from(j[i]);
  }
  return v;
}

nlohmann::json to_json(const ParameterDensity& density) {
  return std::visit(
      [](const auto& kind) -> nlohmann::json {
        using T = std::decay_t<decltype(kind)>;
        if constexpr (std::is_same_v<T, UniformBox>) {
          return {{"kind", "uniform"}, {"box", box_json(kind.box)}};
        } else if constexpr (std::is_same_v<T, GaussianDiagonal>) {
          return {{"kind", "gaussian"}, {"mean", to_json(kind.mean)}, {"variance", to_json(kind.variance)}};
        } else {
          nlohmann::json out{{"kind", "kernel"},
                             {"points", to_json(Eigen::MatrixXd{kind.estimate.points()})},
                             {"weights", to_json(Eigen::VectorXd{kind.estimate.weights()})},
                             {"bandwidths", to_json(Eigen::VectorXd{kind.estimate.bandwidths()})},
                             {"support", nullptr}};
          if (kind.support) {
            out["support"] = box_json(*kind.support);
          }
          return out;
        }
      },
      density.kind());
}

ParameterDensity density_from_json(const nlohmann::json& j) {
  const auto kind = j.at("kind").get<std::string>();
  if (kind == "uniform") {
    return UniformBox{box_from(j.at("box"))};
  }
  if (kind == "gaussian") {
    return GaussianDiagonal{vector_from_json(j.at("mean")), vector_from_json(j.at("variance"))};
  }
  if (kind == "kernel") {
    std::optional<Box> support;
    if (!j.at("support").is_null()) {
      support = box_from(j.at("support"));
    }
    return KernelDensity{DensityEstimate<double>{matrix_from_json(j.at("points")), vector_from_json(j.at("weights")),
                                                 vector_from_json(j.at("bandwidths"))},
                         std::move(support)};
  }
  throw std::invalid_argument("unknown density kind '" + kind + "'");
}

nlohmann::json to_json(const WindowRecord& record) {
  nlohmann::json attempts = nlohmann::json::array();
  for (const auto& a : record.attempts) {
    attempts.push_back({{"q", a.q},
                        {"sample_count", a.sample_count},
                        {"expected_ratio", number(a.expected_ratio)},
                        {"kl_dci", number(a.kl_dci)},
                        {"action", std::string{to_string(a.action)}},
                        {"failure", a.failure}});
  }
  return {{"window", record.window_index},
          {"q_used", record.q_used},
          {"decision", std::string{to_string(record.decision)}},
          {"mud_point", to_json(record.mud_point)},
          {"expected_ratio", number(record.expected_ratio)},
          {"kl_dci", number(record.kl_dci)},
          {"kl_dci_raw", number(record.kl_dci_raw)},
          {"eff_fraction", number(record.eff_fraction)},
          {"change_point_flag", record.change_point_flag},
          {"sample_count", record.sample_count},
          {"generation", record.generation},
          {"attempts", std::move(attempts)}};
}

WindowRecord record_from_json(const nlohmann::json& j) {
  WindowRecord r;
  r.window_index = j.at("window").get<int>();
  r.q_used = j.at("q_used").get<int>();
  r.decision = decision_from_string(j.at("decision").get<std::string>());
  r.mud_point = vector_from_json(j.at("mud_point"));
  r.expected_ratio = number_from(j.at("expected_ratio"));
  r.kl_dci = number_from(j.at("kl_dci"));
  r.kl_dci_raw = number_from(j.at("kl_dci_raw"));
  r.eff_fraction = number_from(j.at("eff_fraction"));
  r.change_point_flag = j.at("change_point_flag").get<bool>();
  r.sample_count = j.at("sample_count").get<Eigen::Index>();
  r.generation = j.at("generation").get<int>();
  for (const auto& a : j.at("attempts")) {
    r.attempts.push_back(Attempt{a.at("q").get<int>(), a.at("sample_count").get<Eigen::Index>(),
                                 number_from(a.at("expected_ratio")), number_from(a.at("kl_dci")),
                                 decision_from_string(a.at("action").get<std::string>()),
                                 a.at("failure").get<std::string>()});
  }
  return r;
}

nlohmann::json to_json(const EngineState& state) {
  nlohmann::json out{{"ensemble",
                      {{"samples", to_json(state.ensemble.samples)},
                       {"weights", to_json(state.ensemble.weights)},
                       {"generation", state.ensemble.generation},
                       {"rng_seed", state.ensemble.rng_seed}}},
                     {"base_density", to_json(state.base_density)},
                     {"rng", serialize_rng(state.rng)},
                     {"last_window", state.last_window},
                     {"last_estimate", nullptr}};
  if (state.last_estimate) {
    out["last_estimate"] = to_json(*state.last_estimate);
  }
  return out;
}

EngineState state_from_json(const nlohmann::json& j) {
  const auto& e = j.at("ensemble");
  ParameterEnsemble ensemble{matrix_from_json(e.at("samples")), vector_from_json(e.at("weights")),
                             e.at("generation").get<int>(), e.at("rng_seed").get<std::uint64_t>()};
  std::optional<Eigen::VectorXd> last;
  if (!j.at("last_estimate").is_null()) {
    last = vector_from_json(j.at("last_estimate"));
  }
  return EngineState{std::move(ensemble), density_from_json(j.at("base_density")),
                     deserialize_rng(j.at("rng").get<std::string>()), j.at("last_window").get<int>(), std::move(last)};
}

std::string checkpoint_text(const Checkpoint& checkpoint) {
  nlohmann::json records = nlohmann::json::array();
  for (const auto& r : checkpoint.records) {
    records.push_back(to_json(r));
  }
  const nlohmann::json doc{{"format", "sdci-checkpoint"},
                           {"version", kCheckpointVersion},
                           {"fingerprint", checkpoint.fingerprint},
                           {"engine", to_json(checkpoint.state)},
                           {"model", checkpoint.model_state},
                           {"records", std::move(records)}};
  return doc.dump(1) + "\n";
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& checkpoint) {
  const std::string text = checkpoint_text(checkpoint);
  std::filesystem::path temp = path;
  temp += ".tmp";
  {
    std::ofstream out{temp, std::ios::binary | std::ios::trunc};
    if (!out) {
      throw IoError("cannot write checkpoint " + temp.string());
    }
    out << text;
    out.flush();
    if (!out) {
      throw IoError("checkpoint write failed: " + temp.string());
    }
  }
  std::error_code ec;
  std::filesystem::rename(temp, path, ec);
  if (ec) {
    throw IoError("cannot move checkpoint into place: " + ec.message());
  }
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in{path, std::ios::binary};
  if (!in) {
    throw IoError("cannot open checkpoint " + path.string());
  }
  std::ostringstream buffer;
  buffer << in.rdbuf();
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(buffer.str());
  } catch (const nlohmann::json::parse_error& e) {
    throw IncompatibleCheckpoint(path.string() + " is not a complete checkpoint: " + e.what());
  }
  try {
    if (doc.at("format").get<std::string>() != "sdci-checkpoint") {
      throw IncompatibleCheckpoint(path.string() + " is not an sdci checkpoint");
    }
    const int version = doc.at("version").get<int>();
    if (version != kCheckpointVersion) {
      throw IncompatibleCheckpoint("checkpoint version " + std::to_string(version) + " is not supported (expected " +
                                   std::to_string(kCheckpointVersion) + ")");
    }
    Checkpoint out{state_from_json(doc.at("engine")), doc.at("model"), {}, doc.at("fingerprint").get<std::string>()};
    for (const auto& r : doc.at("records")) {
      out.records.push_back(record_from_json(r));
    }
    return out;
  } catch (const IncompatibleCheckpoint&) {
    throw;
  } catch (const std::exception& e) {
    throw IncompatibleCheckpoint(path.string() + ": " + e.what());
  }
}

}  // namespace sdci::io
