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

#include <sdci/experiment/config.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <stdexcept>

#include <sdci/errors.hpp>

namespace sdci::experiment {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& what) { throw ConfigError(path + ": " + what); }

std::string join(const std::string& prefix, const std::string& key) {
  return prefix.empty() ? key : prefix + "." + key;
}

const json& field(const json& object, const std::string& key, const std::string& prefix) {
  const auto it = object.find(key);
  if (it == object.end()) {
    fail(join(prefix, key), "missing");
  }
  return *it;
}

double number(const json& object, const std::string& key, const std::string& prefix) {
  const json& value = field(object, key, prefix);
  if (!value.is_number()) {
    fail(join(prefix, key), "expected a number");
  }
  const double x = value.get<double>();
  if (!std::isfinite(x)) {
    fail(join(prefix, key), "must be finite");
  }
  return x;
}

double positive(const json& object, const std::string& key, const std::string& prefix) {
  const double x = number(object, key, prefix);
  if (!(x > 0.0)) {
    fail(join(prefix, key), "must be positive");
  }
  return x;
}

long long integer(const json& object, const std::string& key, const std::string& prefix) {
  const json& value = field(object, key, prefix);
  if (!value.is_number_integer()) {
    fail(join(prefix, key), "expected an integer");
  }
  return value.get<long long>();
}

int bounded_int(const json& object, const std::string& key, const std::string& prefix, long long lo, long long hi) {
  const long long v = integer(object, key, prefix);
  if (v < lo || v > hi) {
    fail(join(prefix, key), "must lie in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
  }
  return static_cast<int>(v);
}

std::uint64_t seed(const json& object, const std::string& key, const std::string& prefix) {
  const json& value = field(object, key, prefix);
  if (!value.is_number_integer() || (value.is_number_integer() && !value.is_number_unsigned() &&
                                     value.get<long long>() < 0)) {
    fail(join(prefix, key), "expected a nonnegative integer");
  }
  return value.get<std::uint64_t>();
}

bool boolean(const json& object, const std::string& key, const std::string& prefix) {
  const json& value = field(object, key, prefix);
  if (!value.is_boolean()) {
    fail(join(prefix, key), "expected true or false");
  }
  return value.get<bool>();
}

std::string text(const json& object, const std::string& key, const std::string& prefix) {
  const json& value = field(object, key, prefix);
  if (!value.is_string()) {
    fail(join(prefix, key), "expected a string");
  }
  return value.get<std::string>();
}

Eigen::VectorXd vector(const json& value, const std::string& path, Eigen::Index expected = -1) {
  if (!value.is_array()) {
    fail(path, "expected an array of numbers");
  }
  Eigen::VectorXd v(static_cast<Eigen::Index>(value.size()));
  for (std::size_t i = 0; i < value.size(); ++i) {
    if (!value[i].is_number() || !std::isfinite(value[i].get<double>())) {
      fail(path + "[" + std::to_string(i) + "]", "expected a finite number");
    }
    v(static_cast<Eigen::Index>(i)) = value[i].get<double>();
  }
  if (expected >= 0 && v.size() != expected) {
    fail(path, "expected " + std::to_string(expected) + " entries, got " + std::to_string(v.size()));
  }
  return v;
}

json to_array(const Eigen::VectorXd& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    a.push_back(v(i));
  }
  return a;
}

/// Rejects fields that have no default counterpart (typos, sections of another model).
void reject_unknown(const json& user, const json& defaults, const std::string& prefix) {
  if (!user.is_object()) {
    return;
  }
  for (const auto& [key, value] : user.items()) {
    const auto it = defaults.find(key);
    if (it == defaults.end()) {
      fail(join(prefix, key), "unknown field");
    }
    if (it->is_object() && value.is_object()) {
      reject_unknown(value, *it, join(prefix, key));
    }
  }
}

/// Recursive object merge; unlike JSON merge patch, null is kept as a value.
void overlay(json& target, const json& patch) {
  for (const auto& [key, value] : patch.items()) {
    if (value.is_object() && target.contains(key) && target[key].is_object()) {
      overlay(target[key], value);
    } else {
      target[key] = value;
    }
  }
}

Box box(const json& value, const std::string& path, Eigen::Index dim) {
  if (!value.is_object()) {
    fail(path, "expected an object with lower and upper");
  }
  Box b{vector(field(value, "lower", path), join(path, "lower"), dim),
        vector(field(value, "upper", path), join(path, "upper"), dim)};
  if (!(b.lower.array() < b.upper.array()).all()) {
    fail(join(path, "upper"), "must exceed lower in every coordinate");
  }
  return b;
}

std::optional<ParameterDensity> density(const json& value, const std::string& path, Eigen::Index dim) {
  if (value.is_null()) {
    return std::nullopt;
  }
  if (!value.is_object()) {
    fail(path, "expected an object or null");
  }
  const std::string kind = text(value, "kind", path);
  if (kind == "uniform") {
    return ParameterDensity{UniformBox{box(value, path, dim)}};
  }
  if (kind == "gaussian") {
    GaussianDiagonal g{vector(field(value, "mean", path), join(path, "mean"), dim),
                       vector(field(value, "variance", path), join(path, "variance"), dim)};
    if (!(g.variance.array() > 0.0).all()) {
      fail(join(path, "variance"), "must be positive");
    }
    return ParameterDensity{g};
  }
  fail(join(path, "kind"), "expected uniform or gaussian, got " + kind);
}

json thresholds_json(double eps_pred, double eps_kl, double eps_samples, int q_max, int q_min, int increment) {
  return {{"eps_pred", eps_pred},   {"eps_kl", eps_kl}, {"eps_samples", eps_samples},
          {"eps_mach", 1e-16},      {"q_max", q_max},   {"q_min", q_min},
          {"resample_increment", increment}, {"max_increments", 3}};
}

json rates_json(const models::SeirsParams& p) { return json::array({p.lambda1, p.lambda2, p.lambda3, p.lambda4}); }

models::SeirsParams rates_from(const json& value, const std::string& path) {
  const Eigen::VectorXd r = vector(value, path, 4);
  if (!(r.array() >= 0.0).all()) {
    fail(path, "rates must be nonnegative");
  }
  return models::SeirsParams::from_rates(r);
}

Thresholds parse_thresholds(const json& t) {
  const std::string p = "thresholds";
  Thresholds th;
  th.eps_pred = number(t, "eps_pred", p);
  th.eps_kl = number(t, "eps_kl", p);
  th.eps_samples = number(t, "eps_samples", p);
  th.eps_mach = number(t, "eps_mach", p);
  th.q_max = bounded_int(t, "q_max", p, 1, 1000);
  th.q_min = bounded_int(t, "q_min", p, 1, 1000);
  th.resample_increment = bounded_int(t, "resample_increment", p, 0, 1000000);
  th.max_increments = bounded_int(t, "max_increments", p, 0, 1000);
  th.validate();
  return th;
}

void parse_linear(const json& s, ExperimentConfig& c) {
  const std::string p = "linear";
  c.linear.parameters = bounded_int(s, "parameters", p, 1, 10000);
  c.linear.sensors = bounded_int(s, "sensors", p, 1, 1000000);
  c.linear.matrix_seed = seed(s, "matrix_seed", p);
  c.linear.store_size = bounded_int(s, "store_size", p, 0, 10000000);
  const json& truth = field(s, "truth", p);
  if (!truth.is_null()) {
    c.linear.truth = vector(truth, "linear.truth", c.linear.parameters);
  }
}

void parse_seirs(const json& s, ExperimentConfig& c) {
  const std::string p = "seirs";
  c.seirs.dt = positive(s, "dt", p);
  c.seirs.cadence = positive(s, "cadence", p);
  const Eigen::VectorXd x0 = vector(field(s, "initial_state", p), "seirs.initial_state", 4);
  if (!(x0.array() >= 0.0).all() || std::abs(x0.sum() - 1.0) > 1e-12) {
    fail("seirs.initial_state", "must be nonnegative and sum to 1");
  }
  c.seirs.initial_state = x0;
  const models::SeirsParams initial = rates_from(field(s, "rates", p), "seirs.rates");
  std::vector<std::pair<double, models::SeirsParams>> shifts;
  const json& list = field(s, "shifts", p);
  if (!list.is_array()) {
    fail("seirs.shifts", "expected an array");
  }
  for (std::size_t j = 0; j < list.size(); ++j) {
    const std::string q = "seirs.shifts[" + std::to_string(j) + "]";
    const double day = number(list[j], "day", q);
    if (!shifts.empty() && !(day > shifts.back().first)) {
      fail(join(q, "day"), "shift days must be strictly increasing");
    }
    shifts.emplace_back(day, rates_from(field(list[j], "rates", q), join(q, "rates")));
  }
  c.seirs.schedule = models::ShiftSchedule{initial, std::move(shifts)};
  c.seirs.compartment = bounded_int(s, "compartment", p, 0, 3);
  const std::string carry = text(s, "carry", p);
  if (carry == "per_sample") {
    c.seirs.carry = models::SeirsModel::Carry::per_sample;
  } else if (carry == "known") {
    c.seirs.carry = models::SeirsModel::Carry::known;
  } else {
    fail("seirs.carry", "expected per_sample or known, got " + carry);
  }
}

void parse_heat(const json& s, ExperimentConfig& c) {
  const std::string p = "heat";
  c.heat.cells = bounded_int(s, "cells", p, 4, 4096);
  c.heat.dt = positive(s, "dt", p);
  c.heat.terms = bounded_int(s, "terms", p, 1, 1000);
  c.heat.mean_log = number(s, "mean_log", p);
  c.heat.marginal_std = positive(s, "marginal_std", p);
  c.heat.correlation_length = positive(s, "correlation_length", p);
  c.heat.sensors = bounded_int(s, "sensors", p, 1, 1000000);
  c.heat.cadence = positive(s, "cadence", p);
  const double ratio = c.heat.cadence / c.heat.dt;
  if (std::abs(ratio - std::round(ratio)) > 1e-9 * ratio) {
    fail("heat.cadence", "must be a whole multiple of heat.dt");
  }
  const Eigen::Index interior = static_cast<Eigen::Index>(c.heat.cells - 1) * (c.heat.cells - 1);
  if (c.heat.terms > interior) {
    fail("heat.terms", "exceeds the number of interior grid nodes");
  }
  const json& truth = field(s, "truth", p);
  if (!truth.is_null()) {
    c.heat.truth = vector(truth, "heat.truth", c.heat.terms);
  }
}

void parse_offline(const json& s, ExperimentConfig& c) {
  const std::string p = "offline";
  c.offline.store = text(s, "store", p);
  c.offline.packets = text(s, "packets", p);
  if (c.offline.store.empty()) {
    fail("offline.store", "required for the offline model");
  }
  if (c.offline.packets.empty()) {
    fail("offline.packets", "required for the offline model");
  }
  if (!std::filesystem::is_directory(c.offline.store)) {
    fail("offline.store", "directory not found: " + c.offline.store.string());
  }
  if (!std::filesystem::is_regular_file(c.offline.packets)) {
    fail("offline.packets", "file not found: " + c.offline.packets.string());
  }
  if (c.thresholds.resample_increment != 0) {
    fail("thresholds.resample_increment", "must be 0 for the offline model");
  }
  if (c.drift_response != DriftResponse::reweight) {
    fail("drift_response", "must be reweight for the offline model");
  }
}

Eigen::Index parameter_count(const ExperimentConfig& c) {
  switch (c.model) {
    case ModelKind::linear:
      return c.linear.parameters;
    case ModelKind::seirs:
      return 4;
    case ModelKind::heat:
      return c.heat.terms;
    case ModelKind::offline:
      return -1;
  }
  return -1;
}

std::string fnv1a(const std::string& data) {
  std::uint64_t h = 14695981039346656037ULL;
  for (const unsigned char ch : data) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace

std::string to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::linear:
      return "linear";
    case ModelKind::seirs:
      return "seirs";
    case ModelKind::heat:
      return "heat";
    case ModelKind::offline:
      return "offline";
  }
  return "unknown";
}

ModelKind model_from_string(const std::string& name) {
  if (name == "linear") return ModelKind::linear;
  if (name == "seirs") return ModelKind::seirs;
  if (name == "heat") return ModelKind::heat;
  if (name == "offline") return ModelKind::offline;
  fail("model", "expected linear, seirs, heat or offline, got " + name);
}

std::string ExperimentConfig::fingerprint() const {
  json copy = resolved;
  copy.erase("output_dir");
  return fnv1a(copy.dump());
}

json default_config_json(ModelKind model) {
  json j = {{"model", to_string(model)},
            {"output_dir", "results"},
            {"t0", 0.0},
            {"noiseless", false},
            {"drift_response", "resample"},
            {"initial", nullptr},
            {"support", nullptr},
            {"centering", "column_mean"},
            {"seeds", {{"truth", 1}, {"noise", 2}, {"sensors", 3}, {"engine", 4}}}};
  switch (model) {
    case ModelKind::linear:
      j["window_length"] = 1.0;
      j["horizon"] = 5.0;
      j["ensemble_size"] = 1000;
      j["noise_sigma"] = 0.5;
      j["thresholds"] = thresholds_json(0.2, 3.0, 0.5, 2, 1, 0);
      j["linear"] = {{"parameters", 2}, {"sensors", 20}, {"matrix_seed", 11}, {"truth", nullptr}, {"store_size", 0}};
      break;
    case ModelKind::seirs: {
      const models::ShiftSchedule schedule = models::reference_schedule();
      json shifts = json::array();
      for (const auto& [day, params] : schedule.shifts()) {
        shifts.push_back({{"day", day}, {"rates", rates_json(params)}});
      }
      const models::SeirsState x0 = models::reference_initial_state();
      j["window_length"] = 14.0;
      j["horizon"] = 364.0;
      j["ensemble_size"] = 1000;
      j["noise_sigma"] = 0.005;
      j["thresholds"] = thresholds_json(0.1, 3.0, 0.9, 3, 1, 200);
      j["seirs"] = {{"dt", 0.1},
                    {"cadence", 1.0},
                    {"initial_state", {x0(0), x0(1), x0(2), x0(3)}},
                    {"rates", rates_json(schedule.initial())},
                    {"shifts", shifts},
                    {"compartment", 2},
                    {"carry", "per_sample"}};
      break;
    }
    case ModelKind::heat:
      j["window_length"] = 0.5;
      j["horizon"] = 3.0;
      j["ensemble_size"] = 100;
      j["noise_sigma"] = 0.05;
      j["thresholds"] = thresholds_json(0.2, 1e9, 0.9, 3, 1, 50);
      j["heat"] = {{"cells", 64},      {"dt", 0.0025},           {"terms", 10},
                   {"mean_log", 0.0},  {"marginal_std", 0.2},    {"correlation_length", 0.1},
                   {"sensors", 500},   {"cadence", 0.05},        {"truth", nullptr}};
      break;
    case ModelKind::offline:
      j["window_length"] = 1.0;
      j["horizon"] = 1.0;
      j["ensemble_size"] = 10;
      j["noise_sigma"] = 1.0;
      j["drift_response"] = "reweight";
      j["thresholds"] = thresholds_json(0.2, 3.0, 0.0, 1, 1, 0);
      j["offline"] = {{"store", ""}, {"packets", ""}};
      break;
  }
  return j;
}

ExperimentConfig config_from_json(const json& user) {
  if (!user.is_object()) {
    fail("config", "expected a JSON object");
  }
  ModelKind kind = ModelKind::seirs;
  if (const auto it = user.find("model"); it != user.end()) {
    if (!it->is_string()) {
      fail("model", "expected a string");
    }
    kind = model_from_string(it->get<std::string>());
  }
  json merged = default_config_json(kind);
  reject_unknown(user, merged, "");
  overlay(merged, user);

  ExperimentConfig c;
  c.model = kind;
  c.output_dir = text(merged, "output_dir", "");
  if (c.output_dir.empty()) {
    fail("output_dir", "must not be empty");
  }
  c.window_length = positive(merged, "window_length", "");
  c.horizon = positive(merged, "horizon", "");
  if (c.horizon < c.window_length * (1.0 - 1e-12)) {
    fail("horizon", "must cover at least one window");
  }
  c.t0 = number(merged, "t0", "");
  c.ensemble_size = bounded_int(merged, "ensemble_size", "", 10, 100000000);
  c.noise_sigma = positive(merged, "noise_sigma", "");
  c.noiseless = boolean(merged, "noiseless", "");
  const std::string drift = text(merged, "drift_response", "");
  if (drift == "resample") {
    c.drift_response = DriftResponse::resample;
  } else if (drift == "reweight") {
    c.drift_response = DriftResponse::reweight;
  } else {
    fail("drift_response", "expected resample or reweight, got " + drift);
  }
  const std::string centering = text(merged, "centering", "");
  if (centering == "column_mean") {
    c.centering = PcaCentering::column_mean;
  } else if (centering == "none") {
    c.centering = PcaCentering::none;
  } else {
    fail("centering", "expected column_mean or none, got " + centering);
  }
  const json& seeds = field(merged, "seeds", "");
  c.seeds = Seeds{seed(seeds, "truth", "seeds"), seed(seeds, "noise", "seeds"), seed(seeds, "sensors", "seeds"),
                  seed(seeds, "engine", "seeds")};
  c.thresholds = parse_thresholds(field(merged, "thresholds", ""));

  switch (kind) {
    case ModelKind::linear:
      parse_linear(field(merged, "linear", ""), c);
      break;
    case ModelKind::seirs:
      parse_seirs(field(merged, "seirs", ""), c);
      break;
    case ModelKind::heat:
      parse_heat(field(merged, "heat", ""), c);
      if (c.t0 != 0.0) {
        fail("t0", "heat runs start at 0");
      }
      break;
    case ModelKind::offline:
      parse_offline(field(merged, "offline", ""), c);
      break;
  }

  const Eigen::Index dim = parameter_count(c);
  c.initial = density(field(merged, "initial", ""), "initial", dim);
  if (const json& s = field(merged, "support", ""); !s.is_null()) {
    c.support = box(s, "support", dim);
  }
  if (kind == ModelKind::seirs) {
    const Eigen::VectorXd hi = 2.0 * c.seirs.schedule.initial().rates();
    if (!c.initial) {
      if (!(hi.array() > 0.0).all()) {
        fail("seirs.rates", "the default initial box needs positive rates; set initial explicitly");
      }
      c.initial = ParameterDensity{UniformBox{Box{Eigen::VectorXd::Zero(4), hi}}};
      merged["initial"] = {{"kind", "uniform"}, {"lower", to_array(Eigen::VectorXd::Zero(4))}, {"upper", to_array(hi)}};
    }
    if (!c.support) {
      if (const auto* u = std::get_if<UniformBox>(&c.initial->kind())) {
        c.support = u->box;
        merged["support"] = {{"lower", to_array(u->box.lower)}, {"upper", to_array(u->box.upper)}};
      }
    }
  } else if (kind == ModelKind::heat && !c.initial) {
    const Eigen::VectorXd zero = Eigen::VectorXd::Zero(c.heat.terms);
    const Eigen::VectorXd two = Eigen::VectorXd::Constant(c.heat.terms, 2.0);
    c.initial = ParameterDensity{GaussianDiagonal{zero, two}};
    merged["initial"] = {{"kind", "gaussian"}, {"mean", to_array(zero)}, {"variance", to_array(two)}};
  } else if (kind == ModelKind::linear && !c.initial) {
    const Eigen::VectorXd zero = Eigen::VectorXd::Zero(c.linear.parameters);
    const Eigen::VectorXd one = Eigen::VectorXd::Ones(c.linear.parameters);
    c.initial = ParameterDensity{GaussianDiagonal{zero, one}};
    merged["initial"] = {{"kind", "gaussian"}, {"mean", to_array(zero)}, {"variance", to_array(one)}};
  }
  c.resolved = std::move(merged);
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in{path};
  if (!in) {
    throw ConfigError("config: cannot open " + path.string());
  }
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config: " + path.string() + ": " + e.what());
  }
  return config_from_json(j);
}

}  // namespace sdci::experiment
