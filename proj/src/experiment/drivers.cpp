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

#include <sdci/experiment/drivers.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include <sdci/io/checkpoint.hpp>
#include <sdci/io/csv.hpp>
#include <sdci/io/diagnostics.hpp>
#include <sdci/io/ensemble_store.hpp>
#include <sdci/io/packets.hpp>
#include <sdci/kde.hpp>
#include <sdci/models/heat.hpp>
#include <sdci/models/kl_field.hpp>
#include <sdci/models/linear.hpp>
#include <sdci/models/measurement.hpp>
#include <sdci/models/seirs.hpp>

namespace sdci::experiment {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

int window_count(const ExperimentConfig& c) {
  return static_cast<int>(std::floor(c.horizon / c.window_length + 1e-9));
}

Eigen::VectorXd cadence_times(double t0, double cadence, double horizon) {
  const auto n = static_cast<Eigen::Index>(std::floor(horizon / cadence + 1e-9));
  Eigen::VectorXd times(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    times(i) = t0 + static_cast<double>(i + 1) * cadence;
  }
  return times;
}

std::string numbered(const std::string& stem, int index, const std::string& ext) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%s_%04d%s", stem.c_str(), index, ext.c_str());
  return buf;
}

void write_json(const fs::path& path, const json& j) {
  std::ofstream out{path};
  out << j.dump(2) << '\n';
  if (!out) {
    throw IoError("cannot write " + path.string());
  }
}

json read_json(const fs::path& path) {
  std::ifstream in{path};
  if (!in) {
    throw IoError("cannot open " + path.string());
  }
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw IoError(path.string() + ": " + e.what());
  }
}

json array_of(const Eigen::VectorXd& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    a.push_back(v(i));
  }
  return a;
}

models::LinearModel linear_operator(const ExperimentConfig& c) {
  return models::random_linear_model(c.linear.sensors, c.linear.parameters, c.linear.matrix_seed);
}

Eigen::VectorXd linear_truth(const ExperimentConfig& c) {
  if (c.linear.truth) {
    return *c.linear.truth;
  }
  Rng rng{c.seeds.truth};
  return c.initial->sample(1, rng).row(0).transpose();
}

models::Grid2D heat_grid(const ExperimentConfig& c) { return models::Grid2D{c.heat.cells, -2.0, 2.0}; }

models::KlField heat_field(const ExperimentConfig& c) {
  return models::kl_decompose(heat_grid(c), c.heat.mean_log, c.heat.marginal_std, c.heat.correlation_length,
                              c.heat.terms);
}

Eigen::VectorXd heat_truth(const ExperimentConfig& c) {
  if (c.heat.truth) {
    return *c.heat.truth;
  }
  Rng rng{c.seeds.truth};
  Eigen::VectorXd xi(c.heat.terms);
  for (Eigen::Index i = 0; i < xi.size(); ++i) {
    xi(i) = standard_normal(rng);
  }
  return xi;
}

models::SensorSet heat_sensors(const ExperimentConfig& c) {
  return models::random_sensors(heat_grid(c), c.heat.sensors, cadence_times(0.0, c.heat.cadence, c.horizon),
                                c.noise_sigma, c.seeds.sensors);
}

models::SeirsTrajectory seirs_truth(const ExperimentConfig& c) {
  return models::rk4_simulate(c.seirs.schedule, c.seirs.initial_state, c.seirs.dt, c.horizon, c.t0);
}

Eigen::MatrixXd field_table(const models::Grid2D& grid, const Eigen::VectorXd& k) {
  Eigen::MatrixXd table(grid.node_count(), 3);
  table.leftCols(2) = grid.coordinates();
  table.col(2) = k;
  return table;
}

std::vector<std::string> indexed_names(const std::string& stem, Eigen::Index count) {
  std::vector<std::string> names;
  for (Eigen::Index j = 0; j < count; ++j) {
    names.push_back(stem + std::to_string(j));
  }
  return names;
}

void write_estimates(const std::vector<WindowRecord>& records, const ExperimentConfig& c, const fs::path& path) {
  io::CsvTable table;
  table.header = {"window", "t_end", "decision"};
  const Eigen::Index dim = records.front().mud_point.size();
  for (const auto& name : indexed_names("mud_", dim)) {
    table.header.push_back(name);
  }
  for (const auto& r : records) {
    std::vector<std::string> row{std::to_string(r.window_index),
                                 io::format_double(c.t0 + r.window_index * c.window_length),
                                 std::string(to_string(r.decision))};
    for (Eigen::Index j = 0; j < r.mud_point.size(); ++j) {
      row.push_back(io::format_double(r.mud_point(j)));
    }
    table.rows.push_back(std::move(row));
  }
  io::write_csv(path, table);
}

EngineState offline_state(const EngineConfig& engine, const io::OfflineModel& model) {
  Rng rng{engine.seed};
  ParameterEnsemble ensemble;
  ensemble.samples = model.store().parameters;
  ensemble.weights = Eigen::VectorXd::Ones(ensemble.samples.rows());
  ensemble.rng_seed = engine.seed;
  return EngineState{std::move(ensemble), engine.initial_density, rng, 0, std::nullopt};
}

}  // namespace

TruthSummary generate_truth(const ExperimentConfig& c) {
  if (c.model == ModelKind::offline) {
    throw ConfigError("model: generate-truth needs linear, seirs or heat");
  }
  const fs::path dir = c.output_dir;
  fs::create_directories(dir);
  std::vector<models::Observation> clean;
  json truth;

  switch (c.model) {
    case ModelKind::linear: {
      const models::LinearModel model = linear_operator(c);
      const Eigen::VectorXd theta = linear_truth(c);
      clean = models::linear_observations(model, theta, window_count(c), c.window_length, c.noise_sigma);
      for (auto& o : clean) {
        o.time += c.t0;
      }
      truth = {{"model", "linear"}, {"parameters", array_of(theta)}, {"A", io::to_json(model.A())},
               {"b", array_of(model.b())}};
      break;
    }
    case ModelKind::seirs: {
      const models::SeirsTrajectory trajectory = seirs_truth(c);
      clean = models::seirs_observations(trajectory, cadence_times(c.t0, c.seirs.cadence, c.horizon),
                                         c.noise_sigma, c.seirs.compartment);
      Eigen::MatrixXd table(trajectory.times.size(), 5);
      table.col(0) = trajectory.times;
      table.rightCols(4) = trajectory.states;
      io::write_matrix_csv(dir / "truth.csv", {"t", "S", "E", "I", "R"}, table);
      json shifts = json::array();
      for (const auto& [day, p] : c.seirs.schedule.shifts()) {
        shifts.push_back({{"day", day}, {"rates", array_of(p.rates())}});
      }
      truth = {{"model", "seirs"}, {"rates", array_of(c.seirs.schedule.initial().rates())}, {"shifts", shifts}};
      break;
    }
    case ModelKind::heat: {
      const models::Grid2D grid = heat_grid(c);
      const models::KlField field = heat_field(c);
      const Eigen::VectorXd xi = heat_truth(c);
      const Eigen::VectorXd k = models::kl_realize(field, xi);
      const models::SensorSet sensors = heat_sensors(c);
      const long stride = std::lround(c.heat.cadence / c.heat.dt);
      const models::HeatSeries series = models::heat_solve(k, grid, c.heat.dt, c.horizon, models::default_forcing(),
                                                           models::default_initial_condition(), stride);
      clean = models::heat_observations(series, grid, sensors);
      io::write_matrix_csv(dir / "truth_field.csv", {"x", "y", "k"}, field_table(grid, k));
      Eigen::MatrixXd locations = sensors.locations;
      io::write_matrix_csv(dir / "sensors.csv", {"x", "y"}, locations);
      truth = {{"model", "heat"}, {"coefficients", array_of(xi)}, {"energy_fraction", field.energy_fraction}};
      break;
    }
    case ModelKind::offline:
      break;
  }

  std::vector<models::Observation> noisy = clean;
  if (!c.noiseless) {
    models::add_noise(noisy, c.seeds.noise);
  }
  const std::vector<DataPacket> packets = models::packetize(noisy, c.window_length, c.t0);
  io::write_packets(dir / kCleanPacketsFile, models::packetize(clean, c.window_length, c.t0));
  io::write_packets(dir / kPacketsFile, packets);
  write_json(dir / kTruthFile, truth);
  write_json(dir / kConfigFile, c.resolved);

  if (c.model == ModelKind::linear && c.linear.store_size > 0) {
    models::LinearModel model = linear_operator(c);
    Rng rng{c.seeds.engine};
    const Eigen::MatrixXd parameters = c.initial->sample(c.linear.store_size, rng);
    io::write_ensemble_store(dir / "store", io::simulate_store(parameters, model, packets));
  }
  return TruthSummary{packets.size(), noisy.size(), dir / kPacketsFile};
}

std::unique_ptr<ForwardModel> make_model(const ExperimentConfig& c, const fs::path& /*directory*/) {
  switch (c.model) {
    case ModelKind::linear:
      return std::make_unique<models::LinearModel>(linear_operator(c));
    case ModelKind::seirs: {
      models::SeirsModel::Options options;
      options.dt = c.seirs.dt;
      options.carry = c.seirs.carry;
      options.compartment = c.seirs.compartment;
      options.t0 = c.t0;
      if (c.seirs.carry == models::SeirsModel::Carry::known) {
        options.known = seirs_truth(c);
      }
      return std::make_unique<models::SeirsModel>(c.seirs.initial_state, std::move(options));
    }
    case ModelKind::heat: {
      models::HeatModel::Options options;
      options.dt = c.heat.dt;
      return std::make_unique<models::HeatModel>(heat_field(c), heat_sensors(c), std::move(options));
    }
    case ModelKind::offline:
      return std::make_unique<io::OfflineModel>(io::read_ensemble_store(c.offline.store));
  }
  throw ConfigError("model: unsupported");
}

EngineConfig make_engine_config(const ExperimentConfig& c, const ForwardModel& model) {
  std::optional<ParameterDensity> initial = c.initial;
  Eigen::Index size = c.ensemble_size;
  if (const auto* offline = dynamic_cast<const io::OfflineModel*>(&model)) {
    const Eigen::MatrixXd& p = offline->store().parameters;
    size = p.rows();
    if (!initial) {
      const Eigen::VectorXd lo = p.colwise().minCoeff().transpose();
      const Eigen::VectorXd hi = p.colwise().maxCoeff().transpose();
      const Eigen::VectorXd pad = ((hi - lo) * 1e-6).cwiseMax(1e-12);
      initial = ParameterDensity{UniformBox{Box{lo - pad, hi + pad}}};
    } else if (initial->dimension() != p.cols()) {
      throw ConfigError("initial: dimension does not match the stored parameters");
    }
  }
  if (!initial) {
    throw ConfigError("initial: required");
  }
  EngineConfig e{c.thresholds, c.drift_response, *initial, std::nullopt, c.support, size, c.seeds.engine,
                 c.centering};
  return e;
}

EstimateSummary estimate(const ExperimentConfig& c, const EstimateOptions& options) {
  const fs::path dir = c.output_dir;
  fs::create_directories(dir);
  fs::path packets_path = dir / kPacketsFile;
  if (c.model == ModelKind::offline) {
    packets_path = c.offline.packets;
  }
  if (options.packets) {
    packets_path = *options.packets;
  }
  if (!fs::is_regular_file(packets_path)) {
    throw IoError("packet stream not found: " + packets_path.string());
  }

  std::unique_ptr<ForwardModel> model = make_model(c, dir);
  const EngineConfig engine_config = make_engine_config(c, *model);
  const std::string fingerprint = c.fingerprint();

  std::vector<WindowRecord> records;
  std::optional<EngineState> state;
  const fs::path checkpoint_path = dir / kCheckpointFile;
  if (options.resume && fs::exists(checkpoint_path)) {
    io::Checkpoint checkpoint = io::load_checkpoint(checkpoint_path);
    if (checkpoint.fingerprint != fingerprint) {
      throw IncompatibleCheckpoint("checkpoint was written for a different configuration");
    }
    model->load_state(checkpoint.model_state);
    records = std::move(checkpoint.records);
    state = std::move(checkpoint.state);
  } else if (const auto* offline = dynamic_cast<const io::OfflineModel*>(model.get())) {
    state = offline_state(engine_config, *offline);
  } else {
    state = initial_state(engine_config);
  }
  write_json(dir / kConfigFile, c.resolved);

  const bool heat = c.model == ModelKind::heat;
  std::optional<models::KlField> field;
  if (heat) {
    field = dynamic_cast<const models::HeatModel&>(*model).field();
    fs::create_directories(dir / "fields");
  }
  if (options.write_ensembles) {
    fs::create_directories(dir / "ensembles");
  }

  SequentialEngine engine{engine_config, *model, std::move(*state)};
  io::PacketReader reader{packets_path};
  EstimateSummary summary;
  summary.last_window = engine.state().last_window;
  summary.complete = true;
  while (true) {
    std::optional<DataPacket> packet = reader.next();
    if (!packet) {
      break;
    }
    if (packet->window_index <= engine.state().last_window) {
      continue;
    }
    if (options.max_windows && summary.windows_processed >= *options.max_windows) {
      summary.complete = false;
      break;
    }
    std::optional<WindowOutcome> result;
    try {
      result = engine.process(*packet);
    } catch (const Error& e) {
      throw WindowError(packet->window_index, e.what());
    }
    const WindowOutcome& outcome = *result;
    const WindowRecord& record = outcome.record;
    records.push_back(record);
    ++summary.windows_processed;
    summary.last_window = record.window_index;

    if (options.write_ensembles) {
      Eigen::MatrixXd table(outcome.updated_samples.rows(), outcome.updated_samples.cols() + 1);
      table << outcome.updated_samples, outcome.updated_weights;
      std::vector<std::string> header = indexed_names("p", outcome.updated_samples.cols());
      header.emplace_back("weight");
      io::write_matrix_csv(dir / "ensembles" / numbered("window", record.window_index, ".csv"), header, table);
    }
    if (heat) {
      io::write_matrix_csv(dir / "fields" / numbered("window", record.window_index, ".csv"), {"x", "y", "k"},
                           field_table(field->grid, models::kl_realize(*field, record.mud_point)));
    }
    io::write_diagnostics(records, dir / kDiagnosticsFile);
    io::write_attempts(records, dir / "attempts.csv");
    write_estimates(records, c, dir / "estimates.csv");
    io::save_checkpoint(checkpoint_path,
                        io::Checkpoint{engine.state(), model->save_state(), records, fingerprint});
  }
  summary.records = std::move(records);
  return summary;
}

void report(const fs::path& directory) {
  const fs::path diagnostics = directory / kDiagnosticsFile;
  if (!fs::is_regular_file(diagnostics) || !fs::is_regular_file(directory / kConfigFile)) {
    throw IoError("no estimate output in " + directory.string());
  }
  const ExperimentConfig c = config_from_json(read_json(directory / kConfigFile));
  const fs::path out = directory / "report";
  fs::create_directories(out);

  io::CsvTable table = io::read_csv(diagnostics);
  const auto column = [&table](const std::string& name) {
    const auto it = std::find(table.header.begin(), table.header.end(), name);
    if (it == table.header.end()) {
      throw IoError("diagnostics table lacks column " + name);
    }
    return static_cast<std::size_t>(it - table.header.begin());
  };
  const std::size_t cw = column("window");
  const std::size_t ce = column("expected_ratio");
  const std::size_t ck = column("kl_dci");
  const std::size_t cf = column("eff_fraction");
  const std::size_t cd = column("decision");
  const std::size_t cp = column("change_point_flag");
  io::CsvTable series;
  series.header = {"window",    "t_end",      "expected_ratio", "kl_dci",     "eff_fraction", "decision",
                   "change_point_flag", "pred_lower", "pred_upper", "eps_kl", "eps_samples"};
  for (const auto& row : table.rows) {
    const int w = std::stoi(row[cw]);
    series.rows.push_back({row[cw], io::format_double(c.t0 + w * c.window_length), row[ce], row[ck], row[cf], row[cd],
                           row[cp], io::format_double(1.0 - c.thresholds.eps_pred),
                           io::format_double(1.0 + c.thresholds.eps_pred), io::format_double(c.thresholds.eps_kl),
                           io::format_double(c.thresholds.eps_samples)});
  }
  io::write_csv(out / "series.csv", series);

  io::CsvTable marginals;
  marginals.header = {"window", "parameter", "x", "density"};
  for (const auto& row : table.rows) {
    const int w = std::stoi(row[cw]);
    const fs::path path = directory / "ensembles" / numbered("window", w, ".csv");
    if (!fs::is_regular_file(path)) {
      continue;
    }
    const Eigen::MatrixXd ens = io::read_matrix_csv(path);
    const Eigen::Index dim = ens.cols() - 1;
    const Eigen::VectorXd weights = ens.col(dim);
    if (ens.rows() < 2 || !(weights.array() > 0.0).any()) {
      continue;
    }
    for (Eigen::Index j = 0; j < dim; ++j) {
      const Eigen::MatrixXd points = ens.col(j);
      if (points.maxCoeff() <= points.minCoeff()) {
        continue;
      }
      const DensityEstimate<double> kde = wkde_fit(points, weights);
      const double h = kde.bandwidths()(0);
      const double lo = points.minCoeff() - 3.0 * h;
      const double hi = points.maxCoeff() + 3.0 * h;
      constexpr int kGrid = 101;
      Eigen::MatrixXd xs(kGrid, 1);
      for (int g = 0; g < kGrid; ++g) {
        xs(g, 0) = lo + (hi - lo) * g / (kGrid - 1);
      }
      const Eigen::VectorXd density = kde.evaluate(xs);
      for (int g = 0; g < kGrid; ++g) {
        marginals.rows.push_back({std::to_string(w), std::to_string(j), io::format_double(xs(g, 0)),
                                  io::format_double(density(g))});
      }
    }
  }
  io::write_csv(out / "marginals.csv", marginals);

  if (c.model == ModelKind::heat) {
    const json truth = read_json(directory / kTruthFile);
    const models::KlField field = heat_field(c);
    Eigen::VectorXd xi(static_cast<Eigen::Index>(truth.at("coefficients").size()));
    for (Eigen::Index i = 0; i < xi.size(); ++i) {
      xi(i) = truth.at("coefficients")[static_cast<std::size_t>(i)].get<double>();
    }
    const Eigen::VectorXd k = models::kl_realize(field, xi);
    const double norm = models::l2_norm(field.grid, k);
    const double mean_error =
        models::l2_norm(field.grid, models::kl_realize(field, Eigen::VectorXd::Zero(xi.size())) - k) / norm;
    const io::CsvTable estimates = io::read_csv(directory / "estimates.csv");
    const auto first = std::find(estimates.header.begin(), estimates.header.end(), "mud_0");
    if (first == estimates.header.end() || estimates.header.end() - first != xi.size()) {
      throw IoError("estimates table does not match the field");
    }
    const auto offset = static_cast<std::size_t>(first - estimates.header.begin());
    io::CsvTable errors;
    errors.header = {"window", "relative_l2_error", "mean_field_error"};
    for (const auto& row : estimates.rows) {
      Eigen::VectorXd mud(xi.size());
      for (Eigen::Index i = 0; i < xi.size(); ++i) {
        mud(i) = io::parse_double(row[offset + static_cast<std::size_t>(i)]);
      }
      const double e = models::l2_norm(field.grid, models::kl_realize(field, mud) - k) / norm;
      errors.rows.push_back({row[0], io::format_double(e), io::format_double(mean_error)});
    }
    io::write_csv(out / "field_errors.csv", errors);
  }
}

}  // namespace sdci::experiment
