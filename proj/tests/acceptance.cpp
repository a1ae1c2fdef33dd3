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

// Acceptance checks: one PASS/FAIL line per criterion.
//
// Usage: sdci_acceptance [--only N[,N...]] [--expect-fail N[,N...]] [--workdir DIR]
// Exit status is 0 when every failing criterion is listed in --expect-fail.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include <sdci/dci.hpp>
#include <sdci/experiment/config.hpp>
#include <sdci/experiment/drivers.hpp>
#include <sdci/io/csv.hpp>
#include <sdci/io/packets.hpp>
#include <sdci/kde.hpp>
#include <sdci/models/linear.hpp>
#include <sdci/models/measurement.hpp>
#include <sdci/models/seirs.hpp>
#include <sdci/qoi.hpp>
#include <sdci/sequential.hpp>

namespace {

namespace fs = std::filesystem;
using namespace sdci;
using nlohmann::json;

struct Result {
  bool pass{false};
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fmt(const char* format, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, format, a);
  return buf;
}

std::string slurp(const fs::path& p) {
  std::ifstream in{p, std::ios::binary};
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

Eigen::MatrixXd normal_matrix(Eigen::Index n, Eigen::Index d, std::mt19937_64& g) {
  std::normal_distribution<double> nd;
  Eigen::MatrixXd m(n, d);
  for (Eigen::Index i = 0; i < m.size(); ++i) m(i) = nd(g);
  return m;
}

bool accepted(Decision d) { return d == Decision::accepted_reweight || d == Decision::accepted_resample; }

// 1. Sample MUD against the closed-form point; covariance special cases.
Result linear_gaussian_oracle() {
  const auto start = Clock::now();
  const double angle = 0.4;
  Eigen::Matrix2d A;
  A << std::cos(angle), -std::sin(angle), std::sin(angle), std::cos(angle);
  const Eigen::Vector2d b(0.1, -0.2);
  const Eigen::Vector2d truth(0.3, -0.5);
  const Eigen::Vector2d data = A * truth + b;
  const double noise = 0.1;
  const Eigen::Vector2d sigma(noise, noise);

  std::mt19937_64 g{2024};
  const Eigen::Index k = 10000;
  const Eigen::MatrixXd samples = normal_matrix(k, 2, g);
  const Eigen::MatrixXd simulated = (samples * A.transpose()).rowwise() + b.transpose();
  const auto mud = mud_estimate(data, sigma, samples, Eigen::VectorXd::Ones(k), simulated, 2);

  // Closed form in whitened residual coordinates (observed N(0, I)).
  LinearGaussianProblem<double> lg{A / noise, (b - data) / noise, Eigen::Vector2d::Zero(), Eigen::Matrix2d::Identity(),
                                   Eigen::Matrix2d::Identity()};
  const Eigen::Vector2d analytic = linear_gaussian_mud(lg).mud_point;

  std::vector<double> nearest(static_cast<std::size_t>(k));
  for (Eigen::Index i = 0; i < k; ++i) {
    double best = INFINITY;
    for (Eigen::Index j = 0; j < k; ++j) {
      if (j != i) best = std::min(best, (samples.row(i) - samples.row(j)).cwiseAbs().maxCoeff());
    }
    nearest[static_cast<std::size_t>(i)] = best;
  }
  std::nth_element(nearest.begin(), nearest.begin() + k / 2, nearest.end());
  const double spacing = nearest[static_cast<std::size_t>(k / 2)];
  const double error = (mud.mud_point - analytic).cwiseAbs().maxCoeff();

  // Special cases of the updated covariance.
  std::mt19937_64 h{7};
  double special = 0.0;
  for (int trial = 0; trial < 10; ++trial) {
    const Eigen::MatrixXd L = normal_matrix(3, 3, h);
    const Eigen::MatrixXd sigma_init = L * L.transpose() + Eigen::MatrixXd::Identity(3, 3);
    const Eigen::MatrixXd An = normal_matrix(2, 3, h);
    LinearGaussianProblem<double> matched{An, normal_matrix(2, 1, h), normal_matrix(3, 1, h), sigma_init,
                                          An * sigma_init * An.transpose()};
    special = std::max(special, (linear_gaussian_mud(matched).updated_cov - sigma_init).cwiseAbs().maxCoeff());
    const Eigen::MatrixXd Q = Eigen::HouseholderQR<Eigen::MatrixXd>(normal_matrix(3, 3, h)).householderQ();
    LinearGaussianProblem<double> p1{Q, normal_matrix(3, 1, h), normal_matrix(3, 1, h), sigma_init,
                                     0.3 * Eigen::MatrixXd::Identity(3, 3)};
    LinearGaussianProblem<double> p2 = p1;
    const Eigen::MatrixXd L2 = normal_matrix(3, 3, h);
    p2.sigma_init = L2 * L2.transpose() + 0.5 * Eigen::MatrixXd::Identity(3, 3);
    p2.lambda_init = normal_matrix(3, 1, h);
    const auto s1 = linear_gaussian_mud(p1);
    const auto s2 = linear_gaussian_mud(p2);
    special = std::max(special, (s1.mud_point - s2.mud_point).cwiseAbs().maxCoeff());
    special = std::max(special, (s1.updated_cov - s2.updated_cov).cwiseAbs().maxCoeff());
  }
  const double elapsed = seconds_since(start);
  const bool pass = error <= 3.0 * spacing && special <= 1e-10 && elapsed < 10.0;
  return {pass, fmt("sup error %.4g", error) + fmt(" vs 3x median NN spacing %.4g", 3.0 * spacing) +
                    fmt("; special cases max dev %.2e", special) + fmt("; %.1f s", elapsed)};
}

struct LinearToy {
  models::LinearModel model;
  std::vector<DataPacket> packets;
};

LinearToy linear_toy(std::uint64_t seed, int windows) {
  LinearToy toy{models::random_linear_model(20, 2, 11), {}};
  std::mt19937_64 g{seed};
  const Eigen::VectorXd truth = normal_matrix(2, 1, g);
  auto obs = models::linear_observations(toy.model, truth, windows, 1.0, 0.5);
  models::add_noise(obs, seed + 1000);
  toy.packets = models::packetize(obs, 1.0);
  return toy;
}

EngineConfig linear_engine(double eps_samples, std::uint64_t seed) {
  return EngineConfig{Thresholds{0.2, 3.0, eps_samples, 1e-16, 2, 1, 0, 3},
                      DriftResponse::resample,
                      ParameterDensity{GaussianDiagonal{Eigen::Vector2d::Zero(), Eigen::Vector2d::Ones()}},
                      std::nullopt,
                      std::nullopt,
                      1000,
                      seed,
                      PcaCentering::column_mean};
}

// 2. E(r) calibration on the linear toy; KL for a shifted Gaussian.
Result diagnostic_calibration(const fs::path& dir) {
  int accepted_windows = 0;
  std::string values;
  std::string raw;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const fs::path out = dir / std::to_string(seed);
    const experiment::ExperimentConfig config = experiment::config_from_json(
        {{"model", "linear"},
         {"output_dir", out.string()},
         {"horizon", 1.0},
         {"seeds", {{"truth", seed}, {"noise", 100 + seed}, {"engine", 200 + seed}}}});
    (void)experiment::generate_truth(config);
    auto model = experiment::make_model(config, out);
    SequentialEngine engine{experiment::make_engine_config(config, *model), *model};
    const auto outcome = engine.process(io::read_packets(out / experiment::kPacketsFile).at(0));
    const double e = outcome.record.expected_ratio;
    const bool ok = accepted(outcome.record.decision) && std::abs(e - 1.0) < 0.2;
    accepted_windows += ok ? 1 : 0;
    values += fmt(values.empty() ? "%.3f" : " %.3f", e) + "(q" + std::to_string(outcome.record.q_used) + ")";
    raw += fmt(raw.empty() ? "%.3f" : " %.3f", outcome.record.attempts.front().expected_ratio);
  }
  std::mt19937_64 g{99};
  const Eigen::MatrixXd q = normal_matrix(10000, 1, g);
  const ObservedDensity<double> shifted{
      DiagonalGaussian<double>{Eigen::VectorXd::Constant(1, 2.0), Eigen::VectorXd::Constant(1, 1.0)}};
  const auto dci = wdci(q, Eigen::VectorXd::Ones(10000), shifted);
  const bool calibrated = accepted_windows >= 9;
  const bool kl_ok = std::abs(dci.kl_dci - 2.0) <= 0.3;
  return {calibrated && kl_ok,
          std::string(calibrated ? "" : "[calibration FAILED] ") + (kl_ok ? "" : "[KL FAILED] ") + "accepted with |E(r)-1| < 0.2 on " +
              std::to_string(accepted_windows) + "/10 seeds, final E(r) " + values + ", first-attempt E(r) " + raw +
              fmt("; shifted-Gaussian KL_DCI %.3f (exact 2,", dci.kl_dci) + fmt(" E(r) %.3f)", dci.expected_ratio)};
}

// 3 and 4 share the default SEIRS experiment.
struct SeirsRun {
  std::vector<WindowRecord> records;
  double seconds{};
  double carried_drift{};
};

SeirsRun seirs_run(const fs::path& dir) {
  const auto start = Clock::now();
  const experiment::ExperimentConfig config = experiment::config_from_json({{"output_dir", dir.string()}});
  (void)experiment::generate_truth(config);
  auto model = experiment::make_model(config, dir);
  SequentialEngine engine{experiment::make_engine_config(config, *model), *model};
  SeirsRun run;
  for (const auto& packet : io::read_packets(dir / experiment::kPacketsFile)) {
    run.records.push_back(engine.process(packet).record);
    const json state = model->save_state();
    const auto sum = [](const json& x) { return x[0].get<double>() + x[1].get<double>() + x[2].get<double>() + x[3].get<double>(); };
    run.carried_drift = std::max(run.carried_drift, std::abs(sum(state.at("state")) - 1.0));
    for (const auto& s : state.at("samples")) {
      run.carried_drift = std::max(run.carried_drift, std::abs(sum(s.at("state")) - 1.0));
    }
  }
  run.seconds = seconds_since(start);
  return run;
}

Result seirs_change_points(const SeirsRun& run) {
  // Day 25 falls in window 2 and day 150 in window 11.
  std::vector<int> flags;
  for (const auto& r : run.records) {
    if (r.change_point_flag) flags.push_back(r.window_index);
  }
  const auto flagged_in = [&flags](int lo, int hi) {
    return std::any_of(flags.begin(), flags.end(), [=](int w) { return w >= lo && w <= hi; });
  };
  const bool first = flagged_in(2, 5);
  const bool second = flagged_in(11, 14);
  const bool quiet_start = !flagged_in(1, 1);
  const double target = 1.0 / 3.5;
  bool lambda2 = false;
  int seen = 0;
  std::string estimates;
  for (const auto& r : run.records) {
    if (r.window_index >= 11 && accepted(r.decision) && seen < 4) {
      ++seen;
      const double rel = std::abs(r.mud_point(1) - target) / target;
      lambda2 = lambda2 || rel <= 0.2;
      estimates += " w" + std::to_string(r.window_index) + fmt("=%.4f", r.mud_point(1));
    }
  }
  std::string flag_list;
  for (int w : flags) flag_list += (flag_list.empty() ? "" : ",") + std::to_string(w);
  const bool pass = first && second && quiet_start && lambda2 && run.seconds < 300.0;
  return {pass, "flags at windows {" + flag_list + "}; shift-1 flag " + (first ? "yes" : "no") + ", shift-2 flag " +
                    (second ? "yes" : "no") + ", window-1 flag " + (quiet_start ? "no" : "yes") +
                    "; lambda2 after shift:" + (estimates.empty() ? " none accepted" : estimates) +
                    fmt(" (target %.4f)", target) + fmt("; %.1f s", run.seconds)};
}

Result seirs_conservation(const SeirsRun& run) {
  const models::ShiftSchedule schedule = models::reference_schedule();
  const models::SeirsTrajectory truth = models::rk4_simulate(schedule, models::reference_initial_state(), 0.1, 364.0);
  double worst = (truth.states.rowwise().sum().array() - 1.0).abs().maxCoeff();
  const experiment::ExperimentConfig config = experiment::config_from_json(json::object());
  Rng rng{config.seeds.engine};
  const Eigen::MatrixXd members = config.initial->sample(config.ensemble_size, rng);
  for (Eigen::Index i = 0; i < members.rows(); ++i) {
    const auto t = models::rk4_simulate(models::SeirsParams::from_rates(members.row(i).transpose()),
                                        models::reference_initial_state(), 0.1, 364.0);
    worst = std::max(worst, (t.states.rowwise().sum().array() - 1.0).abs().maxCoeff());
  }
  worst = std::max(worst, run.carried_drift);
  return {worst <= 1e-10, fmt("max |S+E+I+R-1| = %.2e over truth, ", worst) + std::to_string(members.rows()) +
                              " full-horizon members and every carried per-sample state"};
}

// 5. Heat field reconstruction at the default scale.
Result heat_reconstruction(const fs::path& dir) {
  const auto start = Clock::now();
  const experiment::ExperimentConfig config =
      experiment::config_from_json({{"model", "heat"}, {"output_dir", dir.string()}});
  (void)experiment::generate_truth(config);
  experiment::EstimateOptions options;
  options.write_ensembles = false;
  const auto summary = experiment::estimate(config, options);
  experiment::report(dir);
  const double elapsed = seconds_since(start);
  const io::CsvTable errors = io::read_csv(dir / "report" / "field_errors.csv");
  if (errors.rows.size() != 6) {
    return {false, "expected 6 windows, got " + std::to_string(errors.rows.size())};
  }
  const double mean_error = io::parse_double(errors.rows[0][2]);
  std::string trace;
  for (const auto& row : errors.rows) trace += fmt(" %.4f", io::parse_double(row[1]));
  const double first = io::parse_double(errors.rows.front()[1]);
  const double last = io::parse_double(errors.rows.back()[1]);
  std::string decisions;
  for (const auto& r : summary.records) decisions += std::string(decisions.empty() ? "" : ",") + std::string(to_string(r.decision));
  const bool pass = last <= 0.5 * mean_error && last < first && elapsed < 900.0;
  return {pass, "MUD field error by window" + trace + fmt("; mean-field error %.4f", mean_error) +
                    fmt(" (need window 6 <= %.4f", 0.5 * mean_error) + fmt(" and < %.4f)", first) + "; decisions " +
                    decisions + fmt("; %.0f s", elapsed)};
}

// 6. Permuting measurement columns leaves the MUD point bitwise unchanged.
Result column_permutation() {
  int checks = 0;
  int identical = 0;
  std::mt19937 shuffle{5};
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    LinearToy toy = linear_toy(seed, 2);
    for (int q = 1; q <= 2; ++q) {
      EngineConfig config = linear_engine(0.5, seed);
      config.thresholds.q_max = q;
      config.thresholds.q_min = q;
      const EngineState state = initial_state(config);
      models::LinearModel m1 = toy.model;
      const WindowOutcome base = run_window(state, toy.packets[0], m1, config);

      DataPacket permuted = toy.packets[0];
      std::vector<Eigen::Index> order(static_cast<std::size_t>(permuted.size()));
      std::iota(order.begin(), order.end(), 0);
      std::shuffle(order.begin(), order.end(), shuffle);
      for (std::size_t j = 0; j < order.size(); ++j) {
        const auto src = order[j];
        permuted.times(static_cast<Eigen::Index>(j)) = toy.packets[0].times(src);
        permuted.values(static_cast<Eigen::Index>(j)) = toy.packets[0].values(src);
        permuted.sigmas(static_cast<Eigen::Index>(j)) = toy.packets[0].sigmas(src);
        permuted.sensor_ids[j] = toy.packets[0].sensor_ids[static_cast<std::size_t>(src)];
      }
      models::LinearModel m2 = toy.model;
      const WindowOutcome other = run_window(state, permuted, m2, config);
      ++checks;
      identical += (other.record.mud_point == base.record.mud_point) ? 1 : 0;
    }
  }
  return {identical == checks, std::to_string(identical) + "/" + std::to_string(checks) +
                                   " permuted windows give a bitwise identical MUD point"};
}

// 7. eps_samples = 1 always re-samples, eps_samples = 0 always re-weights.
Result propagation_semantics() {
  std::string detail;
  bool pass = true;
  for (double eps : {1.0, 0.0}) {
    const Decision expected = eps == 1.0 ? Decision::accepted_resample : Decision::accepted_reweight;
    LinearToy toy = linear_toy(3, 5);
    const auto result = sequential_mud(linear_engine(eps, 3), toy.packets, toy.model);
    int matching = 0;
    int total = 0;
    for (const auto& r : result.records) {
      if (accepted(r.decision)) {
        ++total;
        matching += r.decision == expected ? 1 : 0;
      }
    }
    pass = pass && total > 0 && matching == total && result.records.size() == 5;
    detail += fmt(detail.empty() ? "eps_samples=%g: " : "; eps_samples=%g: ", eps) + std::to_string(matching) + "/" +
              std::to_string(total) + " accepted windows " + std::string(to_string(expected));
  }
  return {pass, detail + " (5 windows each)"};
}

// 8. Normalization and reduction invariants over randomized fits.
Result kde_invariants() {
  std::mt19937_64 g{8};
  std::exponential_distribution<double> ed;
  int passed = 0;
  double worst_norm = 0.0;
  double worst_reduction = 0.0;
  for (int fit = 0; fit < 100; ++fit) {
    const Eigen::Index d = fit < 50 ? 1 : 2;
    const Eigen::Index n = 10 + fit % 30;
    const Eigen::MatrixXd p = normal_matrix(n, d, g);
    Eigen::VectorXd w(n);
    for (Eigen::Index i = 0; i < n; ++i) w(i) = ed(g);
    w(0) = 0.0;
    const auto f = wkde_fit(p, w);

    // Normalization by tensor trapezoid quadrature over +-9 bandwidths.
    const int m = d == 1 ? 4000 : 240;
    const Eigen::VectorXd lo = p.colwise().minCoeff().transpose() - 9.0 * f.bandwidths();
    const Eigen::VectorXd hi = p.colwise().maxCoeff().transpose() + 9.0 * f.bandwidths();
    const Eigen::VectorXd step = (hi - lo) / m;
    double total = 0.0;
    if (d == 1) {
      for (int i = 0; i <= m; ++i) {
        total += (i == 0 || i == m ? 0.5 : 1.0) * f(Eigen::VectorXd::Constant(1, lo(0) + i * step(0)));
      }
    } else {
      for (int i = 0; i <= m; ++i) {
        for (int j = 0; j <= m; ++j) {
          const double c = (i == 0 || i == m ? 0.5 : 1.0) * (j == 0 || j == m ? 0.5 : 1.0);
          total += c * f(Eigen::Vector2d(lo(0) + i * step(0), lo(1) + j * step(1)));
        }
      }
    }
    total *= step.prod();
    const double norm_error = std::abs(total - 1.0);

    // Reductions: scaled weights, dropped zero-weight point, unit weights versus unweighted fit.
    const Eigen::MatrixXd queries = normal_matrix(5, d, g);
    const auto scaled = wkde_fit(p, Eigen::VectorXd(w * 17.0));
    const auto dropped = wkde_fit(Eigen::MatrixXd(p.bottomRows(n - 1)), Eigen::VectorXd(w.tail(n - 1)));
    const auto unit = wkde_fit(p, Eigen::VectorXd::Ones(n));
    const auto plain = wkde_fit(p);
    const Eigen::VectorXd base = f.evaluate(queries);
    double reduction = ((scaled.evaluate(queries) - base).array().abs() / base.array()).maxCoeff();
    reduction = std::max(reduction, ((dropped.evaluate(queries) - base).array().abs() / base.array()).maxCoeff());
    reduction = std::max(reduction, (unit.evaluate(queries) - plain.evaluate(queries)).cwiseAbs().maxCoeff());
    worst_norm = std::max(worst_norm, norm_error);
    worst_reduction = std::max(worst_reduction, reduction);
    passed += (norm_error <= (d == 1 ? 1e-8 : 1e-5) && reduction <= 1e-10) ? 1 : 0;
  }
  return {passed == 100, std::to_string(passed) + "/100 fits" + fmt("; worst |integral - 1| %.2e", worst_norm) +
                             fmt(", worst reduction deviation %.2e", worst_reduction)};
}

// 9. Interrupt and resume reproduces the uninterrupted diagnostics table.
Result checkpoint_split(const fs::path& dir) {
  const fs::path a = dir / "whole";
  const fs::path b = dir / "split";
  const auto config_for = [](const fs::path& out) {
    return experiment::config_from_json({{"output_dir", out.string()}});
  };
  (void)experiment::generate_truth(config_for(a));
  (void)experiment::generate_truth(config_for(b));
  (void)experiment::estimate(config_for(a));
  std::vector<int> splits;
  experiment::EstimateOptions options;
  options.max_windows = 2;
  bool complete = false;
  int invocations = 0;
  while (!complete && invocations < 40) {
    complete = experiment::estimate(config_for(b), options).complete;
    options.resume = true;
    options.max_windows = 5 + invocations % 3;
    ++invocations;
  }
  const bool same = slurp(a / experiment::kDiagnosticsFile) == slurp(b / experiment::kDiagnosticsFile);
  const bool same_checkpoint = slurp(a / experiment::kCheckpointFile) == slurp(b / experiment::kCheckpointFile);
  return {same && same_checkpoint && complete,
          "SEIRS run split into " + std::to_string(invocations) + " invocations: diagnostics table " +
              (same ? "byte-identical" : "DIFFERS") + ", final checkpoint " + (same_checkpoint ? "byte-identical" : "DIFFERS")};
}

std::set<int> parse_list(const std::string& text) {
  std::set<int> out;
  std::stringstream s{text};
  std::string item;
  while (std::getline(s, item, ',')) {
    if (!item.empty()) out.insert(std::stoi(item));
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"sdci acceptance checks"};
  std::string only_text;
  std::string expect_text;
  std::string workdir = (fs::temp_directory_path() / "sdci_acceptance").string();
  app.add_option("--only", only_text, "Comma-separated criteria to run");
  app.add_option("--expect-fail", expect_text, "Criteria whose failure is documented");
  app.add_option("--workdir", workdir, "Scratch directory");
  CLI11_PARSE(app, argc, argv);
  const std::set<int> only = parse_list(only_text);
  const std::set<int> expected = parse_list(expect_text);
  const auto wanted = [&only](int c) { return only.empty() || only.count(c) > 0; };

  const fs::path root{workdir};
  fs::remove_all(root);
  fs::create_directories(root);

  std::vector<std::pair<int, Result>> results;
  const auto record = [&results](int c, Result r) {
    std::printf("criterion %d: %s: %s\n", c, r.pass ? "PASS" : "FAIL", r.detail.c_str());
    std::fflush(stdout);
    results.emplace_back(c, std::move(r));
  };
  const auto guarded = [&record](int c, const std::function<Result()>& f) {
    try {
      record(c, f());
    } catch (const std::exception& e) {
      record(c, Result{false, std::string("error: ") + e.what()});
    }
  };

  if (wanted(1)) guarded(1, linear_gaussian_oracle);
  if (wanted(2)) guarded(2, [&root] { return diagnostic_calibration(root / "calibration"); });
  if (wanted(3) || wanted(4)) {
    try {
      const SeirsRun run = seirs_run(root / "seirs");
      if (wanted(3)) guarded(3, [&run] { return seirs_change_points(run); });
      if (wanted(4)) guarded(4, [&run] { return seirs_conservation(run); });
    } catch (const std::exception& e) {
      if (wanted(3)) record(3, Result{false, std::string("error: ") + e.what()});
      if (wanted(4)) record(4, Result{false, std::string("error: ") + e.what()});
    }
  }
  if (wanted(5)) guarded(5, [&root] { return heat_reconstruction(root / "heat"); });
  if (wanted(6)) guarded(6, column_permutation);
  if (wanted(7)) guarded(7, propagation_semantics);
  if (wanted(8)) guarded(8, kde_invariants);
  if (wanted(9)) guarded(9, [&root] { return checkpoint_split(root / "split"); });
  if (wanted(10)) {
    std::printf("criterion 10: NOT REPRODUCED: storm-surge diagnostic values and figures need the shallow-water "
                "model; the offline workflow is exercised on a synthetic ensemble store instead\n");
  }

  int unexpected = 0;
  for (const auto& [c, r] : results) {
    if (!r.pass && expected.count(c) == 0) ++unexpected;
    if (r.pass && expected.count(c) > 0) std::printf("note: criterion %d passed although listed as expected to fail\n", c);
  }
  std::printf("%d unexpected failure(s)\n", unexpected);
  fs::remove_all(root);
  return unexpected == 0 ? 0 : 1;
}
