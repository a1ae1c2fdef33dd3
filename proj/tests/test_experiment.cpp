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

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include <gtest/gtest.h>

#include <sdci/errors.hpp>
#include <sdci/experiment/config.hpp>
#include <sdci/experiment/drivers.hpp>
#include <sdci/io/csv.hpp>
#include <sdci/io/packets.hpp>

namespace sdci::experiment {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("sdci_exp_" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in{p, std::ios::binary};
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::string config_error(const json& j) {
  try {
    (void)config_from_json(j);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

TEST(Config, DefaultsPerModel) {
  const ExperimentConfig s = config_from_json(json::object());
  EXPECT_EQ(s.model, ModelKind::seirs);
  EXPECT_EQ(s.window_length, 14.0);
  EXPECT_EQ(s.ensemble_size, 1000);
  EXPECT_EQ(s.thresholds.eps_pred, 0.1);
  EXPECT_EQ(s.thresholds.eps_kl, 3.0);
  const auto& box = std::get<UniformBox>(s.initial->kind()).box;
  EXPECT_EQ(box.upper, 2.0 * models::reference_schedule().initial().rates());
  EXPECT_EQ(box.lower, Eigen::VectorXd::Zero(4));
  ASSERT_TRUE(s.support.has_value());

  const ExperimentConfig h = config_from_json({{"model", "heat"}});
  EXPECT_EQ(h.ensemble_size, 100);
  EXPECT_EQ(h.thresholds.q_max, 3);
  EXPECT_EQ(h.thresholds.resample_increment, 50);
  EXPECT_EQ(h.thresholds.eps_samples, 0.9);
  const auto& g = std::get<GaussianDiagonal>(h.initial->kind());
  EXPECT_EQ(g.variance, Eigen::VectorXd::Constant(10, 2.0));
  EXPECT_FALSE(h.support.has_value());

  const ExperimentConfig l = config_from_json({{"model", "linear"}, {"linear", {{"parameters", 3}}}});
  EXPECT_EQ(l.initial->dimension(), 3);
}

TEST(Config, ErrorsNameFieldPaths) {
  EXPECT_EQ(config_error({{"thresholds", {{"epsx", 1}}}}), "thresholds.epsx: unknown field");
  EXPECT_EQ(config_error({{"ensemble_size", 2.5}}), "ensemble_size: expected an integer");
  EXPECT_EQ(config_error({{"ensemble_size", 5}}), "ensemble_size: must lie in [10, 100000000]");
  EXPECT_EQ(config_error({{"thresholds", {{"eps_pred", -1.0}}}}), "thresholds.eps_pred: must be positive");
  EXPECT_EQ(config_error({{"model", "ocean"}}), "model: expected linear, seirs, heat or offline, got ocean");
  EXPECT_EQ(config_error({{"heat", {{"cells", 8}}}}), "heat: unknown field");
  EXPECT_NE(config_error({{"seirs", {{"shifts", {{{"day", 5.0}, {"rates", {0.1, 0.1, 0.1, 0.0}}},
                                                 {{"day", 5.0}, {"rates", {0.1, 0.1, 0.1, 0.0}}}}}}}})
                .find("seirs.shifts[1].day"),
            std::string::npos);
  EXPECT_NE(config_error({{"model", "heat"}, {"initial", {{"kind", "gaussian"}, {"mean", {0.0}}, {"variance", {1.0}}}}})
                .find("initial.mean: expected 10 entries"),
            std::string::npos);
  EXPECT_EQ(config_error({{"model", "offline"}}), "offline.store: required for the offline model");
  EXPECT_NE(config_error({{"model", "offline"}, {"offline", {{"store", "/nonexistent"}, {"packets", "/nonexistent"}}}})
                .find("offline.store: directory not found"),
            std::string::npos);
}

TEST(Config, ResolvedDocumentReproducesConfig) {
  const ExperimentConfig a = config_from_json({{"model", "linear"}, {"seeds", {{"engine", 9}}}});
  const ExperimentConfig b = config_from_json(a.resolved);
  EXPECT_EQ(a.fingerprint(), b.fingerprint());
  EXPECT_EQ(b.seeds.engine, 9u);
  json moved = a.resolved;
  moved["output_dir"] = "elsewhere";
  EXPECT_EQ(config_from_json(moved).fingerprint(), a.fingerprint());
  moved["ensemble_size"] = 500;
  EXPECT_NE(config_from_json(moved).fingerprint(), a.fingerprint());
}

TEST(GenerateTruth, SeirsDefaults) {
  const fs::path dir = scratch("seirs");
  const ExperimentConfig c = config_from_json({{"output_dir", dir.string()}});
  const TruthSummary s = generate_truth(c);
  EXPECT_EQ(s.packets, 26u);
  const auto packets = io::read_packets(dir / kPacketsFile);
  for (std::size_t m = 0; m < packets.size(); ++m) {
    EXPECT_EQ(packets[m].size(), 14);
    EXPECT_DOUBLE_EQ(packets[m].times(13), 14.0 * static_cast<double>(m + 1));
    EXPECT_TRUE((packets[m].sigmas.array() == 0.005).all());
  }
  const Eigen::MatrixXd truth = io::read_matrix_csv(dir / "truth.csv");
  EXPECT_EQ(truth.rows(), 3641);
  EXPECT_LT((truth.rightCols(4).rowwise().sum().array() - 1.0).abs().maxCoeff(), 1e-10);
  fs::remove_all(dir);
}

TEST(GenerateTruth, HeatDefaults) {
  const fs::path dir = scratch("heat");
  const ExperimentConfig c = config_from_json({{"model", "heat"}, {"output_dir", dir.string()}});
  EXPECT_EQ(generate_truth(c).packets, 6u);
  const auto packets = io::read_packets(dir / kPacketsFile);
  for (const auto& p : packets) {
    EXPECT_EQ(p.size(), 500 * 10);
    EXPECT_EQ(std::set<std::string>(p.sensor_ids.begin(), p.sensor_ids.end()).size(), 500u);
    EXPECT_TRUE((p.sigmas.array() == 0.05).all());
  }
  EXPECT_NEAR(packets[0].times(0), 0.05, 1e-12);
  EXPECT_NEAR(packets[5].times(packets[5].size() - 1), 3.0, 1e-12);
  fs::remove_all(dir);
}

TEST(GenerateTruth, NoiselessMatchesTruthPackets) {
  const fs::path dir = scratch("noiseless");
  const ExperimentConfig c = config_from_json({{"model", "linear"}, {"output_dir", dir.string()}, {"noiseless", true}});
  (void)generate_truth(c);
  EXPECT_EQ(slurp(dir / kPacketsFile), slurp(dir / kCleanPacketsFile));
  const ExperimentConfig noisy = config_from_json({{"model", "linear"}, {"output_dir", dir.string()}});
  (void)generate_truth(noisy);
  EXPECT_NE(slurp(dir / kPacketsFile), slurp(dir / kCleanPacketsFile));
  fs::remove_all(dir);
}

TEST(Estimate, SplitRunMatchesUninterrupted) {
  const fs::path a = scratch("split_a");
  const fs::path b = scratch("split_b");
  const json base = {{"model", "seirs"}, {"ensemble_size", 200}, {"horizon", 98.0}};
  json ja = base;
  ja["output_dir"] = a.string();
  json jb = base;
  jb["output_dir"] = b.string();
  const ExperimentConfig ca = config_from_json(ja);
  const ExperimentConfig cb = config_from_json(jb);
  (void)generate_truth(ca);
  (void)generate_truth(cb);
  const EstimateSummary full = estimate(ca);
  EXPECT_TRUE(full.complete);
  EXPECT_EQ(full.windows_processed, 7);
  EstimateOptions first;
  first.max_windows = 3;
  const EstimateSummary head = estimate(cb, first);
  EXPECT_FALSE(head.complete);
  EXPECT_EQ(head.last_window, 3);
  EstimateOptions rest;
  rest.resume = true;
  const EstimateSummary tail = estimate(cb, rest);
  EXPECT_EQ(tail.windows_processed, 4);
  for (const char* f : {"diagnostics.csv", "attempts.csv", "estimates.csv", "checkpoint.json",
                        "ensembles/window_0007.csv"}) {
    EXPECT_EQ(slurp(a / f), slurp(b / f)) << f;
  }
  // A checkpoint from another configuration is refused.
  json other = jb;
  other["ensemble_size"] = 300;
  EXPECT_THROW((void)estimate(config_from_json(other), rest), IncompatibleCheckpoint);
  fs::remove_all(a);
  fs::remove_all(b);
}

TEST(Estimate, WrapsErrorsWithWindow) {
  const fs::path dir = scratch("window_error");
  const ExperimentConfig c = config_from_json({{"model", "linear"}, {"output_dir", dir.string()}});
  fs::create_directories(dir);
  DataPacket p{1, Eigen::VectorXd::Constant(1, 1.0), Eigen::VectorXd::Zero(1), Eigen::VectorXd::Ones(1), {"s0999"}};
  io::write_packets(dir / kPacketsFile, {p});
  try {
    (void)estimate(c);
    FAIL();
  } catch (const WindowError& e) {
    EXPECT_EQ(e.window(), 1);
    EXPECT_NE(std::string(e.what()).find("s0999"), std::string::npos);
  }
  fs::remove_all(dir);
}

TEST(Estimate, OfflineRunOnGeneratedStore) {
  const fs::path dir = scratch("offline");
  const ExperimentConfig lin =
      config_from_json({{"model", "linear"}, {"output_dir", dir.string()}, {"linear", {{"store_size", 400}}}});
  (void)generate_truth(lin);
  const ExperimentConfig off = config_from_json({{"model", "offline"},
                                                 {"output_dir", (dir / "offline").string()},
                                                 {"offline", {{"store", (dir / "store").string()},
                                                              {"packets", (dir / kPacketsFile).string()}}}});
  const EstimateSummary s = estimate(off);
  EXPECT_EQ(s.windows_processed, 5);
  for (const auto& r : s.records) {
    EXPECT_NE(r.decision, Decision::accepted_resample);
    EXPECT_EQ(r.sample_count, 400);
  }
  fs::remove_all(dir);
}

TEST(Report, SeriesMarginalsAndFieldErrors) {
  const fs::path dir = scratch("report");
  const ExperimentConfig c = config_from_json({{"model", "heat"},
                                               {"output_dir", dir.string()},
                                               {"horizon", 1.0},
                                               {"ensemble_size", 30},
                                               {"heat", {{"cells", 12}, {"sensors", 20}, {"terms", 3}}}});
  (void)generate_truth(c);
  (void)estimate(c);
  report(dir);
  const io::CsvTable series = io::read_csv(dir / "report" / "series.csv");
  EXPECT_EQ(series.rows.size(), 2u);
  EXPECT_EQ(series.header[7], "pred_lower");
  EXPECT_EQ(series.rows[0][7], io::format_double(0.8));
  const io::CsvTable errors = io::read_csv(dir / "report" / "field_errors.csv");
  ASSERT_EQ(errors.rows.size(), 2u);
  EXPECT_GT(io::parse_double(errors.rows[0][1]), 0.0);
  const io::CsvTable marginals = io::read_csv(dir / "report" / "marginals.csv");
  EXPECT_EQ(marginals.rows.size(), 2u * 3u * 101u);
  EXPECT_TRUE(fs::is_regular_file(dir / "fields" / "window_0002.csv"));
  EXPECT_THROW(report(dir / "nothing"), IoError);
  fs::remove_all(dir);
}

int run(const std::string& args) {
  const std::string cmd = std::string(SDCI_CLI_PATH) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

TEST(Cli, ExitCodes) {
  const fs::path dir = scratch("cli");
  EXPECT_EQ(run("--help"), 0);
  EXPECT_EQ(run("estimate --no-such-flag"), 2);
  EXPECT_EQ(run("generate-truth --model linear --eps-pred -1 -o " + dir.string()), 2);
  EXPECT_EQ(run("generate-truth --model linear --set linear.sensors=\"many\" -o " + dir.string()), 2);
  EXPECT_EQ(run("report " + (dir / "empty").string()), 3);
  EXPECT_EQ(run("generate-truth --model linear -o " + dir.string()), 0);
  EXPECT_EQ(run("estimate --model linear -o " + dir.string()), 0);
  EXPECT_EQ(run("report " + dir.string()), 0);
  EXPECT_TRUE(fs::is_regular_file(dir / "report" / "series.csv"));
  fs::remove_all(dir);
}

}  // namespace
}  // namespace sdci::experiment
