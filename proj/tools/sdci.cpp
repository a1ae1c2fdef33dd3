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

// sdci: generate-truth, estimate and report subcommands.

#include <cstdio>
#include <exception>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include <sdci/errors.hpp>
#include <sdci/experiment/config.hpp>
#include <sdci/experiment/drivers.hpp>

namespace {

using nlohmann::json;
namespace ex = sdci::experiment;

constexpr int kConfigExit = 2;
constexpr int kRuntimeExit = 3;

/// Command-line values that override the config file; unset options leave it untouched.
struct Overrides {
  std::string config_file;
  std::vector<std::string> sets;
  std::optional<std::string> model;
  std::optional<std::string> output_dir;
  std::optional<double> window_length;
  std::optional<double> horizon;
  std::optional<long long> ensemble_size;
  std::optional<double> noise_sigma;
  bool noiseless{false};
  std::optional<double> eps_pred;
  std::optional<double> eps_kl;
  std::optional<double> eps_samples;
  std::optional<int> q_max;
  std::optional<int> q_min;
  std::optional<int> increment;
  std::optional<std::string> drift_response;
  std::optional<unsigned long long> engine_seed;
  std::optional<unsigned long long> truth_seed;
  std::optional<unsigned long long> noise_seed;
};

void add_overrides(CLI::App& app, Overrides& o) {
  app.add_option("-c,--config", o.config_file, "JSON experiment file")->check(CLI::ExistingFile);
  app.add_option("--set", o.sets, "Override a field: dotted.path=JSON value (repeatable)");
  app.add_option("--model", o.model, "linear | seirs | heat | offline");
  app.add_option("-o,--output-dir", o.output_dir, "Results directory");
  app.add_option("--window-length", o.window_length);
  app.add_option("--horizon", o.horizon);
  app.add_option("-k,--ensemble-size", o.ensemble_size);
  app.add_option("--noise-sigma", o.noise_sigma);
  app.add_flag("--noiseless", o.noiseless, "Write packets without measurement noise");
  app.add_option("--eps-pred", o.eps_pred);
  app.add_option("--eps-kl", o.eps_kl);
  app.add_option("--eps-samples", o.eps_samples);
  app.add_option("--q-max", o.q_max);
  app.add_option("--q-min", o.q_min);
  app.add_option("--increment", o.increment, "Control 2 sample increment");
  app.add_option("--drift-response", o.drift_response, "resample | reweight");
  app.add_option("--seed", o.engine_seed, "Engine seed");
  app.add_option("--truth-seed", o.truth_seed);
  app.add_option("--noise-seed", o.noise_seed);
}

json read_file(const std::string& path) {
  std::ifstream in{path};
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw sdci::ConfigError("config: " + path + ": " + e.what());
  }
}

void assign(json& root, const std::string& dotted, json value) {
  json* node = &root;
  std::size_t start = 0;
  while (true) {
    const std::size_t dot = dotted.find('.', start);
    const std::string key = dotted.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (key.empty()) {
      throw sdci::ConfigError(dotted + ": malformed field path");
    }
    if (!node->is_object()) {
      *node = json::object();
    }
    if (dot == std::string::npos) {
      (*node)[key] = std::move(value);
      return;
    }
    node = &(*node)[key];
    start = dot + 1;
  }
}

template <typename T>
void put(json& root, const std::string& path, const std::optional<T>& value) {
  if (value) {
    assign(root, path, *value);
  }
}

ex::ExperimentConfig resolve(const Overrides& o) {
  json user = o.config_file.empty() ? json::object() : read_file(o.config_file);
  put(user, "model", o.model);
  put(user, "output_dir", o.output_dir);
  put(user, "window_length", o.window_length);
  put(user, "horizon", o.horizon);
  put(user, "ensemble_size", o.ensemble_size);
  put(user, "noise_sigma", o.noise_sigma);
  if (o.noiseless) {
    user["noiseless"] = true;
  }
  put(user, "thresholds.eps_pred", o.eps_pred);
  put(user, "thresholds.eps_kl", o.eps_kl);
  put(user, "thresholds.eps_samples", o.eps_samples);
  put(user, "thresholds.q_max", o.q_max);
  put(user, "thresholds.q_min", o.q_min);
  put(user, "thresholds.resample_increment", o.increment);
  put(user, "drift_response", o.drift_response);
  put(user, "seeds.engine", o.engine_seed);
  put(user, "seeds.truth", o.truth_seed);
  put(user, "seeds.noise", o.noise_seed);
  for (const std::string& entry : o.sets) {
    const std::size_t eq = entry.find('=');
    if (eq == std::string::npos) {
      throw sdci::ConfigError(entry + ": expected dotted.path=value");
    }
    const std::string raw = entry.substr(eq + 1);
    json value = json::parse(raw, nullptr, false);
    if (value.is_discarded()) {
      value = raw;
    }
    assign(user, entry.substr(0, eq), std::move(value));
  }
  return ex::config_from_json(user);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sequential data-consistent parameter estimation"};
  app.require_subcommand(1);

  Overrides truth_opts;
  CLI::App* truth = app.add_subcommand("generate-truth", "Write the truth and the noisy packet stream");
  add_overrides(*truth, truth_opts);

  Overrides est_opts;
  ex::EstimateOptions est;
  std::string packets;
  std::optional<int> max_windows;
  bool no_ensembles = false;
  CLI::App* estimate = app.add_subcommand("estimate", "Run the sequential estimator over a packet stream");
  add_overrides(*estimate, est_opts);
  estimate->add_option("--packets", packets, "Packet stream (default: <output-dir>/packets.jsonl)");
  estimate->add_flag("--resume", est.resume, "Continue from <output-dir>/checkpoint.json");
  estimate->add_option("--max-windows", max_windows, "Stop after this many windows")->check(CLI::NonNegativeNumber);
  estimate->add_flag("--no-ensembles", no_ensembles, "Skip per-window ensemble files");

  std::string report_dir;
  CLI::App* report = app.add_subcommand("report", "Write plot-ready tables for a results directory");
  report->add_option("directory", report_dir, "Results directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kConfigExit;
  }

  try {
    if (truth->parsed()) {
      const ex::ExperimentConfig config = resolve(truth_opts);
      const ex::TruthSummary s = ex::generate_truth(config);
      std::printf("wrote %zu packets (%zu observations) to %s\n", s.packets, s.observations,
                  s.packets_path.string().c_str());
    } else if (estimate->parsed()) {
      const ex::ExperimentConfig config = resolve(est_opts);
      if (!packets.empty()) {
        est.packets = packets;
      }
      est.max_windows = max_windows;
      est.write_ensembles = !no_ensembles;
      const ex::EstimateSummary s = ex::estimate(config, est);
      for (const auto& r : s.records) {
        std::printf("window %3d  q=%d  E=%.4f  KL=%.4f  eff=%.3f  %s%s\n", r.window_index, r.q_used, r.expected_ratio,
                    r.kl_dci, r.eff_fraction, std::string(sdci::to_string(r.decision)).c_str(),
                    r.change_point_flag ? "  change point" : "");
      }
      std::printf("%d windows processed%s\n", s.windows_processed, s.complete ? "" : " (stopped early)");
    } else if (report->parsed()) {
      ex::report(report_dir);
      std::printf("wrote %s/report\n", report_dir.c_str());
    }
  } catch (const sdci::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigExit;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kRuntimeExit;
  }
  return 0;
}
