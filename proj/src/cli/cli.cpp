// Copyright 2026 The fuzzeval Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "fuzzeval/cli/cli.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "fuzzeval/campaign/campaign.hpp"
#include "fuzzeval/campaign/serialize.hpp"
#include "fuzzeval/dedup/dedup.hpp"
#include "fuzzeval/errors.hpp"
#include "fuzzeval/report/report.hpp"
#include "fuzzeval/stats/stats.hpp"

namespace fuzzeval::cli {
namespace {

namespace fs = std::filesystem;
using campaign::CampaignConfig;
using campaign::Engine;

// Thrown for bad flag values detected after parsing.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Options {
  std::string config;
  std::string out;
  std::string results;
  std::optional<std::uint32_t> trials;
  std::optional<double> timeout;
  std::optional<std::uint32_t> jobs;
  std::optional<std::uint64_t> rng_seed;
  std::string dedup = "raw";
  std::size_t frames = dedup::kDefaultStackFrames;
  std::string checkpoints;
  double level = 0.95;
};

std::vector<double> ParseCheckpoints(const std::string& csv) {
  std::vector<double> out;
  std::size_t start = 0;
  while (start <= csv.size()) {
    const std::size_t comma = std::min(csv.find(',', start), csv.size());
    const std::string item = csv.substr(start, comma - start);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), v);
    if (item.empty() || ec != std::errc() || ptr != item.data() + item.size() || v < 0.0) {
      throw UsageError("--checkpoints: bad time '" + item + "'");
    }
    out.push_back(v);
    start = comma + 1;
  }
  if (!std::is_sorted(out.begin(), out.end())) {
    throw UsageError("--checkpoints must be in increasing order");
  }
  return out;
}

void WriteText(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  f << text;
  if (!f) throw ExecutionError("cannot write " + path.string());
}

fs::path OutputDir(const Options& o) {
  const fs::path dir = o.out.empty() ? fs::path(o.results) : fs::path(o.out);
  fs::create_directories(dir);
  return dir;
}

int DoRun(const Options& o, bool simulate_only, std::ostream& out) {
  CampaignConfig config = campaign::LoadConfig(o.config);
  if (o.trials) config.trials = *o.trials;
  if (o.timeout) config.deadline = *o.timeout;
  if (o.jobs) config.workers = *o.jobs;
  if (o.rng_seed) config.master_rng_seed = *o.rng_seed;
  if (!o.checkpoints.empty()) config.checkpoints = ParseCheckpoints(o.checkpoints);
  config.Validate();
  if (simulate_only) {
    for (const auto& id : config.FuzzerIds()) {
      if (config.fuzzers.at(id).engine != Engine::kSimulated) {
        throw ConfigError("simulate: fuzzer '" + id + "' is not simulated");
      }
    }
  }

  campaign::ResultsWriter writer(o.out);
  try {
    const auto result = campaign::RunCampaign(
        config, [&](const TrialRecord& r) { writer.WriteTrial(r); });
    writer.Finish(config);
    out << fmt::format("{} trials written to {}\n", result.trials.size(), o.out);
  } catch (const campaign::CampaignError& e) {
    writer.Fail(config, e.cell().ToString(), e.what());
    throw;
  }
  return kExitOk;
}

struct Cell {
  std::string target;
  std::string seeds;
  auto operator<=>(const Cell&) const = default;
};

int DoCompare(const Options& o, std::ostream& out) {
  const auto loaded = campaign::LoadResults(o.results);
  if (loaded.trials.empty()) throw ConfigError("no trials in " + o.results);

  std::string fa, fb;
  if (loaded.manifest) {
    fa = loaded.manifest->config.fuzzer_a;
    fb = loaded.manifest->config.fuzzer_b;
  } else {
    std::set<std::string> ids;
    for (const auto& t : loaded.trials) ids.insert(t.fuzzer_id);
    if (ids.size() != 2) {
      throw ConfigError(fmt::format("compare needs exactly two fuzzers, found {}", ids.size()));
    }
    fa = *ids.begin();
    fb = *ids.rbegin();
  }

  std::map<Cell, std::pair<std::vector<TrialRecord>, std::vector<TrialRecord>>> cells;
  for (const auto& t : loaded.trials) {
    auto& slot = cells[Cell{t.target_id, t.seed_config_id}];
    if (t.fuzzer_id == fa) slot.first.push_back(t);
    if (t.fuzzer_id == fb) slot.second.push_back(t);
  }

  campaign::MetricOptions metric_options;
  metric_options.frames = o.frames;
  const auto metric = campaign::ParseMetric(o.dedup);
  std::vector<campaign::ComparisonResult> results;
  for (const auto& [cell, sides] : cells) {
    if (sides.first.empty() || sides.second.empty()) continue;
    std::vector<double> times;
    if (!o.checkpoints.empty()) {
      times = ParseCheckpoints(o.checkpoints);
    } else if (loaded.manifest) {
      times = loaded.manifest->config.EffectiveCheckpoints();
    } else {
      const double d = sides.first.front().deadline;
      times = {d / 4.0, d / 2.0, d};
    }
    for (double t : times) {
      try {
        results.push_back(
            campaign::Compare(sides.first, sides.second, t, metric, metric_options, o.level));
      } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
      }
    }
  }
  if (results.empty()) throw ConfigError("no cell has trials for both " + fa + " and " + fb);

  const fs::path dir = OutputDir(o);
  WriteText(dir / "comparison.csv", report::EmitComparisonCsv(results));
  out << report::EmitComparisonTable(results);
  return kExitOk;
}

int DoTriage(const Options& o, std::ostream& out) {
  const auto loaded = campaign::LoadResults(o.results);
  const auto metric = campaign::ParseMetric(o.dedup);
  const campaign::Labeler labeler = campaign::DefaultLabeler();

  std::vector<dedup::BugLabel> labels;
  std::vector<dedup::HashId> hashes;
  for (const auto& trial : loaded.trials) {
    for (std::size_t i = 0; i < trial.crashes.size(); ++i) {
      const CrashEvent& ev = trial.crashes[i];
      labels.push_back(labeler(trial, ev));
      switch (metric) {
        case campaign::Metric::kRaw:
          hashes.push_back(dedup::HashId::FromKey(
              campaign::KeyOf(trial).ToString() + "/" + std::to_string(i)));
          break;
        case campaign::Metric::kCoverageUnique:
          if (ev.profile.edges().empty()) {
            throw StrategyUnavailable("coverage dedup needs coverage profiles; trial " +
                                      campaign::KeyOf(trial).ToString() + " has none");
          }
          hashes.push_back(dedup::ProfileKey(ev.profile));
          break;
        case campaign::Metric::kStackHash:
          hashes.push_back(dedup::StackHash(ev.trace, o.frames));
          break;
        case campaign::Metric::kGroundTruth:
          hashes.push_back(dedup::HashId::FromKey(labels.back().ToString()));
          break;
      }
    }
  }
  const auto table = dedup::DedupReport(labels, hashes);
  const fs::path dir = OutputDir(o);
  WriteText(dir / "dedup.csv", report::EmitDedupCsv(table));
  out << fmt::format("{} crashing inputs, {} clusters, {} ground-truth bugs\n",
                     table.total_inputs, table.distinct_hashes, table.distinct_bugs);
  return kExitOk;
}

std::string SafeName(std::string s) {
  for (char& c : s) {
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '-' && c != '.' && c != '@') c = '_';
  }
  return s;
}

int DoReport(const Options& o, std::ostream& out) {
  const auto loaded = campaign::LoadResults(o.results);
  if (loaded.trials.empty()) throw ConfigError("no trials in " + o.results);
  const fs::path dir = OutputDir(o);
  WriteText(dir / "timeseries.csv", report::EmitTimeseriesCsv(loaded.trials));

  // cell -> fuzzer -> series
  std::map<Cell, std::map<std::string, std::vector<stats::CrashTimeSeries>>> cells;
  std::map<Cell, double> horizon;
  for (const auto& t : loaded.trials) {
    std::vector<double> times;
    for (const auto& ev : t.crashes) times.push_back(ev.at);
    const Cell cell{t.target_id, t.seed_config_id};
    cells[cell][t.fuzzer_id].push_back(stats::CrashTimeSeries::FromEvents(times));
    horizon[cell] = std::max(horizon[cell], t.deadline);
  }

  static constexpr const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                            "#ff7f0e", "#8c564b"};
  constexpr int kGridPoints = 101;
  std::size_t plots = 0;
  for (const auto& [cell, by_fuzzer] : cells) {
    std::vector<double> grid;
    for (int i = 0; i < kGridPoints; ++i) grid.push_back(horizon[cell] * i / (kGridPoints - 1));
    report::PlotSpec spec;
    spec.title = cell.target + " / " + cell.seeds;
    std::size_t k = 0;
    for (const auto& [fuzzer, series] : by_fuzzer) {
      spec.series.push_back(report::PlotSeries{
          fuzzer, stats::AggregateBand(series, grid, o.level), kColors[k++ % std::size(kColors)]});
    }
    WriteText(dir / (SafeName(cell.target) + "__" + SafeName(cell.seeds) + ".svg"),
              report::EmitSvgPlot(spec));
    ++plots;
  }
  out << fmt::format("{} plots and timeseries.csv written to {}\n", plots, dir.string());
  return kExitOk;
}

}  // namespace

int RunCli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"fuzzeval: multi-trial fuzzer evaluation"};
  app.require_subcommand(1);
  Options o;

  auto run_flags = [&](CLI::App* sub) {
    sub->add_option("--config", o.config, "campaign config JSON")->required();
    sub->add_option("--out", o.out, "results directory")->required();
    sub->add_option("--trials", o.trials, "override trials per cell")
        ->check(CLI::PositiveNumber);
    sub->add_option("--timeout", o.timeout, "override per-trial deadline in seconds")
        ->check(CLI::PositiveNumber);
    sub->add_option("--jobs", o.jobs, "parallel workers")->check(CLI::PositiveNumber);
    sub->add_option("--rng-seed", o.rng_seed, "override master RNG seed");
    sub->add_option("--checkpoints", o.checkpoints, "comma-separated report times (seconds)");
  };
  const std::vector<std::string> strategies = {"raw", "coverage", "stackhash", "groundtruth"};
  auto dedup_flags = [&](CLI::App* sub) {
    sub->add_option("results", o.results, "results directory")->required();
    sub->add_option("--out", o.out, "output directory (default: the results directory)");
    sub->add_option("--dedup", o.dedup, "crash metric")
        ->check(CLI::IsMember(strategies))
        ->capture_default_str();
    sub->add_option("--frames", o.frames, "stack frames hashed")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
  };

  auto* run = app.add_subcommand("run", "run a campaign");
  run_flags(run);
  auto* simulate = app.add_subcommand("simulate", "run a campaign of simulated fuzzers");
  run_flags(simulate);

  auto* compare = app.add_subcommand("compare", "Mann-Whitney comparison at checkpoints");
  dedup_flags(compare);
  compare->add_option("--checkpoints", o.checkpoints, "comma-separated report times (seconds)");
  compare->add_option("--level", o.level, "median CI level")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();

  auto* triage = app.add_subcommand("triage", "de-duplicate crashes, write dedup.csv");
  dedup_flags(triage);

  auto* report_cmd = app.add_subcommand("report", "write time-series CSV and SVG plots");
  report_cmd->add_option("results", o.results, "results directory")->required();
  report_cmd->add_option("--out", o.out, "output directory (default: the results directory)");
  report_cmd->add_option("--level", o.level, "band CI level")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    err << "fuzzeval: " << e.what() << '\n';
    return kExitValidation;
  }

  try {
    if (run->parsed()) return DoRun(o, false, out);
    if (simulate->parsed()) return DoRun(o, true, out);
    if (compare->parsed()) return DoCompare(o, out);
    if (triage->parsed()) return DoTriage(o, out);
    return DoReport(o, out);
  } catch (const ConfigError& e) {
    err << "fuzzeval: " << e.what() << '\n';
    return kExitValidation;
  } catch (const UsageError& e) {
    err << "fuzzeval: " << e.what() << '\n';
    return kExitValidation;
  } catch (const StrategyUnavailable& e) {
    err << "fuzzeval: " << e.what() << '\n';
    return kExitValidation;
  } catch (const std::invalid_argument& e) {
    err << "fuzzeval: " << e.what() << '\n';
    return kExitValidation;
  } catch (const std::exception& e) {
    err << "fuzzeval: " << e.what() << '\n';
    return kExitRuntime;
  }
}

}  // namespace fuzzeval::cli
