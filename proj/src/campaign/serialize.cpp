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

#include "fuzzeval/campaign/serialize.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "fuzzeval/campaign/base64.hpp"
#include "fuzzeval/errors.hpp"

namespace fuzzeval::campaign {
namespace {

const Json& Field(const Json& j, const char* name) {
  if (!j.is_object() || !j.contains(name)) {
    throw std::invalid_argument(std::string("missing field '") + name + "'");
  }
  return j.at(name);
}

// Rejects keys outside `allowed`, so typos in configs are not ignored.
void CheckKeys(const Json& j, std::initializer_list<const char*> allowed,
               const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + " must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    const bool known = std::any_of(allowed.begin(), allowed.end(),
                                   [&](const char* a) { return key == a; });
    if (!known) throw ConfigError("unknown field '" + key + "' in " + where);
  }
}

bool Printable(const Bytes& b) {
  return std::all_of(b.begin(), b.end(), [](std::uint8_t c) { return c >= 0x20 && c < 0x7f; });
}

Json BytesPayload(const Bytes& b) {
  if (Printable(b)) return ToString(b);
  return Json{{"base64", Base64Encode(b)}};
}

Bytes PayloadBytes(const Json& j) {
  if (j.is_string()) return ToBytes(j.get<std::string>());
  if (j.is_object() && j.contains("base64") && j.size() == 1) {
    return Base64Decode(j.at("base64").get<std::string>());
  }
  throw ConfigError("literal seed must be a string or {\"base64\": ...}");
}

Json ProfileToJson(const StochasticProfile& p) {
  Json labels = Json::object();
  for (const auto& [label, prob] : p.label_distribution) labels[std::to_string(label)] = prob;
  Json j{{"kind", p.kind == StochasticProfile::Kind::kPoisson ? "poisson"
                                                              : "deterministic-schedule"},
         {"labels", labels}};
  if (p.kind == StochasticProfile::Kind::kPoisson) {
    j["rate"] = p.rate;
  } else {
    j["schedule"] = p.schedule;
  }
  return j;
}

StochasticProfile ProfileFromJson(const Json& j) {
  CheckKeys(j, {"kind", "rate", "schedule", "labels"}, "simulated profile");
  StochasticProfile p;
  const std::string kind = j.value("kind", "poisson");
  if (kind == "poisson") {
    p.kind = StochasticProfile::Kind::kPoisson;
  } else if (kind == "deterministic-schedule") {
    p.kind = StochasticProfile::Kind::kDeterministicSchedule;
  } else {
    throw ConfigError("unknown simulated profile kind '" + kind + "'");
  }
  p.rate = j.value("rate", 0.0);
  p.schedule = j.value("schedule", std::vector<double>{});
  if (j.contains("labels")) {
    p.label_distribution.clear();
    for (const auto& [key, prob] : j.at("labels").items()) {
      p.label_distribution[static_cast<std::uint32_t>(std::stoul(key))] = prob.get<double>();
    }
  }
  try {
    p.Validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  return p;
}

Json FuzzerToJson(const FuzzerSpec& f) {
  if (f.engine == Engine::kSimulated) {
    return Json{{"engine", "simulated"}, {"profile", ProfileToJson(f.simulated)}};
  }
  const auto& c = f.loop;
  Json j{{"engine", "loop"},
         {"mode", core::ModeName(c.mode)},
         {"schedule", core::ScheduleName(c.schedule)},
         {"max_input_size", c.max_input_size},
         {"clock", c.clock == core::ClockKind::kVirtual ? "virtual" : "wall"},
         {"exec_cost", c.exec_cost},
         {"min_one_iteration", c.min_one_iteration}};
  j["max_executions"] = c.max_executions ? Json(*c.max_executions) : Json(nullptr);
  return j;
}

FuzzerSpec FuzzerFromJson(const std::string& id, const Json& j) {
  const std::string where = "fuzzer '" + id + "'";
  CheckKeys(j, {"engine", "mode", "schedule", "max_executions", "max_input_size", "clock",
                "exec_cost", "min_one_iteration", "profile"},
            where);
  FuzzerSpec f;
  const std::string engine = j.value("engine", "loop");
  if (engine == "simulated") {
    f.engine = Engine::kSimulated;
    f.simulated = ProfileFromJson(Field(j, "profile"));
    return f;
  }
  if (engine != "loop") throw ConfigError(where + ": unknown engine '" + engine + "'");
  auto& c = f.loop;
  c.id = id;
  c.mode = core::ParseMode(j.value("mode", "greybox"));
  c.schedule = core::ParseSchedule(j.value("schedule", "round-robin"));
  if (j.contains("max_executions") && !j.at("max_executions").is_null()) {
    c.max_executions = j.at("max_executions").get<std::uint64_t>();
  }
  c.max_input_size = j.value("max_input_size", core::kDefaultMaxInputSize);
  const std::string clock = j.value("clock", "virtual");
  if (clock == "virtual") {
    c.clock = core::ClockKind::kVirtual;
  } else if (clock == "wall") {
    c.clock = core::ClockKind::kWall;
  } else {
    throw ConfigError(where + ": unknown clock '" + clock + "'");
  }
  c.exec_cost = j.value("exec_cost", c.exec_cost);
  if (!(c.exec_cost > 0.0)) throw ConfigError(where + ": exec_cost must be > 0");
  c.min_one_iteration = j.value("min_one_iteration", true);
  return f;
}

Json TargetToJson(const TargetSpec& t) {
  Json j{{"family", FamilyName(t.family)}};
  if (t.version) j["version"] = *t.version;
  if (t.path) j["path"] = *t.path;
  return j;
}

TargetSpec TargetFromJson(const Json& j) {
  CheckKeys(j, {"family", "version", "path"}, "target");
  TargetSpec t;
  t.family = ParseFamily(Field(j, "family").get<std::string>());
  if (j.contains("version")) t.version = j.at("version").get<std::uint32_t>();
  if (j.contains("path")) t.path = j.at("path").get<std::string>();
  try {
    t.Validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  return t;
}

std::string_view SeedKindName(SeedKind k) {
  switch (k) {
    case SeedKind::kEmpty:
      return "empty";
    case SeedKind::kLiteral:
      return "literal";
    case SeedKind::kFiles:
      return "files";
  }
  return "?";
}

Json SeedToJson(const SeedConfig& s) {
  Json j{{"id", s.id}, {"kind", SeedKindName(s.kind)}};
  if (s.kind == SeedKind::kLiteral) {
    Json payload = Json::array();
    for (const auto& b : s.literals) payload.push_back(BytesPayload(b));
    j["payload"] = payload;
  } else if (s.kind == SeedKind::kFiles) {
    j["payload"] = s.paths;
  }
  return j;
}

SeedConfig SeedFromJson(const Json& j) {
  CheckKeys(j, {"id", "kind", "payload"}, "seed config");
  SeedConfig s;
  s.id = Field(j, "id").get<std::string>();
  const std::string kind = Field(j, "kind").get<std::string>();
  if (kind == "empty") {
    s.kind = SeedKind::kEmpty;
    if (j.contains("payload")) {
      throw ConfigError("empty seed config '" + s.id + "' must not carry a payload");
    }
  } else if (kind == "literal") {
    s.kind = SeedKind::kLiteral;
    for (const auto& p : Field(j, "payload")) s.literals.push_back(PayloadBytes(p));
  } else if (kind == "files") {
    s.kind = SeedKind::kFiles;
    for (const auto& p : Field(j, "payload")) s.paths.push_back(p.get<std::string>());
  } else {
    throw ConfigError("unknown seed kind '" + kind + "'");
  }
  return s;
}

std::string Sanitize(std::string_view s) {
  std::string out(s);
  for (char& c : out) {
    const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
                    (c >= '0' && c <= '9') || c == '-' || c == '.' || c == '@';
    if (!ok) c = '_';
  }
  return out;
}

}  // namespace

Json TrialToJson(const TrialRecord& r) {
  Json crashes = Json::array();
  for (const auto& ev : r.crashes) {
    Json profile = Json::array();
    for (const Edge& e : ev.profile) profile.push_back({e.from, e.to});
    Json trace = Json::array();
    for (const Frame& f : ev.trace.frames) trace.push_back({{"unit", f.unit}, {"line", f.line}});
    crashes.push_back({{"at", ev.at},
                       {"input", Base64Encode(ev.input)},
                       {"profile", profile},
                       {"trace", trace}});
  }
  Json growth = Json::array();
  for (const auto& p : r.coverage_growth) growth.push_back({p.time, p.edges});
  return Json{{"fuzzer_id", r.fuzzer_id},
              {"target_id", r.target_id},
              {"seed_config_id", r.seed_config_id},
              {"trial_index", r.trial_index},
              {"rng_seed", r.rng_seed},
              {"deadline", r.deadline},
              {"crashes", crashes},
              {"coverage_growth", growth},
              {"executions", r.executions},
              {"timing", {{"wall_seconds", r.wall_seconds}}}};
}

TrialRecord TrialFromJson(const Json& j) {
  try {
    TrialRecord r;
    r.fuzzer_id = Field(j, "fuzzer_id").get<std::string>();
    r.target_id = Field(j, "target_id").get<std::string>();
    r.seed_config_id = Field(j, "seed_config_id").get<std::string>();
    r.trial_index = Field(j, "trial_index").get<std::uint32_t>();
    r.rng_seed = Field(j, "rng_seed").get<std::uint64_t>();
    r.deadline = Field(j, "deadline").get<double>();
    for (const auto& c : Field(j, "crashes")) {
      CrashEvent ev;
      ev.at = Field(c, "at").get<double>();
      ev.input = Base64Decode(Field(c, "input").get<std::string>());
      std::vector<Edge> edges;
      for (const auto& e : Field(c, "profile")) {
        edges.push_back(Edge{e.at(0).get<std::uint32_t>(), e.at(1).get<std::uint32_t>()});
      }
      ev.profile = CoverageProfile(std::move(edges));
      for (const auto& f : Field(c, "trace")) {
        ev.trace.frames.push_back(
            Frame{Field(f, "unit").get<std::string>(), Field(f, "line").get<std::uint32_t>()});
      }
      r.crashes.push_back(std::move(ev));
    }
    for (const auto& p : Field(j, "coverage_growth")) {
      r.coverage_growth.push_back({p.at(0).get<double>(), p.at(1).get<std::uint64_t>()});
    }
    r.executions = Field(j, "executions").get<std::uint64_t>();
    if (j.contains("timing")) r.wall_seconds = j.at("timing").value("wall_seconds", 0.0);
    for (std::size_t i = 1; i < r.crashes.size(); ++i) {
      if (r.crashes[i].at < r.crashes[i - 1].at) {
        throw std::invalid_argument("crash events not sorted by time");
      }
    }
    return r;
  } catch (const Json::exception& e) {
    throw std::invalid_argument(std::string("malformed trial JSON: ") + e.what());
  }
}

Json ConfigToJson(const CampaignConfig& c) {
  Json fuzzers = Json::object();
  for (const auto& [id, f] : c.fuzzers) fuzzers[id] = FuzzerToJson(f);
  Json targets = Json::array();
  for (const auto& t : c.targets) targets.push_back(TargetToJson(t));
  Json seeds = Json::array();
  for (const auto& s : c.seed_configs) seeds.push_back(SeedToJson(s));
  return Json{{"fuzzer_a", c.fuzzer_a},
              {"fuzzer_b", c.fuzzer_b},
              {"fuzzers", fuzzers},
              {"targets", targets},
              {"seed_configs", seeds},
              {"trials", c.trials},
              {"deadline", c.deadline},
              {"workers", c.workers},
              {"master_rng_seed", c.master_rng_seed},
              {"checkpoints", c.checkpoints}};
}

CampaignConfig ConfigFromJson(const Json& j) {
  CheckKeys(j, {"fuzzer_a", "fuzzer_b", "fuzzers", "targets", "seed_configs", "trials",
                "deadline", "workers", "master_rng_seed", "checkpoints"},
            "campaign config");
  try {
    CampaignConfig c;
    c.fuzzer_a = Field(j, "fuzzer_a").get<std::string>();
    c.fuzzer_b = Field(j, "fuzzer_b").get<std::string>();
    for (const auto& [id, f] : Field(j, "fuzzers").items()) c.fuzzers[id] = FuzzerFromJson(id, f);
    if (j.contains("targets")) {
      for (const auto& t : j.at("targets")) c.targets.push_back(TargetFromJson(t));
    }
    if (j.contains("seed_configs")) {
      for (const auto& s : j.at("seed_configs")) c.seed_configs.push_back(SeedFromJson(s));
    } else {
      c.seed_configs.push_back(SeedConfig{"empty", SeedKind::kEmpty, {}, {}});
    }
    c.trials = j.value("trials", kDefaultTrials);
    c.deadline = j.value("deadline", kDefaultDeadline);
    c.workers = j.value("workers", 1u);
    c.master_rng_seed = j.value("master_rng_seed", std::uint64_t{0});
    c.checkpoints = j.value("checkpoints", std::vector<double>{});
    return c;
  } catch (const Json::exception& e) {
    throw ConfigError(std::string("malformed campaign config: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("malformed campaign config: ") + e.what());
  }
}

CampaignConfig LoadConfig(const std::filesystem::path& path) {
  try {
    return ConfigFromJson(ReadJsonFile(path));
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
}

std::string TrialFileName(const TrialRecord& r) {
  return Sanitize(r.fuzzer_id) + "__" + Sanitize(r.target_id) + "__" +
         Sanitize(r.seed_config_id) + "__" + std::to_string(r.trial_index) + ".json";
}

void WriteJsonFile(const std::filesystem::path& path, const Json& j) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << j.dump(2) << '\n';
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

Json ReadJsonFile(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open " + path.string());
  try {
    return Json::parse(in);
  } catch (const Json::exception& e) {
    throw std::invalid_argument("malformed JSON in " + path.string() + ": " + e.what());
  }
}

Json ManifestToJson(const Manifest& m) {
  Json j{{"config", ConfigToJson(m.config)},
         {"status", m.status},
         {"trial_files", m.trial_files}};
  if (m.failed_cell) j["failed_cell"] = *m.failed_cell;
  if (m.error) j["error"] = *m.error;
  return j;
}

Manifest ManifestFromJson(const Json& j) {
  Manifest m;
  m.config = ConfigFromJson(Field(j, "config"));
  m.status = j.value("status", "complete");
  if (j.contains("failed_cell")) m.failed_cell = j.at("failed_cell").get<std::string>();
  if (j.contains("error")) m.error = j.at("error").get<std::string>();
  m.trial_files = j.value("trial_files", std::vector<std::string>{});
  return m;
}

ResultsWriter::ResultsWriter(std::filesystem::path dir) : dir_(std::move(dir)) {
  std::filesystem::create_directories(dir_ / "trials");
}

void ResultsWriter::WriteTrial(const TrialRecord& record) {
  const std::string rel = "trials/" + TrialFileName(record);
  WriteJsonFile(dir_ / rel, TrialToJson(record));
  files_.push_back(rel);
}

void ResultsWriter::Finish(const CampaignConfig& config) {
  Manifest m;
  m.config = config;
  m.trial_files = files_;
  std::sort(m.trial_files.begin(), m.trial_files.end());
  WriteJsonFile(dir_ / "manifest.json", ManifestToJson(m));
}

void ResultsWriter::Fail(const CampaignConfig& config, const std::string& cell,
                         const std::string& error) {
  Manifest m;
  m.config = config;
  m.status = "failed";
  m.failed_cell = cell;
  m.error = error;
  m.trial_files = files_;
  std::sort(m.trial_files.begin(), m.trial_files.end());
  WriteJsonFile(dir_ / "manifest.json", ManifestToJson(m));
}

LoadedResults LoadResults(const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(dir)) throw ConfigError("not a results directory: " + dir.string());
  LoadedResults out;
  std::vector<fs::path> files;
  if (fs::exists(dir / "manifest.json")) {
    out.manifest = ManifestFromJson(ReadJsonFile(dir / "manifest.json"));
    for (const auto& rel : out.manifest->trial_files) files.push_back(dir / rel);
  } else {
    const fs::path trials_dir = fs::is_directory(dir / "trials") ? dir / "trials" : dir;
    for (const auto& entry : fs::directory_iterator(trials_dir)) {
      if (entry.is_regular_file() && entry.path().extension() == ".json") {
        files.push_back(entry.path());
      }
    }
  }
  for (const auto& f : files) out.trials.push_back(TrialFromJson(ReadJsonFile(f)));
  std::sort(out.trials.begin(), out.trials.end(),
            [](const TrialRecord& a, const TrialRecord& b) { return KeyOf(a) < KeyOf(b); });
  return out;
}

}  // namespace fuzzeval::campaign
