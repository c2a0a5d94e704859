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

// JSON persistence for campaigns.
//
// Results directory layout:
//   manifest.json          campaign config, status, trial file list
//   trials/<cell>.json     one TrialRecord each
//
// Trial documents use the TrialRecord field names, times in decimal
// seconds, inputs base64-encoded. Wall-clock timing lives under "timing"
// and is the only part that varies between identical reruns.

#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "fuzzeval/campaign/campaign.hpp"
#include "json.hpp"

namespace fuzzeval::campaign {

using Json = nlohmann::json;

Json TrialToJson(const TrialRecord& record);
// Throws std::invalid_argument on schema violations.
TrialRecord TrialFromJson(const Json& j);

Json ConfigToJson(const CampaignConfig& config);
// Field names mirror CampaignConfig. Throws ConfigError on bad input.
CampaignConfig ConfigFromJson(const Json& j);
CampaignConfig LoadConfig(const std::filesystem::path& path);

// "<fuzzer>__<target>__<seed>__<trial>.json" with unsafe characters
// replaced by '_'.
std::string TrialFileName(const TrialRecord& record);

// Writes JSON with two-space indentation and a trailing newline.
void WriteJsonFile(const std::filesystem::path& path, const Json& j);
Json ReadJsonFile(const std::filesystem::path& path);

struct Manifest {
  CampaignConfig config;
  std::string status = "complete";  // or "failed"
  std::optional<std::string> failed_cell;
  std::optional<std::string> error;
  std::vector<std::string> trial_files;  // relative to the results dir
};

Json ManifestToJson(const Manifest& m);
Manifest ManifestFromJson(const Json& j);

// Incrementally persists a campaign: each finished trial is written under
// trials/, the manifest at Finish() or Fail().
class ResultsWriter {
 public:
  explicit ResultsWriter(std::filesystem::path dir);
  void WriteTrial(const TrialRecord& record);
  void Finish(const CampaignConfig& config);
  void Fail(const CampaignConfig& config, const std::string& cell,
            const std::string& error);

 private:
  std::filesystem::path dir_;
  std::vector<std::string> files_;
};

struct LoadedResults {
  std::optional<Manifest> manifest;
  std::vector<TrialRecord> trials;  // sorted by CellKey
};

// Loads a results directory (manifest.json + trials/) or a directory of
// bare trial JSON files.
LoadedResults LoadResults(const std::filesystem::path& dir);

}  // namespace fuzzeval::campaign
