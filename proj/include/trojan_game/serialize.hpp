// Copyright 2026 The Authors.
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

#pragma once

// JSON checkpoints, JSON-lines traces and the report artifacts. Doubles are
// written in shortest round-trip form, so reloads are bit-exact.

#include <filesystem>
#include <string>

#include "json.hpp"
#include "trojan_game/baselines.hpp"
#include "trojan_game/detector.hpp"
#include "trojan_game/game.hpp"
#include "trojan_game/greedy.hpp"
#include "trojan_game/metrics.hpp"
#include "trojan_game/nn.hpp"

namespace trojan_game {

using Json = nlohmann::json;

Json model_to_json(const MlpModel& m);
MlpModel model_from_json(const Json& j);

Json detector_to_json(const DetectorModel& h);
DetectorModel detector_from_json(const Json& j);

Json trigger_to_json(const TriggerSpec& t);
TriggerSpec trigger_from_json(const Json& j);

Json record_to_json(const GameRecord& r);
GameRecord record_from_json(const Json& j);
std::string trace_to_jsonl(const GameTrace& t);
GameTrace trace_from_jsonl(const std::string& text);

Json report_to_json(const EvalReport& r);
Json greedy_to_json(const GreedyResult& r);
Json anomaly_to_json(const AnomalyReport& a);

// File helpers; failures raise IoError, malformed content ConfigError.
void write_text(const std::filesystem::path& path, const std::string& text);
std::string read_text(const std::filesystem::path& path);
void write_json(const std::filesystem::path& path, const Json& j);
Json read_json(const std::filesystem::path& path);

void save_model(const std::filesystem::path& path, const MlpModel& m,
                const std::string& config_hash = {});
MlpModel load_model(const std::filesystem::path& path);
void save_detector(const std::filesystem::path& path, const DetectorModel& h,
                   const std::string& config_hash = {});
DetectorModel load_detector(const std::filesystem::path& path);

// Round-trip formatting for CSV cells.
std::string format_double(double v);

}  // namespace trojan_game
