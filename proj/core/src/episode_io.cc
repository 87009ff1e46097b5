/*
 * Copyright 2026 The rhd Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "rhd/episode_io.h"

#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>

#include <nlohmann/json.hpp>

#include "rhd/error.h"

namespace rhd {
namespace {

using nlohmann::json;

std::string to_hex(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016" PRIx64, v);
  return buf;
}

std::uint64_t from_hex(const std::string& s) {
  if (s.empty() || s.size() > 16) {
    fail(ErrorCode::kParseError, "bad checksum '" + s + "'");
  }
  std::uint64_t v = 0;
  for (char c : s) {
    int d;
    if (c >= '0' && c <= '9') d = c - '0';
    else if (c >= 'a' && c <= 'f') d = c - 'a' + 10;
    else if (c >= 'A' && c <= 'F') d = c - 'A' + 10;
    else fail(ErrorCode::kParseError, "bad checksum '" + s + "'");
    v = (v << 4) | static_cast<std::uint64_t>(d);
  }
  return v;
}

double as_real(const json& j, const char* field) {
  if (!j.is_number()) {
    fail(ErrorCode::kParseError, std::string("field '") + field + "' is not a number");
  }
  return j.get<double>();
}

const json& at(const json& obj, const char* field) {
  auto it = obj.find(field);
  if (it == obj.end()) {
    fail(ErrorCode::kParseError, std::string("missing field '") + field + "'");
  }
  return *it;
}

json label_to_json(const GroundTruth& g) {
  json j;
  j["is_hacking"] = g.is_hacking;
  if (g.category) j["category"] = std::string(to_string(*g.category));
  if (g.severity) j["severity"] = std::string(to_string(*g.severity));
  if (g.onset_step) j["onset_step"] = *g.onset_step;
  if (g.onset_episode_pattern) {
    j["onset_pattern"] = std::string(to_string(*g.onset_episode_pattern));
  }
  return j;
}

GroundTruth label_from_json(const json& j) {
  GroundTruth g;
  g.is_hacking = at(j, "is_hacking").get<bool>();
  if (j.contains("category")) {
    g.category = parse_category(j["category"].get<std::string>());
  }
  if (j.contains("severity")) {
    g.severity = parse_severity(j["severity"].get<std::string>());
  }
  if (j.contains("onset_step")) g.onset_step = j["onset_step"].get<std::int64_t>();
  if (j.contains("onset_pattern")) {
    g.onset_episode_pattern =
        parse_temporal_pattern(j["onset_pattern"].get<std::string>());
  }
  return g;
}

const char* const kKnownFields[] = {
    "v",     "id",    "env_id", "action_space", "seed",         "episode_index",
    "steps", "label", "meta",   "proxy_return", "true_return",
};

bool is_known(const std::string& key) {
  for (const char* k : kKnownFields) {
    if (key == k) return true;
  }
  return false;
}

}  // namespace

std::string serialize_episode(const Episode& e) {
  json j;
  j["v"] = kEpisodeSchemaVersion;
  j["id"] = e.id;
  j["env_id"] = e.env_id;
  j["action_space"] = {
      {"kind", e.action_space.is_discrete() ? "discrete" : "continuous"},
      {"size", e.action_space.size}};
  j["seed"] = e.seed;
  j["episode_index"] = e.episode_index;
  json steps = json::array();
  for (const Step& s : e.steps) {
    json js;
    js["t"] = s.t;
    if (const auto* sym = std::get_if<std::int64_t>(&s.action)) {
      js["a"] = *sym;
    } else {
      js["a"] = std::get<std::vector<double>>(s.action);
    }
    js["obs"] = s.obs_features;
    js["rp"] = s.proxy_reward;
    js["rt"] = s.true_reward;
    js["ck"] = to_hex(s.reward_checksum);
    steps.push_back(std::move(js));
  }
  j["steps"] = std::move(steps);
  if (e.label) j["label"] = label_to_json(*e.label);
  if (!e.meta.empty()) j["meta"] = e.meta;
  return j.dump();
}

Episode parse_episode(std::string_view line, std::int64_t default_index) {
  json j;
  try {
    j = json::parse(line.begin(), line.end());
  } catch (const json::exception& ex) {
    fail(ErrorCode::kParseError, std::string("malformed JSON: ") + ex.what());
  }
  if (!j.is_object()) fail(ErrorCode::kParseError, "episode line is not an object");

  try {
    if (j.contains("v") && j["v"].get<int>() != kEpisodeSchemaVersion) {
      fail(ErrorCode::kParseError,
           "unsupported schema version " + j["v"].dump());
    }
    Episode e;
    e.id = at(j, "id").get<std::string>();
    e.env_id = j.value("env_id", std::string());
    if (j.contains("action_space")) {
      const json& as = j["action_space"];
      const std::string kind = at(as, "kind").get<std::string>();
      const auto size = at(as, "size").get<std::size_t>();
      if (kind == "discrete") e.action_space = ActionSpace::discrete(size);
      else if (kind == "continuous") e.action_space = ActionSpace::continuous(size);
      else fail(ErrorCode::kParseError, "unknown action_space kind '" + kind + "'");
    }
    e.seed = j.value("seed", std::uint64_t{0});
    e.episode_index = j.contains("episode_index")
                          ? j["episode_index"].get<std::int64_t>()
                          : default_index;

    if (j.contains("steps")) {
      for (const json& js : j["steps"]) {
        Step s;
        s.t = at(js, "t").get<std::int64_t>();
        const json& a = at(js, "a");
        if (a.is_array()) {
          s.action = a.get<std::vector<double>>();
        } else {
          s.action = a.get<std::int64_t>();
        }
        if (js.contains("obs")) s.obs_features = js["obs"].get<std::vector<double>>();
        s.proxy_reward = as_real(at(js, "rp"), "rp");
        s.true_reward = as_real(at(js, "rt"), "rt");
        if (js.contains("ck")) s.reward_checksum = from_hex(js["ck"].get<std::string>());
        e.steps.push_back(std::move(s));
      }
    } else if (j.contains("proxy_return") && j.contains("true_return")) {
      // Episode-total import: one synthetic step.
      Step s;
      s.proxy_reward = as_real(j["proxy_return"], "proxy_return");
      s.true_reward = as_real(j["true_return"], "true_return");
      e.steps.push_back(std::move(s));
    } else {
      fail(ErrorCode::kParseError, "episode has neither 'steps' nor returns");
    }

    if (j.contains("label") && !j["label"].is_null()) {
      e.label = label_from_json(j["label"]);
    }
    if (j.contains("meta")) {
      e.meta = j["meta"].get<std::map<std::string, std::string>>();
    }
    for (const auto& [key, value] : j.items()) {
      if (!is_known(key)) e.unknown_fields[key] = value.dump();
    }
    return e;
  } catch (const json::exception& ex) {
    fail(ErrorCode::kParseError, std::string("bad episode field: ") + ex.what());
  }
}

void write_episodes(std::ostream& out, const std::vector<Episode>& episodes) {
  for (const Episode& e : episodes) {
    out << serialize_episode(e) << '\n';
  }
}

std::vector<Episode> read_episodes(std::istream& in) {
  std::vector<Episode> out;
  std::string line;
  std::int64_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line.find_first_not_of(" \t\r") == std::string::npos) {
      continue;
    }
    try {
      out.push_back(parse_episode(line, static_cast<std::int64_t>(out.size())));
    } catch (const Error& err) {
      fail(err.code(), "line " + std::to_string(line_no) + ": " + err.what());
    }
  }
  return out;
}

void write_episode_log(const std::filesystem::path& path,
                       const std::vector<Episode>& episodes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::kIoError, "cannot open " + path.string() + " for writing");
  write_episodes(out, episodes);
  if (!out) fail(ErrorCode::kIoError, "write failed for " + path.string());
}

std::vector<Episode> read_episode_log(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::kIoError, "cannot open " + path.string());
  return read_episodes(in);
}

}  // namespace rhd
