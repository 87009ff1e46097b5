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

#include "rhd/config.h"

#include <charconv>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

#include "rhd/checksum.h"
#include "rhd/error.h"

namespace rhd::config {
namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

[[noreturn]] void bad_value(std::string_view what, std::string_view value) {
  fail(ErrorCode::kConfigError, "expected " + std::string(what) + ", got '" +
                                    std::string(value) + "'");
}

double to_real(std::string_view v) {
  double out = 0.0;
  const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || p != v.data() + v.size()) bad_value("a number", v);
  return out;
}

std::uint64_t to_u64(std::string_view v) {
  std::uint64_t out = 0;
  const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || p != v.data() + v.size()) bad_value("a non-negative integer", v);
  return out;
}

std::size_t to_count(std::string_view v) { return static_cast<std::size_t>(to_u64(v)); }

bool to_bool(std::string_view v) {
  if (v == "true") return true;
  if (v == "false") return false;
  bad_value("true or false", v);
}

double to_unit(std::string_view v) {
  const double x = to_real(v);
  if (!(x >= 0.0 && x <= 1.0)) bad_value("a value in [0, 1]", v);
  return x;
}

double to_positive(std::string_view v) {
  const double x = to_real(v);
  if (!(x > 0.0)) bad_value("a positive number", v);
  return x;
}

std::vector<std::string_view> split_list(std::string_view v) {
  std::vector<std::string_view> out;
  while (true) {
    const auto comma = v.find(',');
    out.push_back(trim(v.substr(0, comma)));
    if (comma == std::string_view::npos) break;
    v.remove_prefix(comma + 1);
  }
  for (auto item : out) {
    if (item.empty()) bad_value("a comma-separated list", v);
  }
  return out;
}

template <typename T, typename F>
std::vector<T> to_list(std::string_view v, F parse) {
  std::vector<T> out;
  for (auto item : split_list(v)) out.push_back(parse(item));
  return out;
}

template <typename F>
auto enum_value(std::string_view v, F parse) {
  try {
    return parse(v);
  } catch (const Error&) {
    bad_value("a known name", v);
  }
}

std::string real(double x) {
  char buf[32];
  const auto [p, ec] = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, p);
}

template <typename T, typename F>
std::string join(const std::vector<T>& xs, F print) {
  std::string out;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i > 0) out += ", ";
    out += print(xs[i]);
  }
  return out;
}

struct Field {
  std::string_view key;
  std::function<void(RunConfig&, std::string_view)> parse;
  std::function<std::string(const RunConfig&)> print;
};

const std::vector<Field>& fields() {
  using envgen::Alignment;
  using envgen::Complexity;
  using envgen::Density;
  static const std::vector<Field> table = {
      {"env",
       [](RunConfig& c, std::string_view v) { c.family = enum_value(v, envgen::parse_family); },
       [](const RunConfig& c) { return std::string(envgen::to_string(c.family)); }},
      {"density",
       [](RunConfig& c, std::string_view v) {
         if (v == "dense") c.design.density = Density::kDense;
         else if (v == "sparse") c.design.density = Density::kSparse;
         else bad_value("dense or sparse", v);
       },
       [](const RunConfig& c) {
         return std::string(c.design.density == Density::kDense ? "dense" : "sparse");
       }},
      {"alignment",
       [](RunConfig& c, std::string_view v) {
         if (v == "high") c.design.alignment = Alignment::kHigh;
         else if (v == "low") c.design.alignment = Alignment::kLow;
         else bad_value("high or low", v);
       },
       [](const RunConfig& c) {
         return std::string(c.design.alignment == Alignment::kHigh ? "high" : "low");
       }},
      {"complexity",
       [](RunConfig& c, std::string_view v) {
         if (v == "simple") c.design.complexity = Complexity::kSimple;
         else if (v == "complex") c.design.complexity = Complexity::kComplex;
         else bad_value("simple or complex", v);
       },
       [](const RunConfig& c) {
         return std::string(c.design.complexity == Complexity::kComplex ? "complex" : "simple");
       }},
      {"max_steps",
       [](RunConfig& c, std::string_view v) {
         c.max_steps = to_count(v);
         if (c.max_steps < 10) bad_value("an integer >= 10", v);
       },
       [](const RunConfig& c) { return std::to_string(c.max_steps); }},
      {"policy",
       [](RunConfig& c, std::string_view v) { c.policy = enum_value(v, envgen::parse_policy); },
       [](const RunConfig& c) { return std::string(envgen::to_string(c.policy)); }},
      {"episodes",
       [](RunConfig& c, std::string_view v) {
         c.episodes = to_count(v);
         if (c.episodes == 0) bad_value("a positive integer", v);
       },
       [](const RunConfig& c) { return std::to_string(c.episodes); }},
      {"seed", [](RunConfig& c, std::string_view v) { c.seed = to_u64(v); },
       [](const RunConfig& c) { return std::to_string(c.seed); }},
      {"injection_rate", [](RunConfig& c, std::string_view v) { c.injection_rate = to_unit(v); },
       [](const RunConfig& c) { return real(c.injection_rate); }},
      {"strength",
       [](RunConfig& c, std::string_view v) {
         c.strength = to_real(v);
         if (!(c.strength >= 0.0)) bad_value("a non-negative number", v);
       },
       [](const RunConfig& c) { return real(c.strength); }},
      {"onset",
       [](RunConfig& c, std::string_view v) { c.onset = enum_value(v, parse_temporal_pattern); },
       [](const RunConfig& c) { return std::string(to_string(c.onset)); }},
      {"category",
       [](RunConfig& c, std::string_view v) {
         if (v == "mixed") c.category.reset();
         else c.category = enum_value(v, parse_category);
       },
       [](const RunConfig& c) {
         return c.category ? std::string(to_string(*c.category)) : std::string("mixed");
       }},
      {"mitigation",
       [](RunConfig& c, std::string_view v) {
         if (v == "none") c.mitigation.reset();
         else c.mitigation = enum_value(v, mitigation::parse_technique);
       },
       [](const RunConfig& c) {
         return c.mitigation ? std::string(mitigation::to_string(*c.mitigation))
                             : std::string("none");
       }},
      {"intensity", [](RunConfig& c, std::string_view v) { c.intensity = to_unit(v); },
       [](const RunConfig& c) { return real(c.intensity); }},
      {"mitigation.rebalance_alpha_scale",
       [](RunConfig& c, std::string_view v) { c.rebalance_alpha_scale = to_unit(v); },
       [](const RunConfig& c) { return real(c.rebalance_alpha_scale); }},
      {"mitigation.multi_objective_weight",
       [](RunConfig& c, std::string_view v) { c.multi_objective_weight = to_unit(v); },
       [](const RunConfig& c) { return real(c.multi_objective_weight); }},
      {"reference_episodes",
       [](RunConfig& c, std::string_view v) { c.reference_episodes = to_count(v); },
       [](const RunConfig& c) { return std::to_string(c.reference_episodes); }},
      {"folds",
       [](RunConfig& c, std::string_view v) {
         c.folds = to_count(v);
         if (c.folds < 2) bad_value("an integer >= 2", v);
       },
       [](const RunConfig& c) { return std::to_string(c.folds); }},
      {"risk_threshold", [](RunConfig& c, std::string_view v) { c.risk_threshold = to_unit(v); },
       [](const RunConfig& c) { return real(c.risk_threshold); }},
      {"selective", [](RunConfig& c, std::string_view v) { c.selective = to_bool(v); },
       [](const RunConfig& c) { return std::string(c.selective ? "true" : "false"); }},
      {"adaptive_thresholds",
       [](RunConfig& c, std::string_view v) { c.adaptive_thresholds = to_bool(v); },
       [](const RunConfig& c) { return std::string(c.adaptive_thresholds ? "true" : "false"); }},
      {"tau_spec", [](RunConfig& c, std::string_view v) { c.params.tau_spec = to_positive(v); },
       [](const RunConfig& c) { return real(c.params.tau_spec); }},
      {"delta_rho", [](RunConfig& c, std::string_view v) { c.params.delta_rho = to_real(v); },
       [](const RunConfig& c) { return real(c.params.delta_rho); }},
      {"ppl_multiplier",
       [](RunConfig& c, std::string_view v) { c.params.ppl_multiplier = to_real(v); },
       [](const RunConfig& c) { return real(c.params.ppl_multiplier); }},
      {"contamination",
       [](RunConfig& c, std::string_view v) {
         const double x = to_real(v);
         if (!(x > 0.0 && x < 0.5)) bad_value("a value in (0, 0.5)", v);
         c.params.tampering.contamination = x;
       },
       [](const RunConfig& c) { return real(c.params.tampering.contamination); }},
      {"forest.trees",
       [](RunConfig& c, std::string_view v) {
         c.params.tampering.n_trees = to_count(v);
         if (c.params.tampering.n_trees == 0) bad_value("a positive integer", v);
       },
       [](const RunConfig& c) { return std::to_string(c.params.tampering.n_trees); }},
      {"forest.subsample",
       [](RunConfig& c, std::string_view v) {
         c.params.tampering.subsample = to_count(v);
         if (c.params.tampering.subsample < 2) bad_value("an integer >= 2", v);
       },
       [](const RunConfig& c) { return std::to_string(c.params.tampering.subsample); }},
      {"forest.seed",
       [](RunConfig& c, std::string_view v) { c.params.tampering.seed = to_u64(v); },
       [](const RunConfig& c) { return std::to_string(c.params.tampering.seed); }},
      {"initial_fraction",
       [](RunConfig& c, std::string_view v) {
         const double x = to_real(v);
         if (!(x > 0.0 && x <= 1.0)) bad_value("a value in (0, 1]", v);
         c.params.initial_fraction = x;
       },
       [](const RunConfig& c) { return real(c.params.initial_fraction); }},
      {"ratio_threshold",
       [](RunConfig& c, std::string_view v) { c.ratio_threshold = to_positive(v); },
       [](const RunConfig& c) { return real(c.ratio_threshold); }},
      {"factorial.envs",
       [](RunConfig& c, std::string_view v) {
         c.factorial_envs = to_list<envgen::EnvFamily>(
             v, [](std::string_view x) { return enum_value(x, envgen::parse_family); });
       },
       [](const RunConfig& c) {
         return join(c.factorial_envs,
                     [](envgen::EnvFamily f) { return std::string(envgen::to_string(f)); });
       }},
      {"factorial.seeds_per_cell",
       [](RunConfig& c, std::string_view v) {
         c.seeds_per_cell = to_count(v);
         if (c.seeds_per_cell < 2) bad_value("an integer >= 2", v);
       },
       [](const RunConfig& c) { return std::to_string(c.seeds_per_cell); }},
      {"factorial.episodes_per_run",
       [](RunConfig& c, std::string_view v) {
         c.episodes_per_run = to_count(v);
         if (c.episodes_per_run == 0) bad_value("a positive integer", v);
       },
       [](const RunConfig& c) { return std::to_string(c.episodes_per_run); }},
      {"factorial.scale",
       [](RunConfig& c, std::string_view v) {
         c.factorial_scale = to_real(v);
         if (!(c.factorial_scale >= 0.0 && c.factorial_scale <= 1.0)) {
           bad_value("a value in [0, 1]", v);
         }
       },
       [](const RunConfig& c) { return real(c.factorial_scale); }},
      {"mitigation.streams",
       [](RunConfig& c, std::string_view v) {
         c.mitigation_streams = to_count(v);
         if (c.mitigation_streams == 0) bad_value("a positive integer", v);
       },
       [](const RunConfig& c) { return std::to_string(c.mitigation_streams); }},
      {"mitigation.techniques",
       [](RunConfig& c, std::string_view v) {
         c.techniques = to_list<mitigation::Technique>(v, [](std::string_view x) {
           return enum_value(x, mitigation::parse_technique);
         });
       },
       [](const RunConfig& c) {
         return join(c.techniques,
                     [](mitigation::Technique t) { return std::string(mitigation::to_string(t)); });
       }},
      {"mitigation.intensities",
       [](RunConfig& c, std::string_view v) { c.intensities = to_list<double>(v, to_unit); },
       [](const RunConfig& c) { return join(c.intensities, real); }},
      {"sensitivity.tau_spec",
       [](RunConfig& c, std::string_view v) { c.tau_grid = to_list<double>(v, to_positive); },
       [](const RunConfig& c) { return join(c.tau_grid, real); }},
      {"sensitivity.delta_rho",
       [](RunConfig& c, std::string_view v) { c.delta_grid = to_list<double>(v, to_real); },
       [](const RunConfig& c) { return join(c.delta_grid, real); }},
      {"sensitivity.contamination",
       [](RunConfig& c, std::string_view v) {
         c.contamination_grid = to_list<double>(v, [](std::string_view x) {
           const double g = to_real(x);
           if (!(g > 0.0 && g < 0.5)) bad_value("a value in (0, 0.5)", x);
           return g;
         });
       },
       [](const RunConfig& c) { return join(c.contamination_grid, real); }},
      {"sensitivity.ppl_multiplier",
       [](RunConfig& c, std::string_view v) { c.ppl_grid = to_list<double>(v, to_real); },
       [](const RunConfig& c) { return join(c.ppl_grid, real); }},
  };
  return table;
}

}  // namespace

RunConfig parse_config(std::string_view text, std::string_view source) {
  RunConfig cfg;
  std::set<std::string, std::less<>> seen;
  bool schema = false;
  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text.remove_prefix(nl == std::string_view::npos ? text.size() : nl + 1);
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const std::string where = std::string(source) + ":" + std::to_string(line_no) + ": ";
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      fail(ErrorCode::kConfigError, where + "expected 'key = value', got '" + std::string(line) + "'");
    }
    const std::string_view key = trim(line.substr(0, eq));
    const std::string_view value = trim(line.substr(eq + 1));
    const std::string key_prefix = where + std::string(key) + ": ";
    if (!seen.insert(std::string(key)).second) {
      fail(ErrorCode::kConfigError, key_prefix + "duplicate key");
    }
    if (value.empty()) fail(ErrorCode::kConfigError, key_prefix + "missing value");
    try {
      if (key == "schema") {
        if (to_u64(value) != static_cast<std::uint64_t>(kConfigSchemaVersion)) {
          bad_value("schema " + std::to_string(kConfigSchemaVersion), value);
        }
        schema = true;
        continue;
      }
      const Field* field = nullptr;
      for (const Field& f : fields()) {
        if (f.key == key) field = &f;
      }
      if (field == nullptr) fail(ErrorCode::kConfigError, "unknown key");
      field->parse(cfg, value);
    } catch (const Error& e) {
      fail(ErrorCode::kConfigError, key_prefix + e.what());
    }
  }
  if (!schema) {
    fail(ErrorCode::kConfigError, std::string(source) + ": schema: missing 'schema = " +
                                      std::to_string(kConfigSchemaVersion) + "'");
  }
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  require(static_cast<bool>(in), ErrorCode::kConfigError, path + ": cannot open config");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str(), path);
}

std::string canonical_config(const RunConfig& cfg) {
  std::string out = "schema = " + std::to_string(kConfigSchemaVersion) + "\n";
  for (const Field& f : fields()) {
    out += std::string(f.key) + " = " + f.print(cfg) + "\n";
  }
  return out;
}

std::string config_hash(const RunConfig& cfg) {
  const std::string text = canonical_config(cfg);
  const auto h = fnv1a64({reinterpret_cast<const std::uint8_t*>(text.data()), text.size()});
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

envgen::EnvSpec env_of(const RunConfig& cfg) {
  return envgen::make_env(cfg.family, cfg.max_steps, cfg.design);
}

mitigation::MitigationSpec mitigation_spec(const RunConfig& cfg, mitigation::Technique technique,
                                           double intensity) {
  mitigation::MitigationSpec m;
  m.technique = technique;
  m.intensity = intensity;
  m.rebalance_alpha_scale = cfg.rebalance_alpha_scale;
  m.multi_objective_weight = cfg.multi_objective_weight;
  return m;
}

std::optional<mitigation::MitigationSpec> stream_mitigation(const RunConfig& cfg) {
  if (!cfg.mitigation) return std::nullopt;
  return mitigation_spec(cfg, *cfg.mitigation, cfg.intensity);
}

envgen::StreamConfig stream_of(const RunConfig& cfg) {
  envgen::StreamConfig sc;
  sc.env = env_of(cfg);
  sc.n_episodes = cfg.episodes;
  sc.seed = cfg.seed;
  sc.policy = cfg.policy;
  if (cfg.category) {
    sc.injection = {{*cfg.category, cfg.injection_rate, cfg.onset, cfg.strength}};
  } else {
    sc.injection = envgen::mixed_injection(cfg.injection_rate, cfg.strength, cfg.onset);
  }
  if (const auto m = stream_mitigation(cfg)) sc = mitigation::apply_mitigation(sc, *m);
  return sc;
}

experiments::BenchmarkConfig benchmark_of(const RunConfig& cfg) {
  experiments::BenchmarkConfig b;
  b.env = env_of(cfg);
  b.policy = cfg.policy;
  b.n_reference = cfg.reference_episodes;
  b.n_stream = cfg.episodes;
  b.injection_rate = cfg.injection_rate;
  b.strength = cfg.strength;
  b.onset = cfg.onset;
  if (cfg.category) {
    b.injection = {{*cfg.category, cfg.injection_rate, cfg.onset, cfg.strength}};
  }
  b.mitigation = stream_mitigation(cfg);
  b.seed = cfg.seed;
  b.params = cfg.params;
  b.folds = cfg.folds;
  b.risk_threshold = cfg.risk_threshold;
  b.selective = cfg.selective;
  b.adaptive_thresholds = cfg.adaptive_thresholds;
  b.ratio_threshold = cfg.ratio_threshold;
  return b;
}

}  // namespace rhd::config
