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

#include "rhd/bundle.h"

#include <algorithm>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "rhd/envgen.h"
#include "rhd/error.h"

namespace rhd {
namespace {

using nlohmann::json;

const json& at(const json& obj, const char* field) {
  auto it = obj.find(field);
  if (it == obj.end()) {
    fail(ErrorCode::kParseError, std::string("bundle: missing field '") + field + "'");
  }
  return *it;
}

double real_at(const json& obj, const char* field) {
  const json& j = at(obj, field);
  if (!j.is_number()) {
    fail(ErrorCode::kParseError, std::string("bundle: field '") + field + "' is not a number");
  }
  return j.get<double>();
}

template <typename T>
T count_at(const json& obj, const char* field) {
  const json& j = at(obj, field);
  if (!j.is_number_unsigned() && !(j.is_number_integer() && j.get<std::int64_t>() >= 0)) {
    fail(ErrorCode::kParseError,
         std::string("bundle: field '") + field + "' is not a non-negative integer");
  }
  return j.get<T>();
}

json range_json(const detect::ScoreRange& r) { return json::array({r.lo, r.hi}); }

detect::ScoreRange range_from(const json& j) {
  if (!j.is_array() || j.size() != 2) fail(ErrorCode::kParseError, "bundle: bad score range");
  return {j[0].get<double>(), j[1].get<double>()};
}

json scale_json(const detect::RatioScale& s) {
  return {{"window", s.window}, {"stride", s.stride}, {"lo", s.lo},
          {"hi", s.hi},         {"hist", s.baseline_hist}, {"enabled", s.enabled}};
}

detect::RatioScale scale_from(const json& j) {
  detect::RatioScale s;
  s.window = count_at<std::size_t>(j, "window");
  s.stride = count_at<std::size_t>(j, "stride");
  s.lo = real_at(j, "lo");
  s.hi = real_at(j, "hi");
  s.baseline_hist = at(j, "hist").get<std::vector<double>>();
  s.enabled = at(j, "enabled").get<bool>();
  return s;
}

json forest_json(const stats::IsolationForestModel& f) {
  json trees = json::array();
  for (const auto& tree : f.trees) {
    json nodes = json::array();
    for (const auto& n : tree.nodes) {
      nodes.push_back({n.split_dim, n.split_value, n.left, n.right, n.size, n.depth});
    }
    trees.push_back(std::move(nodes));
  }
  return {{"dim", f.dim},
          {"subsample", f.subsample_size},
          {"n_trees", f.n_trees},
          {"contamination", f.contamination},
          {"threshold", f.score_threshold},
          {"trees", std::move(trees)}};
}

stats::IsolationForestModel forest_from(const json& j) {
  stats::IsolationForestModel f;
  f.dim = count_at<std::size_t>(j, "dim");
  f.subsample_size = count_at<std::size_t>(j, "subsample");
  f.n_trees = count_at<std::size_t>(j, "n_trees");
  f.contamination = real_at(j, "contamination");
  f.score_threshold = real_at(j, "threshold");
  for (const json& nodes : at(j, "trees")) {
    stats::IsolationTree tree;
    for (const json& n : nodes) {
      if (!n.is_array() || n.size() != 6) fail(ErrorCode::kParseError, "bundle: bad tree node");
      stats::IsolationTree::Node node;
      node.split_dim = n[0].get<std::int32_t>();
      node.split_value = n[1].get<double>();
      node.left = n[2].get<std::int32_t>();
      node.right = n[3].get<std::int32_t>();
      node.size = n[4].get<std::int32_t>();
      node.depth = n[5].get<std::int32_t>();
      const auto limit = static_cast<std::int32_t>(nodes.size());
      if (node.split_dim >= static_cast<std::int32_t>(f.dim) || node.left >= limit ||
          node.right >= limit) {
        fail(ErrorCode::kParseError, "bundle: tree node out of range");
      }
      tree.nodes.push_back(node);
    }
    if (tree.nodes.empty()) fail(ErrorCode::kParseError, "bundle: empty tree");
    f.trees.push_back(std::move(tree));
  }
  if (f.trees.size() != f.n_trees) fail(ErrorCode::kParseError, "bundle: tree count mismatch");
  return f;
}

template <std::size_t N>
json array_json(const std::array<double, N>& a) {
  return json(std::vector<double>(a.begin(), a.end()));
}

template <std::size_t N>
std::array<double, N> array_from(const json& j) {
  const auto v = j.get<std::vector<double>>();
  if (v.size() != N) fail(ErrorCode::kParseError, "bundle: wrong array length");
  std::array<double, N> out{};
  std::copy(v.begin(), v.end(), out.begin());
  return out;
}

// Hash-map contents in key order, so equal models serialize identically.
json counts_json(const detect::TrigramModel::CountMap& m) {
  std::vector<std::pair<std::uint64_t, std::uint32_t>> items(m.begin(), m.end());
  std::sort(items.begin(), items.end());
  json out = json::array();
  for (const auto& [k, v] : items) out.push_back({k, v});
  return out;
}

detect::TrigramModel::CountMap counts_from(const json& j) {
  detect::TrigramModel::CountMap m;
  for (const json& item : j) m[item[0].get<std::uint64_t>()] = item[1].get<std::uint32_t>();
  return m;
}

json detector_json(const detect::DetectorSet& d, HackingCategory c) {
  json j = {{"kind", "detector"}, {"category", std::string(to_string(c))}};
  switch (c) {
    case HackingCategory::kSpecificationGaming: {
      const auto& m = d.spec;
      j["rho_baseline"] = m.rho_baseline;
      j["tau_spec"] = m.tau_spec;
      j["bins"] = m.bins;
      j["prior_windows"] = m.prior_windows;
      j["episode_scale"] = scale_json(m.episode_scale);
      j["segment_scale"] = scale_json(m.segment_scale);
      j["baseline_step_corr"] = m.baseline_step_corr;
      j["range"] = range_json(m.range);
      break;
    }
    case HackingCategory::kRewardTampering: {
      const auto& m = d.tampering;
      j["forest"] = forest_json(m.forest);
      j["feature_means"] = array_json(m.feature_means);
      j["feature_scales"] = array_json(m.feature_scales);
      j["degenerate"] = m.degenerate;
      j["range"] = range_json(m.range);
      break;
    }
    case HackingCategory::kProxyOptimization: {
      const auto& m = d.proxy;
      j["window"] = m.window;
      j["stride"] = m.stride;
      j["slope"] = m.expected_corr.slope;
      j["intercept"] = m.expected_corr.intercept;
      j["fit_index_lo"] = m.fit_index_lo;
      j["fit_index_hi"] = m.fit_index_hi;
      j["delta_threshold"] = m.delta_threshold;
      j["range"] = range_json(m.range);
      break;
    }
    case HackingCategory::kObjectiveMisalignment: {
      const auto& m = d.misalignment;
      j["space"] = {{"kind", m.space.is_discrete() ? "discrete" : "continuous"},
                    {"size", m.space.size}};
      j["quantizer"] = {{"continuous", m.quantizer.continuous},
                        {"bins", m.quantizer.bins_per_dim},
                        {"lo", m.quantizer.lo},
                        {"hi", m.quantizer.hi}};
      json vocab = json::array();
      for (const auto& [sym, id] : m.vocab) vocab.push_back({sym, id});
      j["vocab"] = std::move(vocab);
      j["vocab_size"] = m.ngram.vocab_size();
      j["trigrams"] = counts_json(m.ngram.trigram_counts());
      j["bigrams"] = counts_json(m.ngram.bigram_counts());
      j["mu_ppl"] = m.mu_ppl;
      j["sigma_ppl"] = m.sigma_ppl;
      j["sigma_multiplier"] = m.sigma_multiplier;
      j["threshold"] = m.threshold;
      j["range"] = range_json(m.range);
      break;
    }
    case HackingCategory::kExploitationPattern: {
      const auto& b = d.exploit.bounds;
      j["bounds"] = {{"median", b.median}, {"mad", b.mad}, {"q1", b.q1}, {"q3", b.q3},
                     {"iqr", b.iqr}};
      j["threshold"] = d.exploit.threshold;
      j["range"] = range_json(d.exploit.range);
      break;
    }
    case HackingCategory::kWireheading:
      j["reward_tolerance"] = d.wirehead.reward_tolerance;
      j["threshold"] = d.wirehead.threshold;
      j["registry"] = "catalog";
      break;
  }
  return j;
}

void detector_from(const json& j, detect::DetectorSet& d, HackingCategory c) {
  switch (c) {
    case HackingCategory::kSpecificationGaming: {
      auto& m = d.spec;
      m.rho_baseline = real_at(j, "rho_baseline");
      m.tau_spec = real_at(j, "tau_spec");
      m.bins = count_at<std::size_t>(j, "bins");
      m.prior_windows = real_at(j, "prior_windows");
      m.episode_scale = scale_from(at(j, "episode_scale"));
      m.segment_scale = scale_from(at(j, "segment_scale"));
      m.baseline_step_corr = real_at(j, "baseline_step_corr");
      m.range = range_from(at(j, "range"));
      break;
    }
    case HackingCategory::kRewardTampering: {
      auto& m = d.tampering;
      m.forest = forest_from(at(j, "forest"));
      m.feature_means = array_from<detect::kTamperingFeatureDim>(at(j, "feature_means"));
      m.feature_scales = array_from<detect::kTamperingFeatureDim>(at(j, "feature_scales"));
      m.degenerate = at(j, "degenerate").get<bool>();
      m.range = range_from(at(j, "range"));
      break;
    }
    case HackingCategory::kProxyOptimization: {
      auto& m = d.proxy;
      m.window = count_at<std::size_t>(j, "window");
      m.stride = count_at<std::size_t>(j, "stride");
      m.expected_corr.slope = real_at(j, "slope");
      m.expected_corr.intercept = real_at(j, "intercept");
      m.fit_index_lo = real_at(j, "fit_index_lo");
      m.fit_index_hi = real_at(j, "fit_index_hi");
      m.delta_threshold = real_at(j, "delta_threshold");
      m.range = range_from(at(j, "range"));
      break;
    }
    case HackingCategory::kObjectiveMisalignment: {
      auto& m = d.misalignment;
      const json& space = at(j, "space");
      const auto kind = at(space, "kind").get<std::string>();
      const auto size = count_at<std::size_t>(space, "size");
      m.space = kind == "continuous" ? ActionSpace::continuous(size) : ActionSpace::discrete(size);
      const json& q = at(j, "quantizer");
      m.quantizer.continuous = at(q, "continuous").get<bool>();
      m.quantizer.bins_per_dim = count_at<std::size_t>(q, "bins");
      m.quantizer.lo = at(q, "lo").get<std::vector<double>>();
      m.quantizer.hi = at(q, "hi").get<std::vector<double>>();
      m.vocab.clear();
      for (const json& item : at(j, "vocab")) {
        m.vocab[item[0].get<std::uint64_t>()] = item[1].get<std::uint32_t>();
      }
      m.ngram = detect::TrigramModel::from_counts(count_at<std::size_t>(j, "vocab_size"),
                                                  counts_from(at(j, "trigrams")),
                                                  counts_from(at(j, "bigrams")));
      m.mu_ppl = real_at(j, "mu_ppl");
      m.sigma_ppl = real_at(j, "sigma_ppl");
      m.sigma_multiplier = real_at(j, "sigma_multiplier");
      m.threshold = real_at(j, "threshold");
      m.range = range_from(at(j, "range"));
      break;
    }
    case HackingCategory::kExploitationPattern: {
      const json& b = at(j, "bounds");
      d.exploit.bounds = {real_at(b, "median"), real_at(b, "mad"), real_at(b, "q1"),
                          real_at(b, "q3"), real_at(b, "iqr")};
      d.exploit.threshold = real_at(j, "threshold");
      d.exploit.range = range_from(at(j, "range"));
      break;
    }
    case HackingCategory::kWireheading:
      d.wirehead = envgen::wirehead_registry();
      d.wirehead.reward_tolerance = real_at(j, "reward_tolerance");
      d.wirehead.threshold = real_at(j, "threshold");
      break;
  }
}

json ensemble_json(const ensemble::EnsembleModel& m) {
  json platt = json::array();
  for (const auto& p : m.platt) platt.push_back({p.a, p.b});
  return {{"kind", "ensemble"},
          {"weights", array_json(m.weights)},
          {"platt", std::move(platt)},
          {"platt_fitted", std::vector<bool>(m.platt_fitted.begin(), m.platt_fitted.end())},
          {"f1", array_json(m.f1)},
          {"f1_defined", std::vector<bool>(m.f1_defined.begin(), m.f1_defined.end())},
          {"risk_threshold", m.risk_threshold},
          {"calibrated", m.calibrated}};
}

ensemble::EnsembleModel ensemble_from(const json& j) {
  ensemble::EnsembleModel m;
  m.weights = array_from<kNumCategories>(at(j, "weights"));
  const json& platt = at(j, "platt");
  const auto fitted = at(j, "platt_fitted").get<std::vector<bool>>();
  const auto defined = at(j, "f1_defined").get<std::vector<bool>>();
  if (platt.size() != kNumCategories || fitted.size() != kNumCategories ||
      defined.size() != kNumCategories) {
    fail(ErrorCode::kParseError, "bundle: ensemble arrays must have 6 entries");
  }
  for (std::size_t k = 0; k < kNumCategories; ++k) {
    m.platt[k] = {platt[k][0].get<double>(), platt[k][1].get<double>()};
    m.platt_fitted[k] = fitted[k];
    m.f1_defined[k] = defined[k];
  }
  m.f1 = array_from<kNumCategories>(at(j, "f1"));
  m.risk_threshold = real_at(j, "risk_threshold");
  m.calibrated = at(j, "calibrated").get<bool>();
  return m;
}

}  // namespace

void write_bundle(std::ostream& out, const ModelBundle& b) {
  const json header = {{"kind", "header"},           {"format", "rhd-model-bundle"},
                       {"v", kBundleSchemaVersion},  {"seed", b.seed},
                       {"n_reference", b.n_reference}, {"warnings", b.warnings}};
  out << header.dump() << '\n';
  for (HackingCategory c : kAllCategories) out << detector_json(b.detectors, c).dump() << '\n';
  out << ensemble_json(b.ensemble).dump() << '\n';
  if (b.factors) {
    json envs = json::object();
    for (const auto& [env, f] : *b.factors) envs[env] = array_json(f);
    out << json{{"kind", "threshold_factors"}, {"envs", envs}}.dump() << '\n';
  }
}

ModelBundle read_bundle(std::istream& in) {
  ModelBundle b;
  std::string line;
  std::size_t line_no = 0;
  std::array<bool, kNumCategories> have{};
  bool header = false, ens = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      const json j = json::parse(line);
      const auto kind = at(j, "kind").get<std::string>();
      if (!header && kind != "header") fail(ErrorCode::kParseError, "bundle: header must come first");
      if (kind == "header") {
        if (at(j, "format") != "rhd-model-bundle") {
          fail(ErrorCode::kParseError, "bundle: not a model bundle");
        }
        if (at(j, "v") != kBundleSchemaVersion) {
          fail(ErrorCode::kParseError, "bundle: unsupported version " + at(j, "v").dump());
        }
        b.seed = count_at<std::uint64_t>(j, "seed");
        b.n_reference = count_at<std::size_t>(j, "n_reference");
        b.warnings = at(j, "warnings").get<std::vector<std::string>>();
        header = true;
      } else if (kind == "detector") {
        const HackingCategory c = parse_category(at(j, "category").get<std::string>());
        detector_from(j, b.detectors, c);
        have[index_of(c)] = true;
      } else if (kind == "ensemble") {
        b.ensemble = ensemble_from(j);
        ens = true;
      } else if (kind == "threshold_factors") {
        detect::ThresholdFactors f;
        for (const auto& [env, v] : at(j, "envs").items()) f[env] = array_from<kNumCategories>(v);
        b.factors = std::move(f);
      } else {
        fail(ErrorCode::kParseError, "bundle: unknown record kind '" + kind + "'");
      }
    } catch (const json::exception& e) {
      fail(ErrorCode::kParseError, "bundle line " + std::to_string(line_no) + ": " + e.what());
    } catch (const Error& e) {
      fail(ErrorCode::kParseError, "bundle line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  require(header, ErrorCode::kParseError, "bundle: missing header");
  for (HackingCategory c : kAllCategories) {
    require(have[index_of(c)], ErrorCode::kParseError,
            "bundle: missing detector " + std::string(to_string(c)));
  }
  require(ens, ErrorCode::kParseError, "bundle: missing ensemble");
  return b;
}

void save_bundle(const std::filesystem::path& path, const ModelBundle& bundle) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  require(static_cast<bool>(out), ErrorCode::kIoError, "cannot write " + path.string());
  write_bundle(out, bundle);
  require(static_cast<bool>(out), ErrorCode::kIoError, "write failed: " + path.string());
}

ModelBundle load_bundle(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  require(static_cast<bool>(in), ErrorCode::kIoError, "cannot read " + path.string());
  return read_bundle(in);
}

}  // namespace rhd
