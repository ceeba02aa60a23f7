// Copyright 2026 The guidergen Authors.
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

#include "gsg/config.h"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "gsg/corpus.h"
#include "gsg/tensor.h"

namespace gsg {
namespace {

struct Field {
  std::function<void(const std::string&)> set;
  std::function<std::string()> get;
};

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
}

std::size_t to_size(const std::string& v) {
  std::size_t out = 0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size()) {
    throw ConfigError("expected a non-negative integer, got '" + v + "'");
  }
  return out;
}

double to_double(const std::string& v) {
  try {
    std::size_t used = 0;
    const double d = std::stod(v, &used);
    if (used == v.size()) return d;
  } catch (const std::exception&) {
  }
  throw ConfigError("expected a number, got '" + v + "'");
}

bool to_bool(const std::string& v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw ConfigError("expected true or false, got '" + v + "'");
}

std::string from_double(double d) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", d);
  return buf;
}

Field size_field(std::size_t& x) {
  return {[&x](const std::string& v) { x = to_size(v); },
          [&x] { return std::to_string(x); }};
}
Field u64_field(std::uint64_t& x) {
  return {[&x](const std::string& v) { x = to_size(v); },
          [&x] { return std::to_string(x); }};
}
Field double_field(double& x) {
  return {[&x](const std::string& v) { x = to_double(v); },
          [&x] { return from_double(x); }};
}
Field bool_field(bool& x) {
  return {[&x](const std::string& v) { x = to_bool(v); },
          [&x] { return std::string(x ? "true" : "false"); }};
}
Field windows_field(std::vector<std::size_t>& x) {
  return {[&x](const std::string& v) {
            std::string s = v;
            for (char& ch : s) ch = ch == ',' ? ' ' : ch;
            x.clear();
            for (const std::string& t : split_tokens(s)) x.push_back(to_size(t));
          },
          [&x] {
            std::string out;
            for (std::size_t w : x) out += (out.empty() ? "" : ",") + std::to_string(w);
            return out;
          }};
}

std::map<std::string, Field> fields(TrainConfig& c) {
  std::map<std::string, Field> f;
  f["seed"] = u64_field(c.seed);
  f["model.d_emb"] = size_field(c.model.d_emb);
  f["model.filters"] = size_field(c.model.filters);
  f["model.windows"] = windows_field(c.model.windows);
  f["model.hidden"] = size_field(c.model.hidden);
  f["model.guider_hidden"] = size_field(c.model.guider_hidden);
  f["model.max_len"] = size_field(c.model.max_len);
  f["model.lookahead"] = size_field(c.reward.lookahead);
  f["disc.d_emb"] = size_field(c.model.disc_d_emb);
  f["disc.filters"] = size_field(c.model.disc_filters);
  f["data.min_count"] = size_field(c.min_count);
  f["train.batch_size"] = size_field(c.batch_size);
  f["train.lr_encoder"] = double_field(c.lr_encoder);
  f["train.lr_generator"] = double_field(c.lr_generator);
  f["train.lr_guider"] = double_field(c.lr_guider);
  f["train.lr_disc"] = double_field(c.lr_disc);
  f["train.pretrain_epochs"] = size_field(c.pretrain_epochs);
  f["train.disc_pretrain_steps"] = size_field(c.disc_pretrain_steps);
  f["train.noise_init_prob"] = double_field(c.noise_init_prob);
  f["train.clip_norm"] = double_field(c.clip_norm);
  f["rl.steps"] = size_field(c.rl_steps);
  f["rl.total_steps"] = size_field(c.rl_total_steps);
  f["rl.batch_size"] = size_field(c.rl_batch_size);
  f["rl.g_steps"] = size_field(c.g_steps);
  f["rl.d_steps"] = size_field(c.d_steps);
  f["rl.lr_generator"] = double_field(c.rl_lr_generator);
  f["rl.lambda_start"] = double_field(c.lambda_start);
  f["rl.lambda_end"] = double_field(c.lambda_end);
  f["rl.temperature"] = double_field(c.temperature);
  f["rl.guider_refresh"] = bool_field(c.guider_refresh);
  f["rl.divergence_limit"] = double_field(c.divergence_limit);
  f["reward.gamma"] = double_field(c.reward.gamma);
  f["reward.mode"] = {
      [&c](const std::string& v) { c.reward.mode = parse_reward_mode(v); },
      [&c] { return to_string(c.reward.mode); }};
  f["reward.clamp"] = bool_field(c.reward.clamp);
  f["reward.relative_discount"] = bool_field(c.reward.relative_discount);
  f["reward.max_n"] = size_field(c.reward_max_n);
  f["reward.smoothing"] = bool_field(c.reward_smoothing);
  f["eval.every"] = size_field(c.eval_every);
  f["eval.num_samples"] = size_field(c.eval_samples);
  f["eval.max_n"] = size_field(c.eval_max_n);
  return f;
}

}  // namespace

void TrainConfig::set(const std::string& key, const std::string& value) {
  auto f = fields(*this);
  auto it = f.find(key);
  if (it == f.end()) throw ConfigError("unknown config key '" + key + "'");
  try {
    it->second.set(value);
  } catch (const ConfigError& e) {
    throw ConfigError(key + ": " + e.what());
  }
}

void TrainConfig::apply(const std::string& text) {
  std::istringstream in(text);
  std::string raw;
  std::size_t lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    const std::string line = trim(raw.substr(0, raw.find('#')));
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config line " + std::to_string(lineno) +
                        ": expected 'key = value'");
    }
    try {
      set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    } catch (const ConfigError& e) {
      throw ConfigError("config line " + std::to_string(lineno) + ": " +
                        e.what());
    }
  }
  validate();
}

void TrainConfig::apply_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  apply(ss.str());
}

std::string TrainConfig::to_text() const {
  TrainConfig copy = *this;
  std::string out;
  for (auto& [key, field] : fields(copy)) {
    out += key + " = " + field.get() + "\n";
  }
  return out;
}

std::vector<std::string> TrainConfig::keys() const {
  TrainConfig copy = *this;
  std::vector<std::string> out;
  for (auto& [key, field] : fields(copy)) out.push_back(key);
  return out;
}

void TrainConfig::validate() const {
  if (model.windows.empty()) throw ConfigError("model.windows is empty");
  for (std::size_t w : model.windows) {
    if (w == 0) throw ConfigError("model.windows entries must be >= 1");
  }
  if (model.d_emb == 0 || model.filters == 0 || model.hidden == 0 ||
      model.guider_hidden == 0 || model.disc_d_emb == 0 ||
      model.disc_filters == 0) {
    throw ConfigError("model sizes must be >= 1");
  }
  if (model.max_len == 0) throw ConfigError("model.max_len must be >= 1");
  if (batch_size == 0 || rl_batch_size == 0) {
    throw ConfigError("batch sizes must be >= 1");
  }
  if (!(noise_init_prob >= 0.0 && noise_init_prob <= 1.0)) {
    throw ConfigError("train.noise_init_prob must lie in [0, 1]");
  }
  if (!(clip_norm > 0.0)) throw ConfigError("train.clip_norm must be > 0");
  if (!(temperature >= 0.0)) throw ConfigError("rl.temperature must be >= 0");
  for (double l : {lambda_start, lambda_end}) {
    if (!(l >= 0.0 && l <= 1.0)) throw ConfigError("rl.lambda_* must lie in [0, 1]");
  }
  if (reward_max_n == 0 || eval_max_n == 0) {
    throw ConfigError("BLEU orders must be >= 1");
  }
  reward.validate();
}

TrainConfig TrainConfig::parse(const std::string& text) {
  TrainConfig c;
  c.apply(text);
  return c;
}

TrainConfig TrainConfig::load_file(const std::string& path) {
  TrainConfig c;
  c.apply_file(path);
  return c;
}

}  // namespace gsg
