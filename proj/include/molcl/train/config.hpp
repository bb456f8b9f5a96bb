// Copyright 2026 The molcl Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <charconv>
#include <cstdint>
#include <filesystem>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "molcl/error.hpp"
#include "molcl/loss.hpp"
#include "molcl/nn/model.hpp"
#include "molcl/train/optim.hpp"
#include "molcl/util/io.hpp"

namespace molcl::train {

enum class TaskType { Classification, Regression };

inline std::string_view task_type_name(TaskType t) {
  return t == TaskType::Classification ? "classification" : "regression";
}

inline TaskType parse_task_type(std::string_view s) {
  if (s == "classification") return TaskType::Classification;
  if (s == "regression") return TaskType::Regression;
  throw Error(Errc::Config, "unknown task type '" + std::string(s) + "'");
}

enum class RunMode { Pretrain, Finetune };

/// Learning-rate schedule over the whole run.
enum class LrSchedule { Cosine, Constant };

inline std::string_view lr_schedule_name(LrSchedule s) { return s == LrSchedule::Cosine ? "cosine" : "constant"; }

inline LrSchedule parse_lr_schedule(std::string_view s) {
  if (s == "cosine") return LrSchedule::Cosine;
  if (s == "constant") return LrSchedule::Constant;
  throw Error(Errc::Config, "unknown lr_schedule '" + std::string(s) + "'");
}

struct TrainConfig {
  RunMode mode = RunMode::Pretrain;
  std::string corpus;      // pretrain: one SMILES per line
  std::string dataset;     // finetune: CSV with a smiles column
  std::string checkpoint;  // finetune: pre-trained encoder
  std::string out;         // output directory
  std::string rules;       // BRICS rule table; empty = built-in table
  std::vector<TaskType> tasks;  // finetune: one entry per label column, or one for all

  int epochs = 50;
  int batch_size = 512;
  double lr0 = 5e-4;
  LrSchedule lr_schedule = LrSchedule::Cosine;  // fine-tuning defaults to Constant
  double encoder_lr_scale = 1.0;  // finetune: encoder learning-rate multiplier
  AdamConfig adam;
  LossConfig loss;
  nn::ModelConfig model;
  int radius = 2;
  int nbits = 2048;
  std::uint64_t seed = 0;
  bool deterministic = true;
  int workers = 0;  // 0 = hardware concurrency
  double valid_fraction = 0.05;
  double split_train = 0.8;
  double split_valid = 0.1;
  double split_test = 0.1;

  void validate() const;
};

namespace detail {

inline std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

template <class N>
N parse_number(const std::string& key, const std::string& v) {
  N out{};
  const char* end = v.data() + v.size();
  const auto [ptr, ec] = std::from_chars(v.data(), end, out);
  if (ec != std::errc() || ptr != end) throw Error(Errc::Config, "config key '" + key + "': bad number '" + v + "'");
  return out;
}

inline bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw Error(Errc::Config, "config key '" + key + "': expected true or false, got '" + v + "'");
}

inline std::string fmt(double v) {
  std::ostringstream s;
  s.precision(17);
  s << v;
  return s.str();
}

}  // namespace detail

/// `key = value` lines; '#' starts a comment; later keys override earlier ones.
inline std::map<std::string, std::string> parse_key_values(std::string_view text) {
  std::map<std::string, std::string> out;
  std::istringstream in{std::string(text)};
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const std::string t = detail::trim(line);
    if (t.empty()) continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) {
      throw Error(Errc::Config, "config line " + std::to_string(lineno) + ": expected 'key = value'");
    }
    const std::string key = detail::trim(std::string_view(t).substr(0, eq));
    if (key.empty()) throw Error(Errc::Config, "config line " + std::to_string(lineno) + ": empty key");
    out[key] = detail::trim(std::string_view(t).substr(eq + 1));
  }
  return out;
}

inline void TrainConfig::validate() const {
  if (epochs < 1) throw Error(Errc::Config, "epochs must be positive");
  if (batch_size < 1) throw Error(Errc::Config, "batch_size must be positive");
  if (mode == RunMode::Pretrain && batch_size < 2) throw Error(Errc::Config, "pretraining needs batch_size >= 2");
  if (!(lr0 >= 0.0)) throw Error(Errc::Config, "lr must be >= 0");
  if (!(encoder_lr_scale >= 0.0)) throw Error(Errc::Config, "encoder_lr_scale must be >= 0");
  if (!(adam.weight_decay >= 0.0)) throw Error(Errc::Config, "weight_decay must be >= 0");
  if (!(valid_fraction > 0.0 && valid_fraction < 1.0)) throw Error(Errc::Config, "valid_fraction must lie in (0,1)");
  const double sum = split_train + split_valid + split_test;
  if (split_train <= 0.0 || split_valid < 0.0 || split_test < 0.0 || std::abs(sum - 1.0) > 1e-9) {
    throw Error(Errc::Config, "split ratios must be non-negative and sum to 1");
  }
  if (radius < 0) throw Error(Errc::Config, "radius must be >= 0");
  if (nbits < 1 || (nbits & (nbits - 1)) != 0) throw Error(Errc::Config, "nbits must be a power of two");
  if (workers < 0) throw Error(Errc::Config, "workers must be >= 0");
  loss.validate();
}

/// Builds a config from key/value pairs. Unknown keys and missing required
/// keys are Config errors naming the key.
inline TrainConfig train_config_from(const std::map<std::string, std::string>& kv, RunMode mode) {
  TrainConfig c;
  c.mode = mode;
  c.epochs = mode == RunMode::Pretrain ? 50 : 100;
  c.lr_schedule = mode == RunMode::Pretrain ? LrSchedule::Cosine : LrSchedule::Constant;
  std::set<std::string> seen;
  auto get = [&](const char* key) -> const std::string* {
    const auto it = kv.find(key);
    if (it == kv.end()) return nullptr;
    seen.insert(key);
    return &it->second;
  };
  auto req = [&](const char* key) -> const std::string& {
    const std::string* v = get(key);
    if (!v || v->empty()) throw Error(Errc::Config, std::string("missing required config key '") + key + "'");
    return *v;
  };
  if (mode == RunMode::Pretrain) {
    c.corpus = req("corpus");
  } else {
    c.dataset = req("dataset");
    c.checkpoint = req("checkpoint");
    std::istringstream tasks(req("tasks"));
    std::string t;
    while (std::getline(tasks, t, ',')) c.tasks.push_back(parse_task_type(detail::trim(t)));
  }
  if (const auto* v = get("out")) c.out = *v;
  if (const auto* v = get("rules")) c.rules = *v;
  if (const auto* v = get("epochs")) c.epochs = detail::parse_number<int>("epochs", *v);
  if (const auto* v = get("batch_size")) c.batch_size = detail::parse_number<int>("batch_size", *v);
  if (const auto* v = get("lr")) c.lr0 = detail::parse_number<double>("lr", *v);
  if (const auto* v = get("lr_schedule")) c.lr_schedule = parse_lr_schedule(*v);
  if (const auto* v = get("encoder_lr_scale")) c.encoder_lr_scale = detail::parse_number<double>("encoder_lr_scale", *v);
  if (const auto* v = get("weight_decay")) c.adam.weight_decay = detail::parse_number<double>("weight_decay", *v);
  if (const auto* v = get("coupled_weight_decay")) c.adam.coupled_weight_decay = detail::parse_bool("coupled_weight_decay", *v);
  if (const auto* v = get("adam_beta1")) c.adam.beta1 = detail::parse_number<double>("adam_beta1", *v);
  if (const auto* v = get("adam_beta2")) c.adam.beta2 = detail::parse_number<double>("adam_beta2", *v);
  if (const auto* v = get("adam_eps")) c.adam.eps = detail::parse_number<double>("adam_eps", *v);
  if (const auto* v = get("tau")) c.loss.tau = detail::parse_number<double>("tau", *v);
  if (const auto* v = get("lambda1")) c.loss.lambda1 = detail::parse_number<double>("lambda1", *v);
  if (const auto* v = get("lambda2")) c.loss.lambda2 = detail::parse_number<double>("lambda2", *v);
  if (const auto* v = get("weight_mode")) c.loss.weight_mode = parse_weight_mode(*v);
  if (const auto* v = get("d")) c.model.d = detail::parse_number<int>("d", *v);
  c.model.dz = c.model.d / 2 > 0 ? c.model.d / 2 : 1;
  if (const auto* v = get("dz")) c.model.dz = detail::parse_number<int>("dz", *v);
  if (const auto* v = get("layers")) c.model.layers = detail::parse_number<int>("layers", *v);
  if (const auto* v = get("feature_set")) c.model.feature_set = chem::parse_feature_set(*v);
  if (const auto* v = get("separate_fragment_head")) {
    c.model.separate_fragment_head = detail::parse_bool("separate_fragment_head", *v);
  }
  if (const auto* v = get("radius")) c.radius = detail::parse_number<int>("radius", *v);
  if (const auto* v = get("nbits")) c.nbits = detail::parse_number<int>("nbits", *v);
  if (const auto* v = get("seed")) c.seed = detail::parse_number<std::uint64_t>("seed", *v);
  if (const auto* v = get("deterministic")) c.deterministic = detail::parse_bool("deterministic", *v);
  if (const auto* v = get("workers")) c.workers = detail::parse_number<int>("workers", *v);
  if (const auto* v = get("valid_fraction")) c.valid_fraction = detail::parse_number<double>("valid_fraction", *v);
  if (const auto* v = get("split_train")) c.split_train = detail::parse_number<double>("split_train", *v);
  if (const auto* v = get("split_valid")) c.split_valid = detail::parse_number<double>("split_valid", *v);
  if (const auto* v = get("split_test")) c.split_test = detail::parse_number<double>("split_test", *v);
  for (const auto& [key, value] : kv) {
    if (!seen.count(key)) throw Error(Errc::Config, "unknown config key '" + key + "'");
  }
  if (c.model.d < 1 || c.model.dz < 1 || c.model.layers < 1) throw Error(Errc::Config, "d, dz and layers must be positive");
  c.validate();
  return c;
}

inline TrainConfig load_train_config(const std::filesystem::path& path, RunMode mode) {
  std::string text;
  try {
    text = util::read_file(path);
  } catch (const Error& e) {
    throw Error(Errc::Config, e.what());
  }
  return train_config_from(parse_key_values(text), mode);
}

/// Every effective setting, one `key = value` line each, in a fixed order.
inline std::string resolved_config_text(const TrainConfig& c) {
  std::ostringstream o;
  o << "# resolved " << (c.mode == RunMode::Pretrain ? "pretrain" : "finetune") << " configuration\n";
  if (c.mode == RunMode::Pretrain) {
    o << "corpus = " << c.corpus << "\n";
  } else {
    o << "dataset = " << c.dataset << "\n"
      << "checkpoint = " << c.checkpoint << "\n"
      << "tasks = ";
    for (std::size_t i = 0; i < c.tasks.size(); ++i) o << (i ? "," : "") << task_type_name(c.tasks[i]);
    o << "\n";
  }
  o << "out = " << c.out << "\n"
    << "rules = " << c.rules << "\n"
    << "epochs = " << c.epochs << "\n"
    << "batch_size = " << c.batch_size << "\n"
    << "lr = " << detail::fmt(c.lr0) << "\n"
    << "lr_schedule = " << lr_schedule_name(c.lr_schedule) << "\n"
    << "encoder_lr_scale = " << detail::fmt(c.encoder_lr_scale) << "\n"
    << "weight_decay = " << detail::fmt(c.adam.weight_decay) << "\n"
    << "coupled_weight_decay = " << (c.adam.coupled_weight_decay ? "true" : "false") << "\n"
    << "adam_beta1 = " << detail::fmt(c.adam.beta1) << "\n"
    << "adam_beta2 = " << detail::fmt(c.adam.beta2) << "\n"
    << "adam_eps = " << detail::fmt(c.adam.eps) << "\n"
    << "tau = " << detail::fmt(c.loss.tau) << "\n"
    << "lambda1 = " << detail::fmt(c.loss.lambda1) << "\n"
    << "lambda2 = " << detail::fmt(c.loss.lambda2) << "\n"
    << "weight_mode = " << weight_mode_name(c.loss.weight_mode) << "\n"
    << "d = " << c.model.d << "\n"
    << "dz = " << c.model.dz << "\n"
    << "layers = " << c.model.layers << "\n"
    << "feature_set = " << chem::feature_set_name(c.model.feature_set) << "\n"
    << "separate_fragment_head = " << (c.model.separate_fragment_head ? "true" : "false") << "\n"
    << "radius = " << c.radius << "\n"
    << "nbits = " << c.nbits << "\n"
    << "seed = " << c.seed << "\n"
    << "deterministic = " << (c.deterministic ? "true" : "false") << "\n"
    << "workers = " << c.workers << "\n"
    << "valid_fraction = " << detail::fmt(c.valid_fraction) << "\n"
    << "split_train = " << detail::fmt(c.split_train) << "\n"
    << "split_valid = " << detail::fmt(c.split_valid) << "\n"
    << "split_test = " << detail::fmt(c.split_test) << "\n";
  return o.str();
}

}  // namespace molcl::train
