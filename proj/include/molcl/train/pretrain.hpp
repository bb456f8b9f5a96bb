// Copyright 2026 The molcl Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <limits>
#include <string>
#include <vector>

#include "molcl/chem/corpus.hpp"
#include "molcl/error.hpp"
#include "molcl/nn/checkpoint.hpp"
#include "molcl/nn/model.hpp"
#include "molcl/train/config.hpp"
#include "molcl/train/optim.hpp"
#include "molcl/train/pipeline.hpp"
#include "molcl/util/io.hpp"
#include "molcl/util/rng.hpp"

namespace molcl::train {

struct LogRow {
  long long step = 0;
  int epoch = 0;
  double lr = 0.0;
  StepLoss loss;
};

struct PretrainResult {
  nn::GinModel<float> best;   // lowest validation loss
  nn::GinModel<float> last;   // after the final step
  std::vector<LogRow> log;
  std::vector<double> epoch_train_loss;  // mean total loss per epoch
  std::vector<double> epoch_valid_loss;
  int best_epoch = 0;
  std::vector<int> train_indices;
  std::vector<int> valid_indices;
  int cache_checked = 0;
};

// Seed streams derived from the run seed.
inline constexpr std::uint64_t kStreamInit = 1;
inline constexpr std::uint64_t kStreamHoldout = 2;
inline constexpr std::uint64_t kStreamShuffle = 3;
inline constexpr std::uint64_t kStreamBatch = 4;
inline constexpr std::uint64_t kStreamValid = 5;
inline constexpr std::uint64_t kStreamCacheCheck = 6;
inline constexpr std::uint64_t kStreamHead = 7;

inline std::string format_g(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

inline std::string pretrain_log_csv(const std::vector<LogRow>& rows) {
  std::string out = "step,epoch,lr,loss_total,loss_mol,loss_frag\n";
  for (const auto& r : rows) {
    out += std::to_string(r.step) + "," + std::to_string(r.epoch) + "," + format_g(r.lr) + "," +
           format_g(r.loss.total) + "," + format_g(r.loss.mol) + "," + format_g(r.loss.frag) + "\n";
  }
  return out;
}

inline PrepOptions prep_options(const TrainConfig& cfg, const BricsRules* rules) {
  PrepOptions opt;
  opt.feature_set = cfg.model.feature_set;
  opt.radius = cfg.radius;
  opt.nbits = cfg.nbits;
  opt.rules = rules;
  opt.workers = cfg.deterministic ? 1 : util::resolve_workers(cfg.workers);
  return opt;
}

/// Holds out round(valid_fraction * n) molecules, clamped to [2, n - 2],
/// for validation; corpora under 4 molecules get no held-out slice.
inline void holdout_split(int n, double valid_fraction, std::uint64_t seed, std::vector<int>& train,
                          std::vector<int>& valid) {
  std::vector<int> order(n);
  for (int i = 0; i < n; ++i) order[i] = i;
  util::Rng rng(seed);
  rng.shuffle(order);
  int n_valid = 0;
  if (n >= 4) n_valid = std::clamp(static_cast<int>(std::lround(valid_fraction * n)), 2, n - 2);
  valid.assign(order.begin(), order.begin() + n_valid);
  train.assign(order.begin() + n_valid, order.end());
  std::sort(valid.begin(), valid.end());
  std::sort(train.begin(), train.end());
}

/// Mean total loss over the held-out slice, in chunks of batch_size (a final
/// chunk of at least 2 molecules is kept), with fixed augmentation seeds.
inline double validation_loss(const nn::GinModel<float>& model, const std::vector<MolEntry>& entries,
                              const std::vector<int>& valid, const TrainConfig& cfg) {
  double sum = 0.0;
  int count = 0;
  for (std::size_t b = 0; b < valid.size(); b += cfg.batch_size) {
    const std::size_t end = std::min(valid.size(), b + cfg.batch_size);
    if (end - b < 2) break;
    const std::span<const int> idx(valid.data() + b, end - b);
    const auto plan = make_batch_plan(entries, idx, util::derive_seed(cfg.seed, {kStreamValid, b}), cfg.loss.lambda1);
    const StepLoss l = pretrain_loss(model, plan, cfg.loss);
    sum += l.total * static_cast<double>(idx.size());
    count += static_cast<int>(idx.size());
  }
  return count > 0 ? sum / count : std::numeric_limits<double>::quiet_NaN();
}

inline std::string describe_batch(const BatchPlan& plan, const std::vector<MolEntry>& entries) {
  std::string s = "batch seed " + std::to_string(plan.seed) + ", corpus lines";
  for (int i : plan.sources) s += " " + std::to_string(entries[i].line);
  return s;
}

/// Contrastive pre-training over prepared entries. `on_epoch` (optional) is
/// called after every epoch with the partial result, e.g. to write artifacts.
template <class OnEpoch>
PretrainResult pretrain(const std::vector<MolEntry>& entries, const TrainConfig& cfg, const PrepOptions& prep,
                        OnEpoch&& on_epoch) {
  cfg.validate();
  const int n = static_cast<int>(entries.size());
  if (n < 2) throw Error(Errc::EmptyDataset, "pre-training needs at least 2 molecules");
  PretrainResult res;
  res.cache_checked = spot_check_cache(entries, prep, util::derive_seed(cfg.seed, {kStreamCacheCheck}));
  holdout_split(n, cfg.valid_fraction, util::derive_seed(cfg.seed, {kStreamHoldout}), res.train_indices,
                res.valid_indices);
  const int n_train = static_cast<int>(res.train_indices.size());
  const int batch = std::min(cfg.batch_size, n_train);
  const int per_epoch = n_train / batch;  // incomplete last batch dropped
  const long long total_steps = static_cast<long long>(per_epoch) * cfg.epochs;

  nn::ModelConfig mc = cfg.model;
  mc.n_targets = 0;
  nn::GinModel<float> model = nn::make_model<float>(mc, util::derive_seed(cfg.seed, {kStreamInit}));
  nn::GinModel<float> grads = nn::zeros_like(model);
  AdamState<float> state;
  AdamConfig adam = cfg.adam;
  res.best = model;
  double best_valid = std::numeric_limits<double>::infinity();
  long long step = 0;
  std::vector<int> order = res.train_indices;
  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    util::Rng shuffler(util::derive_seed(cfg.seed, {kStreamShuffle, static_cast<std::uint64_t>(epoch)}));
    order = res.train_indices;
    shuffler.shuffle(order);
    double epoch_sum = 0.0;
    for (int b = 0; b < per_epoch; ++b, ++step) {
      const std::span<const int> idx(order.data() + static_cast<std::size_t>(b) * batch, batch);
      const auto plan = make_batch_plan(
          entries, idx, util::derive_seed(cfg.seed, {kStreamBatch, static_cast<std::uint64_t>(epoch), static_cast<std::uint64_t>(b)}),
          cfg.loss.lambda1, prep.workers);
      grads.set_zero();
      StepLoss l;
      try {
        l = pretrain_loss(model, plan, cfg.loss, &grads);
      } catch (const Error& e) {
        throw Error(e.code(), e.message() + " (" + describe_batch(plan, entries) + ")");
      }
      if (!std::isfinite(l.total)) {
        throw Error(Errc::NonFinite, "non-finite loss (" + describe_batch(plan, entries) + ")");
      }
      const double lr = cfg.lr_schedule == LrSchedule::Cosine ? cosine_lr(step, total_steps, cfg.lr0) : cfg.lr0;
      try {
        adam_step(model, grads, state, lr, adam);
      } catch (const Error& e) {
        throw Error(e.code(), e.message() + " (" + describe_batch(plan, entries) + ")");
      }
      res.log.push_back({step, epoch, lr, l});
      epoch_sum += l.total;
    }
    res.epoch_train_loss.push_back(per_epoch > 0 ? epoch_sum / per_epoch : std::numeric_limits<double>::quiet_NaN());
    double v = res.valid_indices.empty() ? res.epoch_train_loss.back()
                                         : validation_loss(model, entries, res.valid_indices, cfg);
    res.epoch_valid_loss.push_back(v);
    if (std::isfinite(v) && v < best_valid) {
      best_valid = v;
      res.best = model;
      res.best_epoch = epoch;
    }
    res.last = model;
    on_epoch(res);
  }
  if (res.best_epoch == 0) res.best = model;
  return res;
}

inline PretrainResult pretrain(const std::vector<MolEntry>& entries, const TrainConfig& cfg, const PrepOptions& prep) {
  return pretrain(entries, cfg, prep, [](const PretrainResult&) {});
}

inline std::string valid_log_csv(const PretrainResult& r) {
  std::string out = "epoch,train_loss,valid_loss\n";
  for (std::size_t e = 0; e < r.epoch_train_loss.size(); ++e) {
    out += std::to_string(e + 1) + "," + format_g(r.epoch_train_loss[e]) + "," + format_g(r.epoch_valid_loss[e]) + "\n";
  }
  return out;
}

/// Full pre-training run: reads the corpus and writes into cfg.out
///   checkpoint.imcl   best validation-loss model
///   last.imcl         final model
///   train_log.csv     one row per optimizer step
///   epochs.csv        per-epoch training and validation loss
///   config.resolved   every effective setting
inline PretrainResult run_pretrain(const TrainConfig& cfg) {
  if (cfg.out.empty()) throw Error(Errc::Config, "missing required config key 'out'");
  const std::filesystem::path out(cfg.out);
  util::atomic_write(out / "config.resolved", resolved_config_text(cfg));
  BricsRules rules;
  const BricsRules* rp = nullptr;
  if (!cfg.rules.empty()) {
    rules = load_brics_rules(cfg.rules);
    rp = &rules;
  }
  const PrepOptions prep = prep_options(cfg, rp);
  const auto entries = prepare_corpus(chem::read_corpus_file(cfg.corpus), prep);
  auto result = pretrain(entries, cfg, prep, [&](const PretrainResult& r) {
    util::atomic_write(out / "train_log.csv", pretrain_log_csv(r.log));
    util::atomic_write(out / "epochs.csv", valid_log_csv(r));
    if (r.best_epoch == static_cast<int>(r.epoch_train_loss.size())) nn::save_checkpoint(r.best, out / "checkpoint.imcl");
  });
  nn::save_checkpoint(result.best, out / "checkpoint.imcl");
  nn::save_checkpoint(result.last, out / "last.imcl");
  return result;
}

}  // namespace molcl::train
