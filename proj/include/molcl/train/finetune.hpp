// Copyright 2026 The molcl Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <filesystem>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "molcl/chem/featurize.hpp"
#include "molcl/chem/smiles.hpp"
#include "molcl/error.hpp"
#include "molcl/fragment.hpp"
#include "molcl/nn/checkpoint.hpp"
#include "molcl/nn/encoder.hpp"
#include "molcl/train/config.hpp"
#include "molcl/train/dataset.hpp"
#include "molcl/train/metrics.hpp"
#include "molcl/train/optim.hpp"
#include "molcl/train/pretrain.hpp"
#include "molcl/util/io.hpp"
#include "molcl/util/parallel.hpp"
#include "molcl/util/rng.hpp"

namespace molcl::train {

/// Dataset molecules parsed and featurized for a given feature set.
struct LabeledSet {
  std::vector<chem::MolGraph> mols;
  std::vector<chem::FeaturizedGraph> graphs;
};

inline LabeledSet prepare_dataset(const Dataset& ds, chem::FeatureSet fs, int workers = 1) {
  if (ds.records.empty()) throw Error(Errc::EmptyDataset, "dataset has no records");
  LabeledSet s;
  const int n = static_cast<int>(ds.size());
  s.mols.resize(n);
  s.graphs.resize(n);
  util::parallel_for(n, workers, [&](int i) {
    try {
      s.mols[i] = chem::parse_smiles(ds.records[i].smiles);
    } catch (const Error& e) {
      throw Error(e.code(), "line " + std::to_string(ds.records[i].line) + ": " + e.message());
    }
    s.graphs[i] = chem::featurize(s.mols[i], fs);
  });
  return s;
}

/// Per-task affine map for regression targets; identity for classification.
struct TargetScale {
  std::vector<double> mean, std;
};

inline TargetScale fit_target_scale(const Dataset& ds, const std::vector<int>& idx) {
  TargetScale s;
  for (int t = 0; t < ds.n_tasks(); ++t) {
    double m = 0.0, m2 = 0.0;
    int c = 0;
    if (ds.task_types[t] == TaskType::Regression) {
      for (int i : idx) {
        if (const auto& y = ds.records[i].labels[t]) {
          m += *y;
          m2 += *y * *y;
          ++c;
        }
      }
    }
    const double mean = c > 0 ? m / c : 0.0;
    const double var = c > 0 ? m2 / c - mean * mean : 0.0;
    s.mean.push_back(mean);
    s.std.push_back(var > 1e-24 ? std::sqrt(var) : 1.0);
  }
  return s;
}

/// Masked per-label loss averaged over present labels: binary cross entropy
/// on logits for classification, squared error on scaled targets for
/// regression. Accumulates gradients when `grads` is non-null.
template <class T>
double finetune_loss(const nn::GinModel<T>& m, const Dataset& ds, const LabeledSet& data, std::span<const int> idx,
                     const TargetScale& scale, nn::GinModel<T>* grads = nullptr) {
  std::vector<const chem::FeaturizedGraph*> gs;
  for (int i : idx) gs.push_back(&data.graphs[i]);
  const nn::GraphBatch batch = nn::make_batch(gs);
  nn::EncodeTrace<T> et;
  const nn::Mat<T> h = nn::encode(m, batch, grads ? &et : nullptr);
  const nn::Mat<T> g = nn::readout_graph(h, batch);
  nn::MlpTrace<T> ty;
  const nn::Mat<T> y = nn::predict(m, g, &ty);
  nn::Mat<T> dy = nn::Mat<T>::Zero(y.rows(), y.cols());
  double total = 0.0;
  int count = 0;
  for (int r = 0; r < static_cast<int>(idx.size()); ++r) {
    const Record& rec = ds.records[idx[r]];
    for (int t = 0; t < ds.n_tasks(); ++t) {
      if (!rec.labels[t]) continue;
      const double x = y(r, t);
      ++count;
      if (ds.task_types[t] == TaskType::Classification) {
        const double lab = *rec.labels[t];
        total += std::max(x, 0.0) - x * lab + std::log1p(std::exp(-std::abs(x)));
        dy(r, t) = static_cast<T>(1.0 / (1.0 + std::exp(-x)) - lab);
      } else {
        const double target = (*rec.labels[t] - scale.mean[t]) / scale.std[t];
        total += (x - target) * (x - target);
        dy(r, t) = static_cast<T>(2.0 * (x - target));
      }
    }
  }
  if (count == 0) return 0.0;
  if (grads) {
    dy /= static_cast<T>(count);
    const nn::Mat<T> dg = nn::predict_backward(m, ty, dy, *grads);
    nn::encode_backward(m, et, nn::segment_mean_backward(dg, batch.graph_of_node), *grads);
  }
  return total / count;
}

/// Sets the prediction-head input standardization to the per-dimension
/// mean and inverse standard deviation of h_G over `idx` (scale 1 for
/// dimensions with std below 1e-8).
template <class T>
void fit_prediction_input(nn::GinModel<T>& m, const LabeledSet& data, std::span<const int> idx) {
  const int d = m.config.d;
  Eigen::ArrayXd sum = Eigen::ArrayXd::Zero(d), sq = Eigen::ArrayXd::Zero(d);
  const std::size_t chunk = 256;
  for (std::size_t b = 0; b < idx.size(); b += chunk) {
    const std::size_t e = std::min(idx.size(), b + chunk);
    std::vector<const chem::FeaturizedGraph*> gs;
    for (std::size_t i = b; i < e; ++i) gs.push_back(&data.graphs[idx[i]]);
    const nn::GraphBatch batch = nn::make_batch(gs);
    const nn::Mat<double> h = nn::readout_graph(nn::encode(m, batch), batch).template cast<double>();
    sum += h.colwise().sum().transpose().array();
    sq += h.array().square().colwise().sum().transpose();
  }
  const double n = static_cast<double>(idx.size());
  for (int k = 0; k < d; ++k) {
    const double mean = sum[k] / n;
    const double sd = std::sqrt(std::max(0.0, sq[k] / n - mean * mean));
    m.pred_shift(0, k) = static_cast<T>(mean);
    m.pred_scale(0, k) = static_cast<T>(sd > 1e-8 ? 1.0 / sd : 1.0);
  }
}

/// Predictions in label units (logits for classification), rows follow idx.
template <class T>
nn::Mat<double> predict_labels(const nn::GinModel<T>& m, const LabeledSet& data, std::span<const int> idx,
                               const Dataset& ds, const TargetScale& scale) {
  nn::Mat<double> out(static_cast<Eigen::Index>(idx.size()), ds.n_tasks());
  const std::size_t chunk = 256;
  for (std::size_t b = 0; b < idx.size(); b += chunk) {
    const std::size_t e = std::min(idx.size(), b + chunk);
    std::vector<const chem::FeaturizedGraph*> gs;
    for (std::size_t i = b; i < e; ++i) gs.push_back(&data.graphs[idx[i]]);
    const nn::GraphBatch batch = nn::make_batch(gs);
    const nn::Mat<double> y = nn::predict(m, nn::readout_graph(nn::encode(m, batch), batch)).template cast<double>();
    for (std::size_t i = b; i < e; ++i) {
      for (int t = 0; t < ds.n_tasks(); ++t) {
        double v = y(static_cast<Eigen::Index>(i - b), t);
        if (ds.task_types[t] == TaskType::Regression) v = v * scale.std[t] + scale.mean[t];
        out(static_cast<Eigen::Index>(i), t) = v;
      }
    }
  }
  return out;
}

struct TaskMetrics {
  std::string name;
  TaskType type = TaskType::Classification;
  int n = 0;
  std::optional<double> roc_auc, rmse, mae, scaled_rmse, scaled_mae;
};

struct EvalMetrics {
  double loss = 0.0;
  std::vector<TaskMetrics> tasks;
  std::optional<double> mean_roc_auc, mean_rmse, mean_mae, mean_scaled_rmse, mean_scaled_mae;
};

/// Label range per task over the whole dataset (0 when fewer than 2 values).
inline std::vector<double> label_ranges(const Dataset& ds) {
  std::vector<double> out;
  for (int t = 0; t < ds.n_tasks(); ++t) {
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (const auto& r : ds.records) {
      if (r.labels[t]) {
        lo = std::min(lo, *r.labels[t]);
        hi = std::max(hi, *r.labels[t]);
      }
    }
    out.push_back(hi > lo ? hi - lo : 0.0);
  }
  return out;
}

template <class T>
EvalMetrics evaluate(const nn::GinModel<T>& m, const Dataset& ds, const LabeledSet& data, std::span<const int> idx,
                     const TargetScale& scale) {
  EvalMetrics out;
  out.loss = finetune_loss(m, ds, data, idx, scale);
  const nn::Mat<double> pred = predict_labels(m, data, idx, ds, scale);
  const auto ranges = label_ranges(ds);
  auto mean_of = [&](auto field) -> std::optional<double> {
    double s = 0;
    int c = 0;
    for (const auto& t : out.tasks) {
      if (t.*field) {
        s += *(t.*field);
        ++c;
      }
    }
    return c > 0 ? std::optional<double>(s / c) : std::nullopt;
  };
  for (int t = 0; t < ds.n_tasks(); ++t) {
    TaskMetrics tm;
    tm.name = ds.label_names[t];
    tm.type = ds.task_types[t];
    std::vector<double> p, y;
    std::vector<int> cls;
    for (std::size_t r = 0; r < idx.size(); ++r) {
      if (const auto& lab = ds.records[idx[r]].labels[t]) {
        p.push_back(pred(static_cast<Eigen::Index>(r), t));
        y.push_back(*lab);
        cls.push_back(*lab != 0.0 ? 1 : 0);
      }
    }
    tm.n = static_cast<int>(p.size());
    if (tm.type == TaskType::Classification) {
      const bool both = std::count(cls.begin(), cls.end(), 1) > 0 && std::count(cls.begin(), cls.end(), 0) > 0;
      if (both) tm.roc_auc = roc_auc(p, cls);
    } else if (!p.empty()) {
      tm.rmse = rmse(p, y);
      tm.mae = mae(p, y);
      if (ranges[t] > 0.0) {
        tm.scaled_rmse = scaled_error(*tm.rmse, ranges[t]);
        tm.scaled_mae = scaled_error(*tm.mae, ranges[t]);
      }
    }
    out.tasks.push_back(std::move(tm));
  }
  out.mean_roc_auc = mean_of(&TaskMetrics::roc_auc);
  out.mean_rmse = mean_of(&TaskMetrics::rmse);
  out.mean_mae = mean_of(&TaskMetrics::mae);
  out.mean_scaled_rmse = mean_of(&TaskMetrics::scaled_rmse);
  out.mean_scaled_mae = mean_of(&TaskMetrics::scaled_mae);
  return out;
}

struct FinetuneLogRow {
  long long step = 0;
  int epoch = 0;
  double lr = 0.0;
  double loss = 0.0;
};

struct FinetuneResult {
  nn::GinModel<float> model;  // selected by validation metric
  Split split;
  TargetScale scale;
  int best_epoch = 0;
  std::string selection;  // which validation quantity picked the model
  std::vector<FinetuneLogRow> log;
  std::vector<double> epoch_train_loss;
  EvalMetrics train;
  std::optional<EvalMetrics> valid, test;
};

inline std::string finetune_log_csv(const std::vector<FinetuneLogRow>& rows) {
  std::string out = "step,epoch,lr,loss\n";
  for (const auto& r : rows) {
    out += std::to_string(r.step) + "," + std::to_string(r.epoch) + "," + format_g(r.lr) + "," + format_g(r.loss) + "\n";
  }
  return out;
}

/// Per-tensor learning-rate multipliers: prediction head 1, projection
/// heads 0 (unused downstream), encoder `encoder_lr_scale`.
template <class T>
std::vector<double> finetune_lr_scales(const nn::GinModel<T>& m, double encoder_lr_scale) {
  std::vector<double> out;
  for (const auto& [name, p] : m.params()) {
    if (name.rfind("pred.", 0) == 0) {
      out.push_back(1.0);
    } else if (name.rfind("proj.", 0) == 0 || name.rfind("frag_proj.", 0) == 0) {
      out.push_back(0.0);
    } else {
      out.push_back(encoder_lr_scale);
    }
  }
  return out;
}

/// Fine-tunes a pre-trained encoder with a fresh prediction head. Model
/// selection: max mean validation ROC-AUC when any classification task is
/// scorable, else min mean validation RMSE, else min validation loss, else
/// min training loss.
inline FinetuneResult finetune(const nn::GinModel<float>& pretrained, const Dataset& ds, const LabeledSet& data,
                               const TrainConfig& cfg, const Split& split) {
  cfg.validate();
  if (ds.task_types.size() != static_cast<std::size_t>(ds.n_tasks())) {
    throw Error(Errc::TaskTypeMismatch, "dataset task types do not cover every label column");
  }
  if (split.train.empty()) throw Error(Errc::EmptyDataset, "fine-tuning split has no training molecules");
  FinetuneResult res;
  res.split = split;
  res.scale = fit_target_scale(ds, split.train);
  nn::GinModel<float> model = pretrained;
  model.reset_prediction_head(ds.n_tasks());
  nn::init_prediction_head(model, util::derive_seed(cfg.seed, {kStreamHead}));
  fit_prediction_input(model, data, split.train);
  nn::GinModel<float> grads = nn::zeros_like(model);
  const std::vector<double> scales = finetune_lr_scales(model, cfg.encoder_lr_scale);
  AdamState<float> state;
  res.model = model;
  double best = std::numeric_limits<double>::infinity();
  long long step = 0;
  const int batch = cfg.batch_size;
  const long long per_epoch = (static_cast<long long>(split.train.size()) + batch - 1) / batch;
  const long long total_steps = per_epoch * cfg.epochs;
  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    std::vector<int> order = split.train;
    util::Rng shuffler(util::derive_seed(cfg.seed, {kStreamShuffle, static_cast<std::uint64_t>(epoch)}));
    shuffler.shuffle(order);
    double sum = 0.0;
    int batches = 0;
    for (std::size_t b = 0; b < order.size(); b += batch, ++step) {  // last partial batch kept
      const std::span<const int> idx(order.data() + b, std::min(order.size(), b + batch) - b);
      grads.set_zero();
      const double l = finetune_loss(model, ds, data, idx, res.scale, &grads);
      if (!std::isfinite(l)) throw Error(Errc::NonFinite, "non-finite fine-tuning loss at step " + std::to_string(step));
      const double lr = cfg.lr_schedule == LrSchedule::Cosine ? cosine_lr(step, total_steps, cfg.lr0) : cfg.lr0;
      adam_step(model, grads, state, lr, cfg.adam, &scales);
      res.log.push_back({step, epoch, lr, l});
      sum += l;
      ++batches;
    }
    res.epoch_train_loss.push_back(sum / batches);
    double score = res.epoch_train_loss.back();
    std::string sel = "train_loss";
    if (!split.valid.empty()) {
      const EvalMetrics v = evaluate(model, ds, data, split.valid, res.scale);
      if (v.mean_roc_auc) {
        score = -*v.mean_roc_auc;
        sel = "valid_roc_auc";
      } else if (v.mean_rmse) {
        score = *v.mean_rmse;
        sel = "valid_rmse";
      } else {
        score = v.loss;
        sel = "valid_loss";
      }
    }
    if (score < best) {
      best = score;
      res.best_epoch = epoch;
      res.model = model;
      res.selection = sel;
    }
  }
  res.train = evaluate(res.model, ds, data, split.train, res.scale);
  if (!split.valid.empty()) res.valid = evaluate(res.model, ds, data, split.valid, res.scale);
  if (!split.test.empty()) res.test = evaluate(res.model, ds, data, split.test, res.scale);
  return res;
}

inline nlohmann::ordered_json metrics_json(const EvalMetrics& m) {
  auto opt = [](const std::optional<double>& v) { return v ? nlohmann::ordered_json(*v) : nlohmann::ordered_json(); };
  nlohmann::ordered_json j;
  j["loss"] = m.loss;
  j["mean_roc_auc"] = opt(m.mean_roc_auc);
  j["mean_rmse"] = opt(m.mean_rmse);
  j["mean_mae"] = opt(m.mean_mae);
  j["mean_scaled_rmse"] = opt(m.mean_scaled_rmse);
  j["mean_scaled_mae"] = opt(m.mean_scaled_mae);
  j["tasks"] = nlohmann::ordered_json::array();
  for (const auto& t : m.tasks) {
    nlohmann::ordered_json tj;
    tj["name"] = t.name;
    tj["type"] = task_type_name(t.type);
    tj["n"] = t.n;
    if (t.type == TaskType::Classification) {
      tj["roc_auc"] = opt(t.roc_auc);
    } else {
      tj["rmse"] = opt(t.rmse);
      tj["mae"] = opt(t.mae);
      tj["scaled_rmse"] = opt(t.scaled_rmse);
      tj["scaled_mae"] = opt(t.scaled_mae);
    }
    j["tasks"].push_back(std::move(tj));
  }
  return j;
}

/// Metrics report; absent splits are null.
inline std::string finetune_report(const FinetuneResult& r) {
  nlohmann::ordered_json j;
  j["best_epoch"] = r.best_epoch;
  j["selection"] = r.selection;
  j["split"] = {{"train", r.split.train.size()}, {"valid", r.split.valid.size()}, {"test", r.split.test.size()},
                {"warnings", r.split.warnings}};
  j["target_mean"] = r.scale.mean;
  j["target_std"] = r.scale.std;
  j["train"] = metrics_json(r.train);
  j["valid"] = r.valid ? metrics_json(*r.valid) : nlohmann::ordered_json();
  j["test"] = r.test ? metrics_json(*r.test) : nlohmann::ordered_json();
  return j.dump(2) + "\n";
}

/// Full fine-tuning run. The encoder shape and feature set come from the
/// checkpoint. Writes into cfg.out:
///   finetuned.imcl    selected model
///   metrics.json      train / valid / test metrics
///   train_log.csv     one row per optimizer step
///   config.resolved   every effective setting
inline FinetuneResult run_finetune(TrainConfig cfg) {
  if (cfg.out.empty()) throw Error(Errc::Config, "missing required config key 'out'");
  const nn::GinModel<float> pretrained = nn::load_checkpoint(cfg.checkpoint);
  cfg.model = pretrained.config;
  cfg.model.n_targets = 0;
  const std::filesystem::path out(cfg.out);
  util::atomic_write(out / "config.resolved", resolved_config_text(cfg));
  const Dataset ds = load_dataset(cfg.dataset, cfg.tasks);
  const int workers = cfg.deterministic ? 1 : util::resolve_workers(cfg.workers);
  const LabeledSet data = prepare_dataset(ds, pretrained.config.feature_set, workers);
  const Split split = scaffold_split(data.mols, cfg.split_train, cfg.split_valid);
  FinetuneResult r = finetune(pretrained, ds, data, cfg, split);
  nn::save_checkpoint(r.model, out / "finetuned.imcl");
  util::atomic_write(out / "metrics.json", finetune_report(r));
  util::atomic_write(out / "train_log.csv", finetune_log_csv(r.log));
  return r;
}

}  // namespace molcl::train
