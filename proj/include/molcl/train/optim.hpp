// Copyright 2026 The molcl Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "molcl/error.hpp"
#include "molcl/nn/model.hpp"

namespace molcl::train {

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 1e-5;
  bool coupled_weight_decay = false;  // true: wd * theta is added to the gradient instead
};

/// First and second moments, one pair per parameter tensor, plus the step count.
template <class T>
struct AdamState {
  std::vector<nn::Mat<T>> m;
  std::vector<nn::Mat<T>> v;
  long long t = 0;
};

/// lr0 * 0.5 * (1 + cos(pi t / T)); T = 0 yields lr0.
inline double cosine_lr(long long t, long long total, double lr0) {
  if (t < 0 || total < 0 || t > total) {
    throw Error(Errc::DomainError,
                "cosine_lr step " + std::to_string(t) + " outside [0, " + std::to_string(total) + "]");
  }
  if (total == 0) return lr0;
  const double lr = lr0 * 0.5 * (1.0 + std::cos(std::numbers::pi * static_cast<double>(t) / static_cast<double>(total)));
  return lr > 0.0 ? lr : 0.0;
}

/// One Adam update over matching parameter and gradient lists. `lr_scale`
/// (optional, one entry per tensor) multiplies the learning rate per tensor.
/// The gradients are checked for finiteness before anything is modified.
template <class T>
void adam_step(const std::vector<nn::Mat<T>*>& params, const std::vector<const nn::Mat<T>*>& grads,
               AdamState<T>& state, double lr, const AdamConfig& cfg, const std::vector<double>* lr_scale = nullptr) {
  if (params.size() != grads.size() || (lr_scale && lr_scale->size() != params.size())) {
    throw Error(Errc::ShapeMismatch, "adam: parameter, gradient and scale lists differ in length");
  }
  if (state.m.empty()) {
    for (const auto* p : params) {
      state.m.push_back(nn::Mat<T>::Zero(p->rows(), p->cols()));
      state.v.push_back(nn::Mat<T>::Zero(p->rows(), p->cols()));
    }
  }
  if (state.m.size() != params.size()) throw Error(Errc::ShapeMismatch, "adam: state has a different tensor count");
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (params[i]->rows() != grads[i]->rows() || params[i]->cols() != grads[i]->cols() ||
        state.m[i].rows() != params[i]->rows() || state.m[i].cols() != params[i]->cols()) {
      throw Error(Errc::ShapeMismatch, "adam: tensor " + std::to_string(i) + " shape mismatch");
    }
    if (!grads[i]->allFinite()) throw Error(Errc::NonFiniteGrad, "adam: tensor " + std::to_string(i) + " has a non-finite gradient");
  }
  ++state.t;
  const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.t));
  const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.t));
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double step_lr = lr * (lr_scale ? (*lr_scale)[i] : 1.0);
    nn::Mat<T>& p = *params[i];
    const nn::Mat<T>& g = *grads[i];
    nn::Mat<T>& m = state.m[i];
    nn::Mat<T>& v = state.v[i];
    for (Eigen::Index k = 0; k < p.size(); ++k) {
      double theta = p.data()[k];
      double gk = g.data()[k];
      if (cfg.coupled_weight_decay) {
        gk += cfg.weight_decay * theta;
      } else {
        theta -= step_lr * cfg.weight_decay * theta;
      }
      const double mk = cfg.beta1 * m.data()[k] + (1.0 - cfg.beta1) * gk;
      const double vk = cfg.beta2 * v.data()[k] + (1.0 - cfg.beta2) * gk * gk;
      m.data()[k] = static_cast<T>(mk);
      v.data()[k] = static_cast<T>(vk);
      theta -= step_lr * (mk / bc1) / (std::sqrt(vk / bc2) + cfg.eps);
      p.data()[k] = static_cast<T>(theta);
    }
  }
}

/// Model overload: tensors in manifest order.
template <class T>
void adam_step(nn::GinModel<T>& model, const nn::GinModel<T>& grads, AdamState<T>& state, double lr,
               const AdamConfig& cfg, const std::vector<double>* lr_scale = nullptr) {
  std::vector<nn::Mat<T>*> p;
  std::vector<const nn::Mat<T>*> g;
  for (auto& [name, t] : model.params()) p.push_back(t);
  for (const auto& [name, t] : grads.params()) g.push_back(t);
  adam_step(p, g, state, lr, cfg, lr_scale);
}

}  // namespace molcl::train
