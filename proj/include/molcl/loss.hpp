// Copyright 2026 The molcl Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "molcl/error.hpp"
#include "molcl/fingerprint.hpp"
#include "molcl/nn/model.hpp"

namespace molcl {

/// How similarity weights enter the softmax denominator.
///  Literal:       every k != i term is exp(w_ik s_ik / tau), the positive included.
///  NegativesOnly: the positive's denominator term stays unweighted.
enum class WeightMode { Literal, NegativesOnly };

inline std::string_view weight_mode_name(WeightMode m) {
  return m == WeightMode::Literal ? "literal" : "negatives_only";
}

inline WeightMode parse_weight_mode(std::string_view s) {
  if (s == "literal") return WeightMode::Literal;
  if (s == "negatives_only") return WeightMode::NegativesOnly;
  throw Error(Errc::Config, "unknown weight mode '" + std::string(s) + "'");
}

struct LossConfig {
  double tau = 0.1;
  double lambda1 = 0.5;
  double lambda2 = 0.5;
  WeightMode weight_mode = WeightMode::Literal;

  void validate() const {
    if (!(tau > 0.0)) throw Error(Errc::Config, "tau must be > 0");
    if (!(lambda1 >= 0.0 && lambda1 <= 1.0)) throw Error(Errc::Config, "lambda1 must lie in [0,1]");
    if (!(lambda2 >= 0.0 && lambda2 <= 1.0)) throw Error(Errc::Config, "lambda2 must lie in [0,1]");
  }
};

template <class T>
struct LossValue {
  double value = 0.0;
  nn::Mat<T> grad;  // dL/dZ, same shape as Z
};

/// Positive pairs (row, row) over a fragment latent matrix.
struct FragmentPairIndex {
  std::vector<std::pair<int, int>> pairs;
  int n_rows() const { return 2 * static_cast<int>(pairs.size()); }
};

namespace detail {

inline constexpr double kMinNorm = 1e-12;

// Mean over anchors i of
//   -s_ij / tau + log sum_{k != i} exp(w_ik s_ik / tau),  j = partner[i],
// with cosine similarities s. `weight` may be null (all ones).
template <class T>
LossValue<T> contrastive(const nn::Mat<T>& z, const std::vector<int>& partner, const NegWeightMatrix* weight,
                         double tau, WeightMode mode) {
  if (!(tau > 0.0)) throw Error(Errc::DomainError, "temperature must be > 0");
  const int n = static_cast<int>(z.rows());
  std::vector<double> norm(n);
  nn::Mat<double> zh(n, z.cols());
  for (int i = 0; i < n; ++i) {
    const nn::Mat<double> row = z.row(i).template cast<double>();
    norm[i] = row.norm();
    if (!(norm[i] >= kMinNorm)) {
      if (!std::isfinite(norm[i])) throw Error(Errc::NonFinite, "latent row " + std::to_string(i) + " is not finite");
      throw Error(Errc::ZeroVector, "latent row " + std::to_string(i) + " has norm below 1e-12");
    }
    if (!std::isfinite(norm[i])) throw Error(Errc::NonFinite, "latent row " + std::to_string(i) + " is not finite");
    zh.row(i) = row / norm[i];
  }
  const nn::Mat<double> s = zh * zh.transpose();
  nn::Mat<double> g = nn::Mat<double>::Zero(n, n);  // dL/ds
  double total = 0.0;
  std::vector<double> logit(n);
  for (int i = 0; i < n; ++i) {
    const int j = partner[i];
    double mx = -std::numeric_limits<double>::infinity();
    std::vector<double> wk(n, 1.0);
    for (int k = 0; k < n; ++k) {
      if (k == i) continue;
      if (weight && !(mode == WeightMode::NegativesOnly && k == j)) wk[k] = (*weight)(i, k);
      logit[k] = wk[k] * s(i, k) / tau;
      mx = std::max(mx, logit[k]);
    }
    double sum = 0.0;
    for (int k = 0; k < n; ++k) {
      if (k != i) sum += std::exp(logit[k] - mx);
    }
    total += -s(i, j) / tau + mx + std::log(sum);
    for (int k = 0; k < n; ++k) {
      if (k == i) continue;
      g(i, k) += std::exp(logit[k] - mx) / sum * wk[k] / tau / n;
    }
    g(i, j) -= 1.0 / tau / n;
  }
  const nn::Mat<double> dzh = (g + g.transpose()) * zh;
  LossValue<T> out;
  out.value = total / n;
  out.grad.resize(n, z.cols());
  for (int i = 0; i < n; ++i) {
    const double radial = zh.row(i).dot(dzh.row(i));
    out.grad.row(i) = ((dzh.row(i) - radial * zh.row(i)) / norm[i]).template cast<T>();
  }
  return out;
}

inline std::vector<int> adjacent_partners(int rows) {
  if (rows < 2 || rows % 2 != 0) {
    throw Error(Errc::ShapeMismatch, "latent matrix needs an even number (>= 2) of rows, got " + std::to_string(rows));
  }
  std::vector<int> p(rows);
  for (int i = 0; i < rows; ++i) p[i] = i ^ 1;
  return p;
}

}  // namespace detail

/// Normalized temperature-scaled cross entropy over 2N rows where rows 2n
/// and 2n + 1 are positives; averaged over all 2N anchors.
template <class T>
LossValue<T> nt_xent(const nn::Mat<T>& z, double tau) {
  return detail::contrastive(z, detail::adjacent_partners(static_cast<int>(z.rows())), nullptr, tau,
                             WeightMode::Literal);
}

/// nt_xent with similarity weights w_ik scaling the denominator logits.
template <class T>
LossValue<T> weighted_nt_xent(const nn::Mat<T>& z, const NegWeightMatrix& w, double tau,
                              WeightMode mode = WeightMode::Literal) {
  if (w.n != z.rows() || w.w.size() != static_cast<std::size_t>(w.n) * w.n) {
    throw Error(Errc::WeightShapeMismatch, "weight matrix is " + std::to_string(w.n) + " wide, latent matrix has " +
                                               std::to_string(z.rows()) + " rows");
  }
  return detail::contrastive(z, detail::adjacent_partners(static_cast<int>(z.rows())), &w, tau, mode);
}

/// Unweighted NT-Xent over fragment latents; every non-partner row is a negative.
template <class T>
LossValue<T> fragment_nt_xent(const nn::Mat<T>& zf, const FragmentPairIndex& index, double tau) {
  const int rows = static_cast<int>(zf.rows());
  std::vector<int> partner(rows, -1);
  for (const auto& [a, b] : index.pairs) {
    if (a < 0 || b < 0 || a >= rows || b >= rows || a == b || partner[a] >= 0 || partner[b] >= 0) {
      throw Error(Errc::UnpairedRow, "fragment pair (" + std::to_string(a) + ", " + std::to_string(b) +
                                         ") is out of range or reuses a row");
    }
    partner[a] = b;
    partner[b] = a;
  }
  for (int i = 0; i < rows; ++i) {
    if (partner[i] < 0) throw Error(Errc::UnpairedRow, "fragment row " + std::to_string(i) + " has no partner");
  }
  if (rows == 0) throw Error(Errc::UnpairedRow, "no fragment rows");
  return detail::contrastive(zf, partner, nullptr, tau, WeightMode::Literal);
}

template <class T>
struct TotalLoss {
  double value = 0.0;
  double mol = 0.0;
  double frag = 0.0;
  nn::Mat<T> d_mol;
  nn::Mat<T> d_frag;
};

/// L = L_mol + lambda2 * L_frag, gradients scaled accordingly.
template <class T>
TotalLoss<T> total_loss(LossValue<T> mol, LossValue<T> frag, double lambda2) {
  if (!std::isfinite(mol.value) || !std::isfinite(frag.value)) {
    throw Error(Errc::NonFinite, "non-finite loss term");
  }
  TotalLoss<T> out;
  out.mol = mol.value;
  out.frag = frag.value;
  out.value = mol.value + lambda2 * frag.value;
  out.d_mol = std::move(mol.grad);
  out.d_frag = std::move(frag.grad) * static_cast<T>(lambda2);
  return out;
}

}  // namespace molcl
