// Copyright 2026 The molcl Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "molcl/error.hpp"

namespace molcl::train {

/// 1-based ranks with ties sharing their average rank.
inline std::vector<double> average_ranks(std::span<const double> x) {
  const std::size_t n = x.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
  std::vector<double> rank(n);
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j + 1 < n && x[order[j + 1]] == x[order[i]]) ++j;
    const double r = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) rank[order[k]] = r;
    i = j + 1;
  }
  return rank;
}

/// Mann-Whitney U / (n_pos n_neg); ties count one half. Labels are 0/1.
inline double roc_auc(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size()) throw Error(Errc::ShapeMismatch, "roc_auc: scores and labels differ in length");
  const std::vector<double> rank = average_ranks(scores);
  double n_pos = 0, n_neg = 0, rank_sum = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] != 0) {
      n_pos += 1;
      rank_sum += rank[i];
    } else {
      n_neg += 1;
    }
  }
  if (n_pos == 0 || n_neg == 0) throw Error(Errc::SingleClass, "roc_auc needs both classes");
  return (rank_sum - n_pos * (n_pos + 1) / 2) / (n_pos * n_neg);
}

namespace detail {

inline void check_pair(std::span<const double> a, std::span<const double> b, const char* what) {
  if (a.empty()) throw Error(Errc::EmptyInput, std::string(what) + ": no values");
  if (a.size() != b.size()) throw Error(Errc::ShapeMismatch, std::string(what) + ": inputs differ in length");
}

}  // namespace detail

inline double rmse(std::span<const double> preds, std::span<const double> labels) {
  detail::check_pair(preds, labels, "rmse");
  double s = 0;
  for (std::size_t i = 0; i < preds.size(); ++i) s += (preds[i] - labels[i]) * (preds[i] - labels[i]);
  return std::sqrt(s / static_cast<double>(preds.size()));
}

inline double mae(std::span<const double> preds, std::span<const double> labels) {
  detail::check_pair(preds, labels, "mae");
  double s = 0;
  for (std::size_t i = 0; i < preds.size(); ++i) s += std::abs(preds[i] - labels[i]);
  return s / static_cast<double>(preds.size());
}

/// error / label_range.
inline double scaled_error(double error, double label_range) {
  if (!(label_range > 0.0)) throw Error(Errc::ZeroRange, "scaled_error: label range must be > 0");
  return error / label_range;
}

inline double pearson(std::span<const double> a, std::span<const double> b) {
  detail::check_pair(a, b, "pearson");
  const double n = static_cast<double>(a.size());
  const double ma = std::accumulate(a.begin(), a.end(), 0.0) / n;
  const double mb = std::accumulate(b.begin(), b.end(), 0.0) / n;
  double sab = 0, saa = 0, sbb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  if (!(saa > 0.0) || !(sbb > 0.0)) throw Error(Errc::ZeroRange, "pearson: constant input");
  return sab / std::sqrt(saa * sbb);
}

/// Pearson correlation of average ranks.
inline double spearman(std::span<const double> a, std::span<const double> b) {
  detail::check_pair(a, b, "spearman");
  const auto ra = average_ranks(a);
  const auto rb = average_ranks(b);
  return pearson(ra, rb);
}

}  // namespace molcl::train
