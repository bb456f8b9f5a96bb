// Copyright 2026 The molcl Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "molcl/chem/smiles.hpp"
#include "molcl/error.hpp"
#include "molcl/fragment.hpp"
#include "molcl/train/config.hpp"
#include "molcl/util/io.hpp"

namespace molcl::train {

struct Record {
  int line = 0;  // 1-based line in the source file
  std::string smiles;
  std::vector<std::optional<double>> labels;
};

struct Dataset {
  std::vector<std::string> label_names;
  std::vector<TaskType> task_types;  // one per label column
  std::vector<Record> records;

  int n_tasks() const { return static_cast<int>(label_names.size()); }
  std::size_t size() const { return records.size(); }
};

namespace detail {

// One CSV row; double quotes group fields and "" escapes a quote.
inline std::vector<std::string> split_csv_row(const std::string& line, int lineno) {
  std::vector<std::string> out(1);
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        out.back() += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        out.back() += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.emplace_back();
    } else if (c != '\r') {
      out.back() += c;
    }
  }
  if (quoted) throw Error(Errc::InvalidSyntax, "line " + std::to_string(lineno) + ": unterminated quote");
  for (auto& f : out) f = trim(f);
  return out;
}

}  // namespace detail

/// Parses a dataset CSV. `tasks` holds one type per label column, or a single
/// type applied to every column. Classification labels must be 0 or 1.
inline Dataset parse_dataset(std::string_view text, const std::vector<TaskType>& tasks) {
  std::istringstream in{std::string(text)};
  std::string line;
  int lineno = 0;
  Dataset ds;
  int smiles_col = -1;
  std::vector<int> label_cols;
  bool header = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (detail::trim(line).empty()) continue;
    const auto fields = detail::split_csv_row(line, lineno);
    if (!header) {
      header = true;
      for (int i = 0; i < static_cast<int>(fields.size()); ++i) {
        if (fields[i] == "smiles") {
          smiles_col = i;
        } else {
          label_cols.push_back(i);
          ds.label_names.push_back(fields[i]);
        }
      }
      if (smiles_col < 0) throw Error(Errc::InvalidSyntax, "dataset header lacks a 'smiles' column");
      if (label_cols.empty()) throw Error(Errc::InvalidSyntax, "dataset has no label columns");
      if (tasks.size() == 1) {
        ds.task_types.assign(label_cols.size(), tasks[0]);
      } else if (tasks.size() == label_cols.size()) {
        ds.task_types = tasks;
      } else {
        throw Error(Errc::TaskTypeMismatch, std::to_string(tasks.size()) + " task types declared for " +
                                                std::to_string(label_cols.size()) + " label columns");
      }
      continue;
    }
    if (fields.size() != label_cols.size() + 1) {
      throw Error(Errc::InvalidSyntax, "line " + std::to_string(lineno) + ": expected " +
                                           std::to_string(label_cols.size() + 1) + " fields");
    }
    Record r;
    r.line = lineno;
    r.smiles = fields[smiles_col];
    for (std::size_t t = 0; t < label_cols.size(); ++t) {
      const std::string& cell = fields[label_cols[t]];
      if (cell.empty()) {
        r.labels.emplace_back();
        continue;
      }
      double v = 0;
      try {
        v = train::detail::parse_number<double>(ds.label_names[t], cell);
      } catch (const Error&) {
        throw Error(Errc::InvalidSyntax, "line " + std::to_string(lineno) + ": label '" + cell + "' is not a number");
      }
      if (!std::isfinite(v)) throw Error(Errc::InvalidSyntax, "line " + std::to_string(lineno) + ": non-finite label");
      if (ds.task_types[t] == TaskType::Classification && v != 0.0 && v != 1.0) {
        throw Error(Errc::TaskTypeMismatch, "line " + std::to_string(lineno) + ": classification label in column '" +
                                                ds.label_names[t] + "' must be 0 or 1");
      }
      r.labels.emplace_back(v);
    }
    ds.records.push_back(std::move(r));
  }
  if (!header) throw Error(Errc::EmptyDataset, "dataset file is empty");
  return ds;
}

inline Dataset load_dataset(const std::filesystem::path& path, const std::vector<TaskType>& tasks) {
  return parse_dataset(util::read_file(path), tasks);
}

struct Split {
  std::vector<int> train, valid, test;
  std::vector<std::string> warnings;  // e.g. "TestEmpty"
};

/// Deterministic scaffold split over precomputed scaffold keys: groups sorted
/// by (size descending, key ascending) fill train until it holds at least
/// ratio_train of the data, then valid until ratio_valid, the rest goes to test.
inline Split scaffold_split_keys(const std::vector<std::string>& keys, double ratio_train = 0.8,
                                 double ratio_valid = 0.1) {
  if (keys.empty()) throw Error(Errc::EmptyDataset, "scaffold_split on an empty dataset");
  std::map<std::string, std::vector<int>> groups;
  for (int i = 0; i < static_cast<int>(keys.size()); ++i) groups[keys[i]].push_back(i);
  std::vector<const std::pair<const std::string, std::vector<int>>*> order;
  for (const auto& g : groups) order.push_back(&g);
  std::stable_sort(order.begin(), order.end(), [](const auto* a, const auto* b) {
    if (a->second.size() != b->second.size()) return a->second.size() > b->second.size();
    return a->first < b->first;
  });
  const double n = static_cast<double>(keys.size());
  const double eps = 1e-9;
  Split s;
  for (const auto* g : order) {
    std::vector<int>* target = &s.test;
    if (static_cast<double>(s.train.size()) < ratio_train * n - eps) {
      target = &s.train;
    } else if (static_cast<double>(s.valid.size()) < ratio_valid * n - eps) {
      target = &s.valid;
    }
    target->insert(target->end(), g->second.begin(), g->second.end());
  }
  for (auto* v : {&s.train, &s.valid, &s.test}) std::sort(v->begin(), v->end());
  if (s.valid.empty()) s.warnings.push_back("ValidEmpty");
  if (s.test.empty()) s.warnings.push_back("TestEmpty");
  return s;
}

inline Split scaffold_split(const std::vector<chem::MolGraph>& mols, double ratio_train = 0.8, double ratio_valid = 0.1) {
  std::vector<std::string> keys;
  keys.reserve(mols.size());
  for (const auto& m : mols) keys.push_back(murcko_scaffold(m));
  return scaffold_split_keys(keys, ratio_train, ratio_valid);
}

}  // namespace molcl::train
