// Copyright 2026 The molcl Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "molcl/chem/smiles.hpp"
#include "molcl/error.hpp"

namespace molcl::chem {

struct CorpusEntry {
  int line = 0;  // 1-based line number in the source file
  std::string smiles;
};

/// One molecule per line; '#' lines and blank lines are skipped, and
/// anything after the first whitespace (a molecule name) is ignored.
inline std::vector<CorpusEntry> read_corpus(std::istream& in) {
  std::vector<CorpusEntry> out;
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::istringstream fields(line);
    std::string token;
    if (!(fields >> token) || token[0] == '#') continue;
    out.push_back({number, token});
  }
  return out;
}

inline std::vector<CorpusEntry> read_corpus_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::Io, "cannot open corpus '" + path + "'");
  return read_corpus(in);
}

/// Parses every entry, reporting the first failure with its line number.
inline std::vector<MolGraph> parse_corpus(const std::vector<CorpusEntry>& entries) {
  std::vector<MolGraph> mols;
  mols.reserve(entries.size());
  for (const auto& e : entries) {
    try {
      mols.push_back(parse_smiles(e.smiles));
    } catch (const Error& err) {
      throw Error(err.code(), "line " + std::to_string(e.line) + ": " + err.message());
    }
  }
  return mols;
}

}  // namespace molcl::chem
