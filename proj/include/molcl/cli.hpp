// Copyright 2026 The molcl Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdio>
#include <filesystem>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "molcl/chem/corpus.hpp"
#include "molcl/error.hpp"
#include "molcl/fingerprint.hpp"
#include "molcl/fragment.hpp"
#include "molcl/nn/checkpoint.hpp"
#include "molcl/train/config.hpp"
#include "molcl/train/embed.hpp"
#include "molcl/train/finetune.hpp"
#include "molcl/train/pretrain.hpp"
#include "molcl/util/io.hpp"

namespace molcl::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitData = 2;
inline constexpr int kExitNumeric = 3;

inline int exit_code(Errc e) {
  switch (e) {
    case Errc::Config: return kExitUsage;
    case Errc::NonFinite:
    case Errc::NonFiniteGrad: return kExitNumeric;
    default: return kExitData;
  }
}

/// `smiles<TAB>n<TAB>groups`, atoms joined by ',' and groups by ';'.
inline std::string fragment_line(const std::string& smiles, const FragmentMap& fm) {
  std::string out = smiles + "\t" + std::to_string(fm.n_fragments) + "\t";
  const auto groups = fm.groups();
  for (std::size_t g = 0; g < groups.size(); ++g) {
    if (g) out += ';';
    for (std::size_t i = 0; i < groups[g].size(); ++i) {
      if (i) out += ',';
      out += std::to_string(groups[g][i]);
    }
  }
  return out;
}

inline std::string fp_report(const std::string& corpus, int radius, int nbits) {
  const auto entries = chem::read_corpus_file(corpus);
  const auto mols = chem::parse_corpus(entries);
  std::string out;
  for (const auto& m : mols) out += ecfp(m, radius, nbits).to_hex() + "\n";
  return out;
}

inline std::string fragment_report(const std::string& corpus, const std::string& rules_path) {
  BricsRules rules = rules_path.empty() ? default_brics_rules() : load_brics_rules(rules_path);
  const auto entries = chem::read_corpus_file(corpus);
  const auto mols = chem::parse_corpus(entries);
  std::string out;
  for (std::size_t i = 0; i < mols.size(); ++i) out += fragment_line(entries[i].smiles, brics_partition(mols[i], rules)) + "\n";
  return out;
}

struct TrainOverrides {
  std::optional<std::string> out;
  std::optional<std::uint64_t> seed;
  std::optional<bool> deterministic;
  std::optional<std::string> feature_set;
  std::optional<int> radius;
  std::optional<int> nbits;
};

/// Command-line flags win over the config file and end up in config.resolved.
inline train::TrainConfig resolve_config(const std::string& path, train::RunMode mode, const TrainOverrides& o) {
  std::string text;
  try {
    text = util::read_file(path);
  } catch (const Error& e) {
    throw Error(Errc::Config, std::string("cannot read config: ") + e.what());
  }
  auto kv = train::parse_key_values(text);
  if (o.out) kv["out"] = *o.out;
  if (o.seed) kv["seed"] = std::to_string(*o.seed);
  if (o.deterministic) kv["deterministic"] = *o.deterministic ? "true" : "false";
  if (o.feature_set) kv["feature_set"] = *o.feature_set;
  if (o.radius) kv["radius"] = std::to_string(*o.radius);
  if (o.nbits) kv["nbits"] = std::to_string(*o.nbits);
  return train::train_config_from(kv, mode);
}

inline void emit(const std::string& text, const std::string& out_path, std::ostream& out) {
  if (out_path.empty()) {
    out << text;
  } else {
    util::atomic_write(out_path, text);
  }
}

inline std::string neighbor_report(const std::vector<train::Neighbor>& hits) {
  std::string out;
  char buf[32];
  for (const auto& n : hits) {
    std::snprintf(buf, sizeof buf, "%.6f", n.cosine);
    out += std::to_string(n.rank) + "\t" + buf + "\t" + n.smiles + "\n";
  }
  return out;
}

/// Runs one subcommand and returns the process exit code. Errors go to `err`.
inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"molcl: molecular contrastive learning toolkit"};
  app.require_subcommand(1);

  std::string corpus, config, out_path, rules, checkpoint, table, query;
  int radius = kDefaultRadius, nbits = kDefaultBits, k = 0;
  std::uint64_t seed = 0;
  bool deterministic = true;
  std::string feature_set;

  auto* fp = app.add_subcommand("fp", "ECFP fingerprints as hex, one line per molecule");
  fp->add_option("corpus", corpus, "SMILES file")->required();
  fp->add_option("--radius", radius, "Morgan radius")->capture_default_str();
  fp->add_option("--nbits", nbits, "Fingerprint width")->capture_default_str();
  fp->add_option("--out", out_path, "Output file (default stdout)");

  auto* frag = app.add_subcommand("fragment", "BRICS partition, one line per molecule");
  frag->add_option("corpus", corpus, "SMILES file")->required();
  frag->add_option("--rules", rules, "BRICS rule table (default built-in)");
  frag->add_option("--out", out_path, "Output file (default stdout)");

  auto add_train_flags = [&](CLI::App* sub) {
    sub->add_option("--config", config, "key = value config file")->required();
    sub->add_option("--out", out_path, "Output directory");
    sub->add_option("--seed", seed, "Run seed");
    sub->add_option("--deterministic", deterministic, "Single-worker, reproducible run");
    sub->add_option("--feature-set", feature_set, "original or extended");
    sub->add_option("--radius", radius, "Morgan radius for weights");
    sub->add_option("--nbits", nbits, "Fingerprint width for weights");
  };
  auto* pre = app.add_subcommand("pretrain", "Contrastive pre-training");
  add_train_flags(pre);
  auto* fine = app.add_subcommand("finetune", "Supervised fine-tuning");
  add_train_flags(fine);

  auto* emb = app.add_subcommand("embed", "Graph representations for a corpus");
  emb->add_option("checkpoint", checkpoint, "Model checkpoint")->required();
  emb->add_option("corpus", corpus, "SMILES file")->required();
  emb->add_option("--out", out_path, "Output CSV (default stdout)");

  auto* sim = app.add_subcommand("similar", "Nearest molecules by cosine similarity");
  sim->add_option("embeddings", table, "Table written by embed")->required();
  sim->add_option("query", query, "Query SMILES")->required();
  sim->add_option("checkpoint", checkpoint, "Checkpoint that produced the table")->required();
  sim->add_option("--k", k, "Number of neighbours (default 10, capped at table size)");
  sim->add_option("--out", out_path, "Output file (default stdout)");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "molcl: " << e.what() << "\n";
    return kExitUsage;
  }

  auto overrides = [&](CLI::App* sub) {
    TrainOverrides o;
    if (sub->count("--out")) o.out = out_path;
    if (sub->count("--seed")) o.seed = seed;
    if (sub->count("--deterministic")) o.deterministic = deterministic;
    if (sub->count("--feature-set")) o.feature_set = feature_set;
    if (sub->count("--radius")) o.radius = radius;
    if (sub->count("--nbits")) o.nbits = nbits;
    return o;
  };

  try {
    if (fp->parsed()) {
      emit(fp_report(corpus, radius, nbits), out_path, out);
    } else if (frag->parsed()) {
      emit(fragment_report(corpus, rules), out_path, out);
    } else if (pre->parsed()) {
      const auto cfg = resolve_config(config, train::RunMode::Pretrain, overrides(pre));
      const auto r = train::run_pretrain(cfg);
      out << "pretrain: " << r.epoch_train_loss.size() << " epochs, best epoch " << r.best_epoch << ", output "
          << cfg.out << "\n";
    } else if (fine->parsed()) {
      const auto cfg = resolve_config(config, train::RunMode::Finetune, overrides(fine));
      const auto r = train::run_finetune(cfg);
      out << "finetune: best epoch " << r.best_epoch << " by " << r.selection << ", output " << cfg.out << "\n";
    } else if (emb->parsed()) {
      const std::string bytes = util::read_file(checkpoint);
      const auto model = nn::parse_checkpoint(bytes);
      const auto t = train::embed_corpus(model, util::fnv1a64(bytes), chem::read_corpus_file(corpus));
      emit(train::embedding_csv(t), out_path, out);
    } else if (sim->parsed()) {
      const auto t = train::parse_embedding_csv(util::read_file(table));
      const int kk = sim->count("--k") ? k : std::min(10, static_cast<int>(t.lines.size()));
      emit(neighbor_report(train::similar(t, util::read_file(checkpoint), query, kk)), out_path, out);
    }
  } catch (const Error& e) {
    err << "molcl: " << e.what() << "\n";
    return exit_code(e.code());
  } catch (const std::exception& e) {
    err << "molcl: " << e.what() << "\n";
    return kExitData;
  }
  return kExitOk;
}

}  // namespace molcl::cli
