// Copyright 2026 The molcl Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "molcl/chem/featurize.hpp"
#include "molcl/error.hpp"
#include "molcl/nn/model.hpp"
#include "molcl/util/io.hpp"

namespace molcl::nn {

// Layout:
//   "IMCL"                 4 bytes
//   format version         uint32 LE
//   header length          uint32 LE (bytes of the text header)
//   header                 text, one `key value...` per line
//   payload                every manifest tensor as LE float32, row-major
//
// Header keys: d, dz, layers, feature_set, n_targets, separate_fragment_head,
// node_vocab, edge_vocab, then one `tensor <name> <rows> <cols>` line per
// tensor in payload order.
inline constexpr char kCheckpointMagic[4] = {'I', 'M', 'C', 'L'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

namespace detail {

inline void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out += static_cast<char>((v >> (8 * i)) & 0xffu);
}

inline std::uint32_t get_u32(std::string_view in, std::size_t pos) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(static_cast<unsigned char>(in[pos + i])) << (8 * i);
  return v;
}

template <class T>
std::string checkpoint_header(const GinModel<T>& m) {
  std::ostringstream h;
  const ModelConfig& c = m.config;
  h << "d " << c.d << "\n"
    << "dz " << c.dz << "\n"
    << "layers " << c.layers << "\n"
    << "feature_set " << chem::feature_set_name(c.feature_set) << "\n"
    << "n_targets " << c.n_targets << "\n"
    << "separate_fragment_head " << (c.separate_fragment_head ? 1 : 0) << "\n";
  h << "node_vocab";
  for (int v : chem::node_vocab_sizes(c.feature_set)) h << ' ' << v;
  h << "\nedge_vocab";
  for (int v : chem::edge_vocab_sizes(c.feature_set)) h << ' ' << v;
  h << "\n";
  for (const auto& [name, p] : m.tensors()) h << "tensor " << name << ' ' << p->rows() << ' ' << p->cols() << "\n";
  return h.str();
}

}  // namespace detail

/// Serializes a model; parameters are stored as float32 regardless of T.
template <class T>
std::string checkpoint_bytes(const GinModel<T>& m) {
  const std::string header = detail::checkpoint_header(m);
  std::string out(kCheckpointMagic, 4);
  detail::put_u32(out, kCheckpointVersion);
  detail::put_u32(out, static_cast<std::uint32_t>(header.size()));
  out += header;
  for (const auto& [name, p] : m.tensors()) {
    for (Eigen::Index i = 0; i < p->size(); ++i) {
      detail::put_u32(out, std::bit_cast<std::uint32_t>(static_cast<float>(p->data()[i])));
    }
  }
  return out;
}

template <class T>
void save_checkpoint(const GinModel<T>& m, const std::filesystem::path& path) {
  util::atomic_write(path, checkpoint_bytes(m));
}

inline GinModel<float> parse_checkpoint(std::string_view bytes) {
  auto bad = [](const std::string& why) { throw Error(Errc::CheckpointFormat, "checkpoint: " + why); };
  if (bytes.size() < 12 || std::memcmp(bytes.data(), kCheckpointMagic, 4) != 0) bad("missing IMCL magic");
  const std::uint32_t version = detail::get_u32(bytes, 4);
  if (version != kCheckpointVersion) {
    throw Error(Errc::CheckpointVersionMismatch,
                "checkpoint version " + std::to_string(version) + ", expected " + std::to_string(kCheckpointVersion));
  }
  const std::uint32_t header_len = detail::get_u32(bytes, 8);
  if (bytes.size() < 12 + static_cast<std::size_t>(header_len)) bad("truncated header");
  std::istringstream header{std::string(bytes.substr(12, header_len))};

  ModelConfig cfg;
  std::map<std::string, std::string> fields;
  std::vector<std::string> tensor_lines;
  std::string line;
  while (std::getline(header, line)) {
    if (line.empty()) continue;
    const auto sp = line.find(' ');
    const std::string key = line.substr(0, sp);
    const std::string value = sp == std::string::npos ? "" : line.substr(sp + 1);
    if (key == "tensor") {
      tensor_lines.push_back(value);
    } else {
      fields[key] = value;
    }
  }
  auto need = [&](const char* key) -> const std::string& {
    const auto it = fields.find(key);
    if (it == fields.end()) bad(std::string("header lacks '") + key + "'");
    return it->second;
  };
  try {
    cfg.d = std::stoi(need("d"));
    cfg.dz = std::stoi(need("dz"));
    cfg.layers = std::stoi(need("layers"));
    cfg.n_targets = std::stoi(need("n_targets"));
    cfg.separate_fragment_head = std::stoi(need("separate_fragment_head")) != 0;
  } catch (const std::logic_error&) {
    bad("non-numeric dimension");
  }
  try {
    cfg.feature_set = chem::parse_feature_set(need("feature_set"));
  } catch (const Error& e) {
    bad(e.what());
  }
  GinModel<float> m = zero_model<float>(cfg);
  const std::string expected = detail::checkpoint_header(m);
  if (expected != std::string(bytes.substr(12, header_len))) bad("header does not match its declared dimensions");
  std::size_t pos = 12 + header_len;
  std::size_t need_bytes = 0;
  for (const auto& [name, p] : m.tensors()) need_bytes += 4 * static_cast<std::size_t>(p->size());
  if (bytes.size() != pos + need_bytes) bad("payload size mismatch");
  for (auto& [name, p] : m.tensors()) {
    for (Eigen::Index i = 0; i < p->size(); ++i, pos += 4) {
      p->data()[i] = std::bit_cast<float>(detail::get_u32(bytes, pos));
    }
  }
  return m;
}

inline GinModel<float> load_checkpoint(const std::filesystem::path& path) {
  return parse_checkpoint(util::read_file(path));
}

}  // namespace molcl::nn
