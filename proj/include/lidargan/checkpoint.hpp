// Copyright 2026 The LidarGAN Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <array>
#include <cstdint>
#include <cstring>
#include <istream>
#include <iterator>
#include <map>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "lidargan/dataset_io.hpp"
#include "lidargan/error.hpp"
#include "lidargan/network.hpp"

namespace lidargan {

/// Parameter checkpoint:
///
///   "LCKPT\0v1"  u32 entry count
///   per entry:   u32 name length, name bytes, u32 rank, rank x u32 dims,
///                prod(dims) x f32 payload
///
/// All integers and floats little-endian. Values are narrowed to f32 on
/// save and widened back to f64 on load; optimizer moments are not stored.
inline constexpr std::array<char, 8> kCheckpointMagic{'L', 'C', 'K', 'P', 'T', '\0', 'v', '1'};

inline void save_checkpoint(std::ostream& out, std::span<Network* const> nets) {
  std::vector<Param*> all;
  for (Network* n : nets) {
    for (Param* p : n->params()) all.push_back(p);
  }
  detail::write_bytes(out, kCheckpointMagic.data(), kCheckpointMagic.size());
  detail::write_u32(out, static_cast<std::uint32_t>(all.size()));
  for (const Param* p : all) {
    detail::write_u32(out, static_cast<std::uint32_t>(p->name.size()));
    detail::write_bytes(out, p->name.data(), p->name.size());
    detail::write_u32(out, static_cast<std::uint32_t>(p->value.rank()));
    for (std::size_t d : p->value.shape()) detail::write_u32(out, static_cast<std::uint32_t>(d));
    std::vector<unsigned char> payload(p->value.size() * 4);
    for (std::size_t i = 0; i < p->value.size(); ++i) {
      detail::store_f32_le(static_cast<float>(p->value[i]), &payload[i * 4]);
    }
    detail::write_bytes(out, payload.data(), payload.size());
  }
}

inline std::map<std::string, Tensor> read_checkpoint(std::istream& in) {
  std::vector<char> raw((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  const auto* p = reinterpret_cast<const unsigned char*>(raw.data());
  std::size_t off = 0;
  auto need = [&](std::size_t n) {
    if (raw.size() - off < n) throw TruncationError("checkpoint: truncated");
  };
  auto u32 = [&] {
    need(4);
    const std::uint32_t v = detail::load_u32_le(p + off);
    off += 4;
    return v;
  };
  need(kCheckpointMagic.size());
  if (std::memcmp(p, kCheckpointMagic.data(), kCheckpointMagic.size()) != 0) {
    throw FormatError("checkpoint: bad magic");
  }
  off = kCheckpointMagic.size();
  std::map<std::string, Tensor> out;
  const std::uint32_t count = u32();
  for (std::uint32_t e = 0; e < count; ++e) {
    const std::uint32_t len = u32();
    need(len);
    std::string name(raw.data() + off, len);
    off += len;
    const std::uint32_t rank = u32();
    Shape shape;
    std::uint64_t numel = 1;
    for (std::uint32_t r = 0; r < rank; ++r) {
      shape.push_back(u32());
      numel *= shape.back();
      if (numel > UINT32_MAX) throw OverflowError("checkpoint: tensor too large");
    }
    need(numel * 4);
    Tensor t(shape);
    for (std::size_t i = 0; i < numel; ++i) t[i] = detail::load_f32_le(p + off + i * 4);
    off += numel * 4;
    out.emplace(std::move(name), std::move(t));
  }
  if (off != raw.size()) throw FormatError("checkpoint: trailing bytes");
  return out;
}

/// Loads every parameter of `nets` by name; missing or mis-shaped entries throw.
inline void load_checkpoint(std::istream& in, std::span<Network* const> nets) {
  const auto entries = read_checkpoint(in);
  for (Network* n : nets) {
    for (Param* p : n->params()) {
      const auto it = entries.find(p->name);
      if (it == entries.end()) throw FormatError("checkpoint: missing parameter " + p->name);
      if (it->second.shape() != p->value.shape()) {
        throw FormatError("checkpoint: shape mismatch for " + p->name);
      }
      p->value = it->second;
      p->grad.fill(0.0);
    }
  }
}

}  // namespace lidargan
