// Copyright 2026 The modpol Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "modpol/demogen/dataset.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>

#include <nlohmann/json.hpp>

#include "modpol/crc32.hpp"
#include "modpol/errors.hpp"

static_assert(std::endian::native == std::endian::little,
              "dataset format assumes a little-endian host");

namespace modpol::demogen {

namespace {

using nlohmann::json;

constexpr char kMagic[4] = {'M', 'P', 'D', 'S'};
constexpr uint32_t kVersion = 1;

enum Dtype : uint8_t { kU8 = 0, kF32 = 1, kStr = 2 };

// --- byte buffer helpers ---------------------------------------------------

void put_u32(std::string& out, uint32_t v) {
  out.append(reinterpret_cast<const char*>(&v), 4);
}
void put_u64(std::string& out, uint64_t v) {
  out.append(reinterpret_cast<const char*>(&v), 8);
}

struct Cursor {
  const char* p;
  const char* end;

  void need(size_t n) const {
    if (static_cast<size_t>(end - p) < n) {
      throw IoError("dataset file truncated");
    }
  }
  uint8_t u8() {
    need(1);
    return static_cast<uint8_t>(*p++);
  }
  uint32_t u32() {
    need(4);
    uint32_t v;
    std::memcpy(&v, p, 4);
    p += 4;
    return v;
  }
  uint64_t u64() {
    need(8);
    uint64_t v;
    std::memcpy(&v, p, 8);
    p += 8;
    return v;
  }
  std::string bytes(size_t n) {
    need(n);
    std::string s(p, n);
    p += n;
    return s;
  }
};

void put_field_header(std::string& out, const std::string& name, Dtype dtype,
                      const std::vector<uint32_t>& dims) {
  out.push_back(static_cast<char>(name.size()));
  out.append(name);
  out.push_back(static_cast<char>(dtype));
  out.push_back(static_cast<char>(dims.size()));
  for (uint32_t d : dims) put_u32(out, d);
}

template <typename T>
void put_array(std::string& out, const std::string& name, Dtype dtype,
               const std::vector<uint32_t>& dims, const std::vector<T>& data) {
  put_field_header(out, name, dtype, dims);
  out.append(reinterpret_cast<const char*>(data.data()),
             data.size() * sizeof(T));
}

void put_string_field(std::string& out, const std::string& name,
                      const std::string& value) {
  put_field_header(out, name, kStr,
                   {static_cast<uint32_t>(value.size())});
  out.append(value);
}

std::string encode_episode(const Episode& ep) {
  std::string out;
  const auto n = static_cast<uint32_t>(ep.length);
  const auto sd = static_cast<uint32_t>(ep.state_dim);
  const auto ad = static_cast<uint32_t>(ep.action_dim);
  constexpr uint32_t img = simenv::Observation::kImage;
  put_string_field(out, "embodiment", ep.embodiment);
  put_string_field(out, "instruction", ep.instruction);
  put_array<uint8_t>(out, "success", kU8, {1}, {ep.success});
  put_array(out, "state", kF32, {n, sd}, ep.state);
  put_array(out, "action", kF32, {n, ad}, ep.actions);
  put_array(out, "contact", kU8, {n}, ep.contact);
  put_array(out, "forces", kF32, {n, 2}, ep.forces);
  put_array(out, "rgb", kU8, {n, img, img, 3}, ep.rgb);
  if (ep.has_depth) put_array(out, "depth", kF32, {n, img, img}, ep.depth);
  return out;
}

template <typename T>
std::vector<T> read_payload(Cursor& c, uint64_t count) {
  c.need(count * sizeof(T));
  std::vector<T> data(count);
  std::memcpy(data.data(), c.p, count * sizeof(T));
  c.p += count * sizeof(T);
  return data;
}

Episode decode_episode(const std::string& block) {
  Cursor c{block.data(), block.data() + block.size()};
  Episode ep;
  ep.has_depth = false;
  while (c.p < c.end) {
    const uint8_t name_len = c.u8();
    const std::string name = c.bytes(name_len);
    const auto dtype = static_cast<Dtype>(c.u8());
    const uint8_t ndim = c.u8();
    std::vector<uint32_t> dims(ndim);
    uint64_t count = 1;
    for (auto& d : dims) {
      d = c.u32();
      count *= d;
    }
    if (dtype == kStr) {
      const std::string value = c.bytes(count);
      if (name == "embodiment") ep.embodiment = value;
      else if (name == "instruction") ep.instruction = value;
    } else if (dtype == kU8) {
      auto data = read_payload<uint8_t>(c, count);
      if (name == "success") ep.success = data.at(0);
      else if (name == "rgb") ep.rgb = std::move(data);
      else if (name == "contact") {
        ep.contact = std::move(data);
        ep.length = static_cast<int>(dims.at(0));
      }
    } else if (dtype == kF32) {
      auto data = read_payload<float>(c, count);
      if (name == "state") {
        ep.state = std::move(data);
        ep.state_dim = static_cast<int>(dims.at(1));
      } else if (name == "action") {
        ep.actions = std::move(data);
        ep.action_dim = static_cast<int>(dims.at(1));
      } else if (name == "forces") {
        ep.forces = std::move(data);
      } else if (name == "depth") {
        ep.depth = std::move(data);
        ep.has_depth = true;
      }
    } else {
      throw IoError("dataset field '" + name + "' has unknown dtype");
    }
  }
  return ep;
}

json manifest_to_json(const DatasetManifest& m) {
  json j;
  j["embodiment"] = m.embodiment;
  j["instruction"] = m.instruction;
  j["episode_count"] = m.episode_count;
  j["has_depth"] = m.has_depth;
  j["state_dim"] = m.state_dim;
  j["action_dim"] = m.action_dim;
  j["action_mean"] = m.action_mean;
  j["action_std"] = m.action_std;
  j["seed_lo"] = m.seed_lo;
  j["seed_hi"] = m.seed_hi;
  j["config_hash"] = m.config_hash;
  return j;
}

DatasetManifest manifest_from_json(const json& j, uint32_t version) {
  DatasetManifest m;
  m.version = version;
  m.embodiment = j.at("embodiment").get<std::string>();
  m.instruction = j.at("instruction").get<std::string>();
  m.episode_count = j.at("episode_count").get<uint64_t>();
  m.has_depth = j.at("has_depth").get<bool>();
  m.state_dim = j.at("state_dim").get<int>();
  m.action_dim = j.at("action_dim").get<int>();
  m.action_mean = j.at("action_mean").get<std::vector<double>>();
  m.action_std = j.at("action_std").get<std::vector<double>>();
  m.seed_lo = j.at("seed_lo").get<uint64_t>();
  m.seed_hi = j.at("seed_hi").get<uint64_t>();
  m.config_hash = j.at("config_hash").get<std::string>();
  return m;
}

}  // namespace

void compute_action_stats(const std::vector<Episode>& episodes, int action_dim,
                          std::vector<double>& mean, std::vector<double>& std) {
  mean.assign(action_dim, 0.0);
  std.assign(action_dim, 0.0);
  int64_t count = 0;
  for (const auto& ep : episodes) {
    for (int i = 0; i < ep.length; ++i) {
      for (int d = 0; d < action_dim; ++d) {
        mean[d] += ep.actions[static_cast<size_t>(i) * action_dim + d];
      }
    }
    count += ep.length;
  }
  if (count == 0) throw DataError("no action steps to compute stats from");
  for (auto& v : mean) v /= static_cast<double>(count);
  for (const auto& ep : episodes) {
    for (int i = 0; i < ep.length; ++i) {
      for (int d = 0; d < action_dim; ++d) {
        const double c =
            ep.actions[static_cast<size_t>(i) * action_dim + d] - mean[d];
        std[d] += c * c;
      }
    }
  }
  for (auto& v : std) v = std::sqrt(v / static_cast<double>(count));
}

DatasetManifest write_dataset(const std::vector<Episode>& episodes,
                              const std::string& path,
                              const WriteOptions& opts) {
  if (episodes.empty()) {
    throw ContractError("write_dataset: empty episode list");
  }
  DatasetManifest m;
  m.version = kVersion;
  m.embodiment = episodes.front().embodiment;
  m.instruction = episodes.front().instruction;
  m.episode_count = episodes.size();
  m.has_depth = episodes.front().has_depth;
  m.state_dim = episodes.front().state_dim;
  m.action_dim = episodes.front().action_dim;
  m.seed_lo = opts.seed_lo;
  m.seed_hi = opts.seed_hi;
  m.config_hash = opts.config_hash;
  for (const auto& ep : episodes) {
    if (ep.embodiment != m.embodiment || ep.has_depth != m.has_depth ||
        ep.state_dim != m.state_dim || ep.action_dim != m.action_dim) {
      throw DataError("episodes in one dataset must share embodiment/layout");
    }
    if (ep.success != 1) {
      throw DataError("only successful demonstrations may be stored");
    }
  }
  compute_action_stats(episodes, m.action_dim, m.action_mean, m.action_std);

  const std::string header_json = manifest_to_json(m).dump();
  const uint64_t table_pos = 4 + 4 + 8 + header_json.size();
  const uint64_t table_len = episodes.size() * 20 + 4;  // entries + crc
  uint64_t offset = table_pos + table_len;

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out.write(kMagic, 4);
  uint32_t version = kVersion;
  out.write(reinterpret_cast<const char*>(&version), 4);
  uint64_t jlen = header_json.size();
  out.write(reinterpret_cast<const char*>(&jlen), 8);
  out.write(header_json.data(), static_cast<std::streamsize>(jlen));

  std::string table;
  table.reserve(table_len);
  // Encode blocks one at a time so memory stays at one episode.
  out.seekp(static_cast<std::streamoff>(table_pos + table_len));
  for (const auto& ep : episodes) {
    const std::string block = encode_episode(ep);
    put_u64(table, offset);
    put_u64(table, block.size());
    put_u32(table, crc32(block.data(), block.size()));
    out.write(block.data(), static_cast<std::streamsize>(block.size()));
    m.offsets.push_back(offset);
    m.lengths.push_back(block.size());
    offset += block.size();
  }
  uint32_t manifest_crc = crc32(header_json.data(), header_json.size());
  manifest_crc = crc32(table.data(), table.size(), manifest_crc);
  put_u32(table, manifest_crc);
  out.seekp(static_cast<std::streamoff>(table_pos));
  out.write(table.data(), static_cast<std::streamsize>(table.size()));
  if (!out) throw IoError("write to '" + path + "' failed");
  return m;
}

namespace {

struct OpenDataset {
  DatasetManifest manifest;
  std::ifstream file;
};

OpenDataset open_dataset(const std::string& path) {
  OpenDataset od;
  od.file.open(path, std::ios::binary);
  if (!od.file) throw IoError("cannot open '" + path + "'");
  char magic[4];
  od.file.read(magic, 4);
  if (!od.file || std::memcmp(magic, kMagic, 4) != 0) {
    throw IoError("'" + path + "' is not a modpol dataset");
  }
  uint32_t version = 0;
  od.file.read(reinterpret_cast<char*>(&version), 4);
  if (version != kVersion) {
    throw IoError("dataset version " + std::to_string(version) +
                  " unsupported (expected " + std::to_string(kVersion) + ")");
  }
  uint64_t jlen = 0;
  od.file.read(reinterpret_cast<char*>(&jlen), 8);
  if (!od.file) throw IoError("dataset file truncated");
  std::string header_json(jlen, '\0');
  od.file.read(header_json.data(), static_cast<std::streamsize>(jlen));
  if (!od.file) throw IoError("dataset file truncated");

  json j;
  try {
    j = json::parse(header_json);
  } catch (const json::exception& e) {
    throw IoError(std::string("dataset manifest unreadable: ") + e.what());
  }
  od.manifest = manifest_from_json(j, version);

  const uint64_t count = od.manifest.episode_count;
  std::string table((count * 20), '\0');
  od.file.read(table.data(), static_cast<std::streamsize>(table.size()));
  uint32_t stored_crc = 0;
  od.file.read(reinterpret_cast<char*>(&stored_crc), 4);
  if (!od.file) throw IoError("dataset file truncated");
  uint32_t crc = crc32(header_json.data(), header_json.size());
  crc = crc32(table.data(), table.size(), crc);
  if (crc != stored_crc) throw IoError("dataset manifest checksum mismatch");

  Cursor c{table.data(), table.data() + table.size()};
  uint64_t prev_end = 0;
  for (uint64_t i = 0; i < count; ++i) {
    const uint64_t off = c.u64();
    const uint64_t len = c.u64();
    c.u32();  // per-block crc, verified on block read
    if (off < prev_end) throw IoError("dataset offsets not increasing");
    od.manifest.offsets.push_back(off);
    od.manifest.lengths.push_back(len);
    prev_end = off + len;
  }
  return od;
}

}  // namespace

DatasetManifest read_manifest(const std::string& path) {
  return open_dataset(path).manifest;
}

Dataset read_dataset(const std::string& path) {
  OpenDataset od = open_dataset(path);
  Dataset ds;
  ds.manifest = od.manifest;

  // Re-read the table crc entries for block verification.
  const uint64_t table_pos = 4 + 4 + 8 +
      [&] {
        od.file.seekg(8);
        uint64_t jlen = 0;
        od.file.read(reinterpret_cast<char*>(&jlen), 8);
        return jlen;
      }();
  std::vector<uint32_t> block_crcs(od.manifest.episode_count);
  od.file.seekg(static_cast<std::streamoff>(table_pos));
  for (uint64_t i = 0; i < od.manifest.episode_count; ++i) {
    uint64_t skip[2];
    od.file.read(reinterpret_cast<char*>(skip), 16);
    od.file.read(reinterpret_cast<char*>(&block_crcs[i]), 4);
  }
  if (!od.file) throw IoError("dataset file truncated");

  ds.episodes.reserve(od.manifest.episode_count);
  for (uint64_t i = 0; i < od.manifest.episode_count; ++i) {
    od.file.seekg(static_cast<std::streamoff>(od.manifest.offsets[i]));
    std::string block(od.manifest.lengths[i], '\0');
    od.file.read(block.data(), static_cast<std::streamsize>(block.size()));
    if (!od.file) throw IoError("dataset file truncated");
    if (crc32(block.data(), block.size()) != block_crcs[i]) {
      throw IoError("episode " + std::to_string(i) + " checksum mismatch");
    }
    ds.episodes.push_back(decode_episode(block));
  }
  return ds;
}

int held_out_count(int n_episodes) {
  return std::max(1, n_episodes / 10);
}

}  // namespace modpol::demogen
