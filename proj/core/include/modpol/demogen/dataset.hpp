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

#ifndef MODPOL_DEMOGEN_DATASET_HPP_
#define MODPOL_DEMOGEN_DATASET_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "modpol/demogen/episode.hpp"

namespace modpol::demogen {

// Dataset file layout (all integers little-endian):
//
//   magic "MPDS" | u32 version
//   u64 json_len | manifest JSON
//   episode table: count x { u64 offset, u64 length, u32 crc32 }
//   u32 manifest_crc   (over the JSON bytes and the raw table)
//   episode blocks
//
// Each episode block is a sequence of self-describing fields:
//   u8 name_len | name | u8 dtype (0=u8, 1=f32, 2=str) | u8 ndim |
//   ndim x u32 dims | payload
// RGB is stored as bytes, every other numeric field as 32-bit floats, so a
// write/read round trip reproduces the in-memory episode bit for bit.

struct DatasetManifest {
  uint32_t version = 1;
  std::string embodiment;
  std::string instruction;
  uint64_t episode_count = 0;
  bool has_depth = true;
  int state_dim = 0;
  int action_dim = 0;
  std::vector<uint64_t> offsets;
  std::vector<uint64_t> lengths;
  std::vector<double> action_mean;  // per action dim
  std::vector<double> action_std;   // population std, unguarded
  uint64_t seed_lo = 0;
  uint64_t seed_hi = 0;
  std::string config_hash;
};

struct Dataset {
  DatasetManifest manifest;
  std::vector<Episode> episodes;

  int state_dim() const { return manifest.state_dim; }
  int action_dim() const { return manifest.action_dim; }
  int episode_count() const { return static_cast<int>(episodes.size()); }
};

struct WriteOptions {
  uint64_t seed_lo = 0;
  uint64_t seed_hi = 0;
  std::string config_hash;
};

/// Computes per-dimension action mean/std over every stored step (two-pass,
/// f64 accumulation, population variance).
void compute_action_stats(const std::vector<Episode>& episodes, int action_dim,
                          std::vector<double>& mean, std::vector<double>& std);

DatasetManifest write_dataset(const std::vector<Episode>& episodes,
                              const std::string& path,
                              const WriteOptions& opts = WriteOptions{});

Dataset read_dataset(const std::string& path);
DatasetManifest read_manifest(const std::string& path);

/// Episodes reserved for offline evaluation: the trailing
/// max(1, floor(n/10)) by index.
int held_out_count(int n_episodes);

}  // namespace modpol::demogen

#endif  // MODPOL_DEMOGEN_DATASET_HPP_
