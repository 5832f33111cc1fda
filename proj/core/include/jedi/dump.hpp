// Copyright 2026 The jedi Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "jedi/errors.hpp"
#include "jedi/extraction.hpp"
#include "jedi/objective.hpp"

namespace jedi {

/// Manifest JSON is not parseable or misses required fields.
class DumpFormatError : public DataError {
 public:
  using DataError::DataError;
};

/// format_version is not one this build understands.
class DumpVersionError : public DataError {
 public:
  using DataError::DataError;
};

/// Payload length disagrees with the manifest.
class DumpSizeError : public DataError {
 public:
  using DataError::DataError;
};

inline constexpr int kDumpFormatVersion = 1;

struct DumpManifest {
  int format_version = kDumpFormatVersion;
  std::size_t n = 0;
  std::size_t m = 0;
  bool heads_averaged = true;
  AttentionKind kind = AttentionKind::raw_logits;
  std::vector<int> timesteps;
  std::vector<int> blocks;
  std::vector<std::string> token_labels;
  /// Subject id -> prompt token indices, in manifest order.
  std::vector<std::pair<std::string, std::vector<std::size_t>>> subject_groups;

  std::size_t side() const { return n + m; }
  std::size_t matrix_floats() const { return side() * side(); }
  std::size_t num_matrices() const { return timesteps.size() * blocks.size(); }

  bool operator==(const DumpManifest&) const = default;
};

/// Attention matrices for a run, one (n+m)^2 float32 matrix per
/// (timestep, block), timestep-major.
///
/// On disk: the manifest as a single line of UTF-8 JSON terminated by '\n',
/// followed by the payload as little-endian IEEE-754 float32.
class AttentionDump {
 public:
  AttentionDump(DumpManifest manifest, std::vector<float> payload);

  const DumpManifest& manifest() const { return manifest_; }
  const std::vector<float>& payload() const { return payload_; }

  /// Matrix at positions (ti, bi) of the manifest's timestep / block lists.
  JointAttentionMatrix matrix_at(std::size_t ti, std::size_t bi) const;
  /// Matrix by timestep and block *values*. Throws DataError naming the
  /// missing entry.
  JointAttentionMatrix matrix(int timestep, int block) const;
  /// Every block of one timestep.
  std::vector<JointAttentionMatrix> timestep_blocks(int timestep) const;

  /// The subject groups as a PromptSpec over prompt-token indices.
  PromptSpec token_spec() const;

  /// Bitwise payload comparison (distinguishes -0 from +0).
  bool operator==(const AttentionDump& other) const;

 private:
  std::size_t timestep_pos(int timestep) const;
  std::size_t block_pos(int block) const;

  DumpManifest manifest_;
  std::vector<float> payload_;
};

/// Throws DumpFormatError, DumpVersionError or DumpSizeError; plain
/// DataError for I/O failures and out-of-range manifest indices.
AttentionDump read_dump(const std::filesystem::path& path);

/// Writes through a temporary sibling file and renames it into place, so a
/// failed write never clobbers `path`. Rejects empty timestep lists and
/// non-finite payload values.
void write_dump(const AttentionDump& dump, const std::filesystem::path& path);

/// Serialized bytes of a dump (what write_dump puts on disk).
std::string serialize_dump(const AttentionDump& dump);
AttentionDump parse_dump(const std::string& bytes);

}  // namespace jedi
