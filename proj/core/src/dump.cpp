// Copyright 2026 The jedi Authors
// SPDX-License-Identifier: Apache-2.0

#include "jedi/dump.hpp"

#include <atomic>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <limits>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

namespace jedi {

namespace {

using ordered_json = nlohmann::ordered_json;

static_assert(sizeof(float) == 4 && std::numeric_limits<float>::is_iec559,
              "dump payload requires IEEE-754 binary32");

void validate_manifest(const DumpManifest& mf) {
  if (mf.format_version != kDumpFormatVersion) {
    throw DumpVersionError("unsupported dump format_version " +
                           std::to_string(mf.format_version) + " (expected " +
                           std::to_string(kDumpFormatVersion) + ")");
  }
  if (mf.n < 1 || mf.m < 1) throw DataError("dump manifest needs n >= 1 and m >= 1");
  if (std::set<int>(mf.timesteps.begin(), mf.timesteps.end()).size() != mf.timesteps.size()) {
    throw DataError("dump manifest lists a timestep twice");
  }
  if (std::set<int>(mf.blocks.begin(), mf.blocks.end()).size() != mf.blocks.size()) {
    throw DataError("dump manifest lists a block twice");
  }
  if (!mf.token_labels.empty() && mf.token_labels.size() != mf.m) {
    throw DataError("dump manifest has " + std::to_string(mf.token_labels.size()) +
                    " token labels for m=" + std::to_string(mf.m));
  }
  for (const auto& [id, tokens] : mf.subject_groups) {
    for (std::size_t t : tokens) {
      if (t >= mf.m) {
        throw DataError("subject '" + id + "' references token " + std::to_string(t) +
                        " but m=" + std::to_string(mf.m));
      }
    }
  }
}

ordered_json manifest_to_json(const DumpManifest& mf) {
  ordered_json j;
  j["format_version"] = mf.format_version;
  j["n"] = mf.n;
  j["m"] = mf.m;
  j["heads_averaged"] = mf.heads_averaged;
  j["kind"] = std::string(to_string(mf.kind));
  j["timesteps"] = mf.timesteps;
  j["blocks"] = mf.blocks;
  j["token_labels"] = mf.token_labels;
  ordered_json groups = ordered_json::object();
  for (const auto& [id, tokens] : mf.subject_groups) groups[id] = tokens;
  j["subject_groups"] = groups;
  return j;
}

DumpManifest manifest_from_json(const std::string& text) {
  ordered_json j;
  try {
    j = ordered_json::parse(text);
  } catch (const ordered_json::parse_error& e) {
    throw DumpFormatError(std::string("malformed dump manifest: ") + e.what());
  }
  if (!j.is_object()) throw DumpFormatError("dump manifest is not a JSON object");

  DumpManifest mf;
  try {
    mf.format_version = j.at("format_version").get<int>();
    if (mf.format_version != kDumpFormatVersion) validate_manifest(mf);
    mf.n = j.at("n").get<std::size_t>();
    mf.m = j.at("m").get<std::size_t>();
    mf.heads_averaged = j.at("heads_averaged").get<bool>();
    mf.kind = parse_attention_kind(j.at("kind").get<std::string>());
    mf.timesteps = j.at("timesteps").get<std::vector<int>>();
    mf.blocks = j.at("blocks").get<std::vector<int>>();
    mf.token_labels = j.value("token_labels", std::vector<std::string>{});
    if (j.contains("subject_groups")) {
      const auto& groups = j.at("subject_groups");
      if (!groups.is_object()) throw DumpFormatError("subject_groups must be an object");
      for (const auto& [id, tokens] : groups.items()) {
        mf.subject_groups.emplace_back(id, tokens.get<std::vector<std::size_t>>());
      }
    }
  } catch (const ordered_json::exception& e) {
    throw DumpFormatError(std::string("dump manifest field error: ") + e.what());
  } catch (const DumpVersionError&) {
    throw;
  } catch (const DataError& e) {
    throw DumpFormatError(std::string("dump manifest field error: ") + e.what());
  }
  return mf;
}

std::uint32_t to_little(std::uint32_t v) {
  if constexpr (std::endian::native == std::endian::little) {
    return v;
  } else {
    return ((v & 0xffu) << 24) | ((v & 0xff00u) << 8) | ((v >> 8) & 0xff00u) | (v >> 24);
  }
}

}  // namespace

AttentionDump::AttentionDump(DumpManifest manifest, std::vector<float> payload)
    : manifest_(std::move(manifest)), payload_(std::move(payload)) {
  validate_manifest(manifest_);
  const std::size_t expected = manifest_.num_matrices() * manifest_.matrix_floats();
  if (payload_.size() != expected) {
    throw DumpSizeError("dump payload holds " + std::to_string(payload_.size()) +
                        " floats, manifest implies " + std::to_string(expected));
  }
}

std::size_t AttentionDump::timestep_pos(int timestep) const {
  const auto& ts = manifest_.timesteps;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    if (ts[i] == timestep) return i;
  }
  throw DataError("timestep " + std::to_string(timestep) + " is not in the dump");
}

std::size_t AttentionDump::block_pos(int block) const {
  const auto& bs = manifest_.blocks;
  for (std::size_t i = 0; i < bs.size(); ++i) {
    if (bs[i] == block) return i;
  }
  throw DataError("block " + std::to_string(block) + " is not in the dump");
}

JointAttentionMatrix AttentionDump::matrix_at(std::size_t ti, std::size_t bi) const {
  if (ti >= manifest_.timesteps.size() || bi >= manifest_.blocks.size()) {
    throw DataError("dump matrix position out of range");
  }
  const std::size_t floats = manifest_.matrix_floats();
  const std::size_t offset = (ti * manifest_.blocks.size() + bi) * floats;
  std::vector<double> data(payload_.begin() + static_cast<std::ptrdiff_t>(offset),
                           payload_.begin() + static_cast<std::ptrdiff_t>(offset + floats));
  return JointAttentionMatrix(std::move(data), manifest_.n, manifest_.m, manifest_.kind,
                              manifest_.blocks[bi], manifest_.timesteps[ti]);
}

JointAttentionMatrix AttentionDump::matrix(int timestep, int block) const {
  return matrix_at(timestep_pos(timestep), block_pos(block));
}

std::vector<JointAttentionMatrix> AttentionDump::timestep_blocks(int timestep) const {
  const std::size_t ti = timestep_pos(timestep);
  std::vector<JointAttentionMatrix> out;
  out.reserve(manifest_.blocks.size());
  for (std::size_t bi = 0; bi < manifest_.blocks.size(); ++bi) out.push_back(matrix_at(ti, bi));
  return out;
}

PromptSpec AttentionDump::token_spec() const {
  if (manifest_.subject_groups.empty()) throw DataError("dump declares no subject groups");
  std::vector<SubjectGroup> groups;
  for (const auto& [id, tokens] : manifest_.subject_groups) groups.push_back({id, tokens});
  return PromptSpec(std::move(groups));
}

bool AttentionDump::operator==(const AttentionDump& other) const {
  return manifest_ == other.manifest_ && payload_.size() == other.payload_.size() &&
         std::memcmp(payload_.data(), other.payload_.data(),
                     payload_.size() * sizeof(float)) == 0;
}

std::string serialize_dump(const AttentionDump& dump) {
  const auto& mf = dump.manifest();
  if (mf.timesteps.empty()) throw DataError("refusing to write a dump with no timesteps");
  if (mf.blocks.empty()) throw DataError("refusing to write a dump with no blocks");
  for (float v : dump.payload()) {
    if (!std::isfinite(v)) throw DataError("refusing to write a non-finite payload value");
  }

  std::string out = manifest_to_json(mf).dump();
  out.push_back('\n');
  const std::size_t header = out.size();
  out.resize(header + dump.payload().size() * 4);
  char* dst = out.data() + header;
  for (float v : dump.payload()) {
    const std::uint32_t bits = to_little(std::bit_cast<std::uint32_t>(v));
    std::memcpy(dst, &bits, 4);
    dst += 4;
  }
  return out;
}

AttentionDump parse_dump(const std::string& bytes) {
  const auto newline = bytes.find('\n');
  if (newline == std::string::npos) {
    throw DumpFormatError("dump has no newline-terminated manifest");
  }
  DumpManifest mf = manifest_from_json(bytes.substr(0, newline));
  validate_manifest(mf);
  if (mf.timesteps.empty() || mf.blocks.empty()) {
    throw DumpFormatError("dump manifest lists no timesteps or no blocks");
  }

  const std::size_t payload_bytes = bytes.size() - newline - 1;
  const std::size_t expected = mf.num_matrices() * mf.matrix_floats() * 4;
  if (payload_bytes != expected) {
    throw DumpSizeError("dump payload is " + std::to_string(payload_bytes) +
                        " bytes, manifest implies " + std::to_string(expected));
  }
  std::vector<float> payload(expected / 4);
  const char* src = bytes.data() + newline + 1;
  for (float& v : payload) {
    std::uint32_t bits = 0;
    std::memcpy(&bits, src, 4);
    v = std::bit_cast<float>(to_little(bits));
    src += 4;
  }
  return AttentionDump(std::move(mf), std::move(payload));
}

AttentionDump read_dump(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open dump '" + path.string() + "'");
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) throw DataError("error reading dump '" + path.string() + "'");
  return parse_dump(bytes);
}

void write_dump(const AttentionDump& dump, const std::filesystem::path& path) {
  const std::string bytes = serialize_dump(dump);

  static std::atomic<unsigned> counter{0};
  std::filesystem::path tmp = path;
  tmp += ".tmp." + std::to_string(counter.fetch_add(1)) + "." +
         std::to_string(std::hash<std::string>{}(path.string()) & 0xffff);
  try {
    {
      std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
      if (!out) throw DataError("cannot create '" + tmp.string() + "'");
      out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
      out.flush();
      if (!out) throw DataError("short write to '" + tmp.string() + "'");
    }
    std::filesystem::rename(tmp, path);
  } catch (...) {
    std::error_code ec;
    std::filesystem::remove(tmp, ec);
    throw;
  }
}

}  // namespace jedi
