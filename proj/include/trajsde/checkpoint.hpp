#pragma once

#include <cstring>
#include <fstream>
#include <string>

#include <json.hpp>

#include "trajsde/param_store.hpp"

namespace trajsde::nn {

// Checkpoint layout: one JSON header line (slice names, shapes, format
// version, caller metadata), then '\n', then the flat parameter vector as
// raw 64-bit little-endian reals.

inline constexpr int kCheckpointVersion = 1;

inline void save_checkpoint(const std::string& path, const ParamStore& params,
                            const nlohmann::json& meta = nlohmann::json::object()) {
  nlohmann::json header;
  header["format_version"] = kCheckpointVersion;
  header["total_len"] = params.size();
  nlohmann::json slices = nlohmann::json::array();
  for (std::size_t i = 0; i < params.num_slices(); ++i) {
    const auto& s = params.slice(static_cast<SliceId>(i));
    nlohmann::json j{{"name", s.name}, {"rows", s.rows}, {"cols", s.cols}};
    slices.push_back(j);
  }
  header["slices"] = slices;
  header["meta"] = meta;

  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open checkpoint for writing: " + path);
  out << header.dump() << '\n';
  static_assert(sizeof(double) == 8);
  // Host is little-endian x86; the format is little-endian by definition.
  out.write(reinterpret_cast<const char*>(params.flat().data()),
            static_cast<std::streamsize>(params.size() * sizeof(double)));
  if (!out) throw DataError("short write on checkpoint: " + path);
}

struct Checkpoint {
  ParamStore params;
  nlohmann::json meta;
};

inline Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open checkpoint: " + path);
  std::string header_line;
  if (!std::getline(in, header_line)) throw DataError("checkpoint missing header: " + path);
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(header_line);
  } catch (const nlohmann::json::exception& e) {
    throw DataError("checkpoint header is not valid JSON (" + std::string(e.what()) + "): " + path);
  }
  if (header.value("format_version", -1) != kCheckpointVersion)
    throw DataError("unsupported checkpoint format version in " + path);

  Checkpoint ck;
  for (const auto& s : header.at("slices")) {
    const std::string name = s.at("name").get<std::string>();
    const int rows = s.at("rows").get<int>();
    const int cols = s.at("cols").get<int>();
    if (cols > 0)
      ck.params.add_matrix(name, rows, cols);
    else
      ck.params.add_vector(name, rows);
  }
  const auto total = header.at("total_len").get<std::size_t>();
  if (total != ck.params.size()) throw DataError("checkpoint header length mismatch: " + path);
  in.read(reinterpret_cast<char*>(ck.params.flat().data()),
          static_cast<std::streamsize>(total * sizeof(double)));
  if (static_cast<std::size_t>(in.gcount()) != total * sizeof(double))
    throw DataError("checkpoint payload truncated: " + path);
  ck.meta = header.value("meta", nlohmann::json::object());
  return ck;
}

}  // namespace trajsde::nn
