#include "eotsim/io.hpp"

#include <bit>
#include <charconv>
#include <chrono>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

namespace eotsim::io {

std::string format_double(double value) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value);
  if (res.ec != std::errc{}) {
    throw std::runtime_error("failed to format double");
  }
  return std::string(buf, res.ptr);
}

std::uint64_t fnv1a64(std::string_view data) {
  std::uint64_t hash = 0xcbf29ce484222325ull;
  for (const unsigned char c : data) {
    hash ^= c;
    hash *= 0x100000001b3ull;
  }
  return hash;
}

void write_text_atomic(const std::filesystem::path& path, const std::string& content) {
  const auto tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) {
      throw std::runtime_error("cannot open for writing: " + tmp);
    }
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) {
      throw std::runtime_error("short write: " + tmp);
    }
  }
  std::filesystem::rename(tmp, path);
}

std::string render_csv(const CsvTable& table) {
  std::string out;
  for (std::size_t c = 0; c < table.header.size(); ++c) {
    if (c) out += ',';
    out += table.header[c];
  }
  out += '\n';
  for (const auto& row : table.rows) {
    if (row.size() != table.header.size()) {
      throw std::runtime_error("csv row width does not match the header");
    }
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c) out += ',';
      out += format_double(row[c]);
    }
    out += '\n';
  }
  return out;
}

void write_csv(const std::filesystem::path& path, const CsvTable& table) {
  write_text_atomic(path, render_csv(table));
}

void write_eotf(const std::filesystem::path& path, std::uint32_t rows, std::uint32_t cols,
                const std::vector<double>& row_major) {
  if (row_major.size() != static_cast<std::size_t>(rows) * cols) {
    throw std::runtime_error("matrix size does not match dims");
  }
  static_assert(std::endian::native == std::endian::little,
                "eotf writer assumes a little-endian host");
  std::string out;
  out.reserve(12 + row_major.size() * 8);
  out += "EOTF";
  auto put_u32 = [&](std::uint32_t v) {
    char b[4];
    std::memcpy(b, &v, 4);
    out.append(b, 4);
  };
  put_u32(rows);
  put_u32(cols);
  const auto* bytes = reinterpret_cast<const char*>(row_major.data());
  out.append(bytes, row_major.size() * 8);
  write_text_atomic(path, out);
}

std::vector<double> read_eotf(const std::filesystem::path& path, std::uint32_t& rows,
                              std::uint32_t& cols) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw std::runtime_error("cannot open: " + path.string());
  }
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, "EOTF", 4) != 0) {
    throw std::runtime_error("not an EOTF file: " + path.string());
  }
  in.read(reinterpret_cast<char*>(&rows), 4);
  in.read(reinterpret_cast<char*>(&cols), 4);
  std::vector<double> data(static_cast<std::size_t>(rows) * cols);
  in.read(reinterpret_cast<char*>(data.data()), static_cast<std::streamsize>(data.size() * 8));
  if (!in) {
    throw std::runtime_error("truncated EOTF file: " + path.string());
  }
  return data;
}

std::string utc_now_iso8601() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t tt = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&tt, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void write_manifest(const std::filesystem::path& directory, const RunManifest& manifest) {
  nlohmann::json j;
  j["command"] = manifest.command;
  j["config_hash"] = manifest.config_hash;
  j["tool_version"] = manifest.tool_version;
  j["git_describe"] = manifest.git_describe;
  j["started_utc"] = manifest.started_utc;
  j["finished_utc"] = manifest.finished_utc;
  j["status"] = manifest.status;
  j["outputs"] = nlohmann::json::array();
  for (const auto& rec : manifest.outputs) {
    j["outputs"].push_back({{"name", rec.name},
                            {"checksum_fnv1a64", rec.checksum_fnv1a64},
                            {"bytes", rec.bytes}});
  }
  write_text_atomic(directory / "manifest.json", j.dump(2) + "\n");
}

}  // namespace eotsim::io
