#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace eotsim::io {

// Shortest round-trip decimal form; locale independent, so identical configs
// reproduce byte-identical CSVs.
std::string format_double(double value);

std::uint64_t fnv1a64(std::string_view data);

// Writes via a temporary file and rename, so partially written outputs never
// appear under the final name.
void write_text_atomic(const std::filesystem::path& path, const std::string& content);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};

std::string render_csv(const CsvTable& table);
void write_csv(const std::filesystem::path& path, const CsvTable& table);

// Portable binary matrix: magic "EOTF", two little-endian u32 dims
// (rows, cols), then rows*cols little-endian float64, row major.
void write_eotf(const std::filesystem::path& path, std::uint32_t rows, std::uint32_t cols,
                const std::vector<double>& row_major);
std::vector<double> read_eotf(const std::filesystem::path& path, std::uint32_t& rows,
                              std::uint32_t& cols);

struct OutputRecord {
  std::string name;
  std::uint64_t checksum_fnv1a64 = 0;
  std::uint64_t bytes = 0;
};

struct RunManifest {
  std::string command;
  std::uint64_t config_hash = 0;
  std::string tool_version;
  std::string git_describe;
  std::string started_utc;
  std::string finished_utc;
  std::string status = "ok";
  std::vector<OutputRecord> outputs;
};

// Serializes and writes manifest.json atomically; a run directory without a
// manifest is by definition a failed run.
void write_manifest(const std::filesystem::path& directory, const RunManifest& manifest);

std::string utc_now_iso8601();

}  // namespace eotsim::io
