#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "json.hpp"

namespace lamcoal {

/// Shortest decimal form that reads back to the same double.
std::string format_double(double x);

/// Streams a CSV file; numbers are written in round-trip precision.
class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header);

  CsvWriter& operator<<(double x);
  CsvWriter& operator<<(std::int64_t x);
  CsvWriter& operator<<(std::uint64_t x);
  CsvWriter& operator<<(int x) { return *this << static_cast<std::int64_t>(x); }
  CsvWriter& operator<<(const std::string& s);
  void end_row();
  void close();

 private:
  void separator();

  std::ofstream out_;
  std::filesystem::path path_;
  bool first_ = true;
};

void write_json(const std::filesystem::path& path, const nlohmann::json& j);
nlohmann::json read_json(const std::filesystem::path& path);

/// Lower-case hex SHA-256 of a file's bytes.
std::string sha256_file(const std::filesystem::path& path);

struct OutputFile {
  std::string path;
  std::string sha256;
  std::uintmax_t bytes = 0;
};

/// Record of one command-line run; written even when the run fails.
struct RunManifest {
  std::string subcommand;
  nlohmann::json config = nlohmann::json::object();
  std::uint64_t seed = 0;
  std::string version;
  std::string started;
  std::string finished;
  std::vector<OutputFile> outputs;
  std::string status = "running";
  int exit_code = 0;
  std::string message;

  void add_output(const std::filesystem::path& p);
  nlohmann::json to_json() const;
};

/// Current UTC time as ISO 8601.
std::string utc_timestamp();

}  // namespace lamcoal
