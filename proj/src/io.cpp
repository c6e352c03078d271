#include "lamcoal/io.hpp"

#include <array>
#include <charconv>
#include <chrono>
#include <ctime>
#include <iomanip>
#include <sstream>

#include <openssl/evp.h>

#include "lamcoal/errors.hpp"

namespace lamcoal {

std::string format_double(double x) {
  std::array<char, 64> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), x);
  return std::string(buf.data(), res.ptr);
}

CsvWriter::CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header)
    : out_(path, std::ios::binary), path_(path) {
  if (!out_) throw Error("cannot open " + path.string() + " for writing");
  for (const auto& h : header) *this << h;
  end_row();
}

void CsvWriter::separator() {
  if (!first_) out_ << ',';
  first_ = false;
}

CsvWriter& CsvWriter::operator<<(double x) {
  separator();
  out_ << format_double(x);
  return *this;
}

CsvWriter& CsvWriter::operator<<(std::int64_t x) {
  separator();
  out_ << x;
  return *this;
}

CsvWriter& CsvWriter::operator<<(std::uint64_t x) {
  separator();
  out_ << x;
  return *this;
}

CsvWriter& CsvWriter::operator<<(const std::string& s) {
  separator();
  if (s.find_first_of(",\"\n") == std::string::npos) {
    out_ << s;
  } else {
    out_ << '"';
    for (char ch : s) out_ << (ch == '"' ? "\"\"" : std::string(1, ch));
    out_ << '"';
  }
  return *this;
}

void CsvWriter::end_row() {
  out_ << '\n';
  first_ = true;
}

void CsvWriter::close() {
  out_.close();
  if (!out_) throw Error("failed writing " + path_.string());
}

void write_json(const std::filesystem::path& path, const nlohmann::json& j) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  out << j.dump(2) << '\n';
  if (!out) throw Error("failed writing " + path.string());
}

nlohmann::json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DomainError("cannot read " + path.string());
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw DomainError("malformed JSON in " + path.string() + ": " + e.what());
  }
}

std::string sha256_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read " + path.string());
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  if (!ctx || EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr) != 1) {
    EVP_MD_CTX_free(ctx);
    throw Error("sha256: digest initialisation failed");
  }
  std::array<char, 1 << 16> buf;
  while (in) {
    in.read(buf.data(), buf.size());
    if (in.gcount() > 0) EVP_DigestUpdate(ctx, buf.data(), static_cast<std::size_t>(in.gcount()));
  }
  std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx, md.data(), &len);
  EVP_MD_CTX_free(ctx);
  std::ostringstream os;
  for (unsigned int i = 0; i < len; ++i)
    os << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(md[i]);
  return os.str();
}

void RunManifest::add_output(const std::filesystem::path& p) {
  outputs.push_back({p.string(), sha256_file(p), std::filesystem::file_size(p)});
}

nlohmann::json RunManifest::to_json() const {
  nlohmann::json files = nlohmann::json::array();
  for (const auto& f : outputs) files.push_back({{"path", f.path}, {"sha256", f.sha256}, {"bytes", f.bytes}});
  return {{"subcommand", subcommand}, {"config", config},       {"seed", seed},
          {"version", version},       {"started", started},     {"finished", finished},
          {"outputs", files},         {"status", status},       {"exit_code", exit_code},
          {"message", message}};
}

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t tt = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&tt, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return os.str();
}

}  // namespace lamcoal
