#include "hjlab/io.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>

namespace hjlab {

std::string format_double(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

std::string sha256_hex(std::string_view bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int length = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &length, EVP_sha256(), nullptr) != 1) {
    throw IoError("SHA-256 computation failed");
  }
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < length; ++i) {
    out.push_back(hex[digest[i] >> 4]);
    out.push_back(hex[digest[i] & 0xf]);
  }
  return out;
}

OutputDirectory::OutputDirectory(std::filesystem::path root) : root_(std::move(root)) {
  std::error_code ec;
  std::filesystem::create_directories(root_, ec);
  if (ec) throw IoError("cannot create output directory " + root_.string() + ": " + ec.message());
}

void OutputDirectory::put(const std::string& relative, const std::string& content, bool is_volatile) {
  const std::filesystem::path path = root_ / relative;
  std::error_code ec;
  std::filesystem::create_directories(path.parent_path(), ec);
  if (ec) throw IoError("cannot create directory " + path.parent_path().string() + ": " + ec.message());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  out.close();
  if (!out) throw IoError("write failed for " + path.string());
  Entry e{relative, is_volatile ? std::string() : sha256_hex(content), content.size(), is_volatile};
  for (auto& existing : entries_) {
    if (existing.path == relative) {
      existing = e;
      return;
    }
  }
  entries_.push_back(std::move(e));
}

void OutputDirectory::write(const std::string& relative, const std::string& content) {
  put(relative, content, false);
}

void OutputDirectory::write_json(const std::string& relative, const nlohmann::json& doc) {
  put(relative, doc.dump(2) + "\n", false);
}

void OutputDirectory::write_metadata(const nlohmann::json& fields) {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char stamp[32];
  std::strftime(stamp, sizeof(stamp), "%Y-%m-%dT%H:%M:%SZ", &tm);
  nlohmann::json doc = fields;
  doc["timestamp"] = stamp;
  put("metadata.json", doc.dump(2) + "\n", true);
}

void OutputDirectory::write_manifest() {
  nlohmann::json files = nlohmann::json::array();
  nlohmann::json volatile_files = nlohmann::json::array();
  std::vector<Entry> sorted = entries_;
  std::sort(sorted.begin(), sorted.end(), [](const Entry& a, const Entry& b) { return a.path < b.path; });
  for (const auto& e : sorted) {
    if (e.is_volatile) {
      volatile_files.push_back({{"path", e.path}});
    } else {
      files.push_back({{"path", e.path}, {"sha256", e.sha256}, {"bytes", e.bytes}});
    }
  }
  const nlohmann::json manifest = {{"files", files}, {"volatile", volatile_files}};
  const std::filesystem::path path = root_ / "manifest.json";
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << manifest.dump(2) << "\n";
  if (!out) throw IoError("write failed for " + path.string());
}

std::string lip_series_csv(const RegularityReport& report) {
  std::string out = "datum_id,R,t,lip,K\n";
  auto rows = [&out](const std::string& id, const std::string& R, const LipSeries& s) {
    for (std::size_t i = 0; i < s.times.size(); ++i) {
      out += id + "," + R + "," + format_double(s.times[i]) + "," + format_double(s.lip[i]) + "," +
             format_double(s.K[i]) + "\n";
    }
  };
  for (const auto& d : report.data) {
    for (const auto& r : d.runs) rows(d.id, format_double(r.R), r.series);
    rows(d.id, "min", d.combined);
  }
  return out;
}

}  // namespace hjlab
