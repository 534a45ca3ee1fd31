#pragma once

#include "hjlab/regularity.hpp"

#include <json.hpp>

#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace hjlab {

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Shortest decimal text that round-trips to the same double.
std::string format_double(double value);

std::string sha256_hex(std::string_view bytes);

/// Output directory that records every file it writes. Data files are
/// hashed into manifest.json; volatile files (the run metadata with its
/// timestamp) are listed without a hash.
class OutputDirectory {
 public:
  explicit OutputDirectory(std::filesystem::path root);

  const std::filesystem::path& root() const { return root_; }
  void write(const std::string& relative, const std::string& content);
  void write_json(const std::string& relative, const nlohmann::json& doc);
  void write_metadata(const nlohmann::json& fields);
  void write_manifest();

 private:
  struct Entry {
    std::string path;
    std::string sha256;
    std::size_t bytes = 0;
    bool is_volatile = false;
  };
  void put(const std::string& relative, const std::string& content, bool is_volatile);

  std::filesystem::path root_;
  std::vector<Entry> entries_;
};

/// Columns datum_id,R,t,lip,K; rows of the R-combined series carry R = min.
std::string lip_series_csv(const RegularityReport& report);

}  // namespace hjlab
