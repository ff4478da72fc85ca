#pragma once

#include <map>
#include <string>
#include <string_view>

namespace decoh {

inline constexpr const char* kCodeVersion = "decoh-1.0.0";

std::string sha256_hex(std::string_view data);
std::string sha256_file(const std::string& path);

/// Digest of a normalized configuration together with the code-version tag.
std::string config_digest(const std::string& normalized_config);

/// Line-oriented key=value run record; keys are written sorted, no timestamps.
class Manifest {
 public:
  void set(const std::string& key, const std::string& value);
  /// Records file.<name>=<sha256 of the file contents>.
  void add_file(const std::string& name, const std::string& path);
  const std::map<std::string, std::string>& entries() const { return entries_; }
  std::string text() const;
  void write(const std::string& path) const;
  static Manifest read(const std::string& path);

 private:
  std::map<std::string, std::string> entries_;
};

}  // namespace decoh
