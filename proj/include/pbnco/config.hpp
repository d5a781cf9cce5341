#pragma once

#include <cstdint>
#include <map>
#include <string>

namespace pbnco {

/// Flat key=value experiment config. Syntax per line: blank, '#' comment,
/// `include <path>` (resolved relative to the including file), or
/// `key = value`. Later assignments override earlier ones, so an include
/// acts as a set of defaults when placed first.
class Config {
 public:
  Config() = default;

  static Config from_file(const std::string& path);
  static Config from_string(const std::string& text);

  bool has(const std::string& key) const { return values_.count(key) > 0; }
  void set(const std::string& key, const std::string& value) {
    values_[key] = value;
  }

  /// Missing key -> std::out_of_range naming the key.
  const std::string& require(const std::string& key) const;

  std::string get(const std::string& key, const std::string& fallback) const;
  long long get_int(const std::string& key, long long fallback) const;
  double get_real(const std::string& key, double fallback) const;
  /// Accepts true/false, yes/no, on/off, 1/0 (case-insensitive).
  bool get_bool(const std::string& key, bool fallback) const;

  /// Sorted view of the fully resolved entries (includes flattened).
  const std::map<std::string, std::string>& entries() const { return values_; }

  /// Canonical `key = value` text, sorted by key. Parsing the result
  /// reproduces the same entries.
  std::string serialize() const;

 private:
  std::map<std::string, std::string> values_;
};

/// FNV-1a 64 over a byte string.
std::uint64_t fnv1a64(const std::string& bytes);

/// Hex FNV-1a digest of a file's contents; throws if unreadable.
std::string file_digest_hex(const std::string& path);

}  // namespace pbnco
