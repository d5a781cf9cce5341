#include "pbnco/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace pbnco {

namespace {

std::string trim(const std::string& s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

[[noreturn]] void fail(const std::string& where, int line,
                       const std::string& what) {
  std::ostringstream msg;
  msg << "config " << where << ":" << line << ": " << what;
  throw std::runtime_error(msg.str());
}

void parse_into(Config& cfg, const std::string& text, const std::string& where,
                const std::filesystem::path& base, int depth) {
  if (depth > 16)
    throw std::runtime_error("config: include nesting exceeds 16 (cycle?)");
  std::istringstream in(text);
  std::string raw;
  int lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    if (auto hash = raw.find('#'); hash != std::string::npos)
      raw.resize(hash);
    const std::string line = trim(raw);
    if (line.empty()) continue;

    if (line.rfind("include ", 0) == 0 || line == "include") {
      const std::string target = trim(line.substr(7));
      if (target.empty()) fail(where, lineno, "include without a path");
      const std::filesystem::path p =
          base.empty() ? std::filesystem::path(target) : base / target;
      std::ifstream f(p);
      if (!f) fail(where, lineno, "cannot open include " + p.string());
      std::ostringstream body;
      body << f.rdbuf();
      parse_into(cfg, body.str(), p.string(), p.parent_path(), depth + 1);
      continue;
    }

    const auto eq = line.find('=');
    if (eq == std::string::npos)
      fail(where, lineno, "expected key = value, got '" + line + "'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) fail(where, lineno, "empty key");
    cfg.set(key, value);
  }
}

}  // namespace

Config Config::from_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("config: cannot open " + path);
  std::ostringstream body;
  body << f.rdbuf();
  Config cfg;
  parse_into(cfg, body.str(), path,
             std::filesystem::path(path).parent_path(), 0);
  return cfg;
}

Config Config::from_string(const std::string& text) {
  Config cfg;
  parse_into(cfg, text, "<string>", {}, 0);
  return cfg;
}

const std::string& Config::require(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end())
    throw std::out_of_range("config: missing required key '" + key + "'");
  return it->second;
}

std::string Config::get(const std::string& key,
                        const std::string& fallback) const {
  auto it = values_.find(key);
  return it == values_.end() ? fallback : it->second;
}

long long Config::get_int(const std::string& key, long long fallback) const {
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  long long v = 0;
  const auto& s = it->second;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size())
    throw std::runtime_error("config: key '" + key + "' is not an integer: " +
                             s);
  return v;
}

double Config::get_real(const std::string& key, double fallback) const {
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  const auto& s = it->second;
  double v = 0.0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size())
    throw std::runtime_error("config: key '" + key + "' is not a number: " + s);
  return v;
}

bool Config::get_bool(const std::string& key, bool fallback) const {
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  std::string s = it->second;
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  if (s == "true" || s == "yes" || s == "on" || s == "1") return true;
  if (s == "false" || s == "no" || s == "off" || s == "0") return false;
  throw std::runtime_error("config: key '" + key + "' is not a boolean: " +
                           it->second);
}

std::string Config::serialize() const {
  std::ostringstream out;
  for (const auto& [k, v] : values_) out << k << " = " << v << "\n";
  return out.str();
}

std::uint64_t fnv1a64(const std::string& bytes) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::string file_digest_hex(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("digest: cannot open " + path);
  std::ostringstream body;
  body << f.rdbuf();
  std::ostringstream hex;
  hex << std::hex;
  const std::uint64_t h = fnv1a64(body.str());
  for (int shift = 60; shift >= 0; shift -= 4)
    hex << "0123456789abcdef"[(h >> shift) & 0xF];
  return hex.str();
}

}  // namespace pbnco
