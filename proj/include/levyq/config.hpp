#ifndef LEVYQ_CONFIG_HPP
#define LEVYQ_CONFIG_HPP

/**
 * @file config.hpp
 * @brief Flat key-value configuration files (TOML-compatible subset).
 *
 * The harness and CLI read configs of the form
 *
 *     # comment
 *     scenario = "fig3"
 *     xi_list = [0.1, 1, 5]
 *     alphas = "0.1:0.1:5"
 *     seed = 20260819
 *
 * Only flat `key = value` lines are supported: quoted or bare strings,
 * numbers, and flat arrays.  That subset is valid TOML, stays diff-able, and
 * round-trips through the run manifests (`key=value` lines) unchanged.
 *
 * Alpha grids additionally accept two range forms through parse_grid():
 * `lo:step:hi` (inclusive linear grid) and `log:lo:hi:count` (log-spaced).
 */

#include <cctype>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "levyq/errors.hpp"

namespace levyq {

namespace detail {

inline std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

inline std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

inline double parse_double(const std::string& raw, const std::string& where) {
  const std::string s = trim(raw);
  if (s.empty()) throw config_error(where + ": empty number");
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end != s.c_str() + s.size())
    throw config_error(where + ": not a number: '" + s + "'");
  return v;
}

}  // namespace detail

/** Parsed flat key-value config; later duplicates override earlier ones. */
class KeyValueConfig {
 public:
  /** Parse from text.  Malformed lines raise config_error. */
  static KeyValueConfig parse(const std::string& text) {
    KeyValueConfig cfg;
    std::istringstream in(text);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      // Strip comments ('#' outside quotes), then skip blanks.
      std::string stripped;
      bool quoted = false;
      for (char c : line) {
        if (c == '"') quoted = !quoted;
        if (c == '#' && !quoted) break;
        stripped += c;
      }
      stripped = detail::trim(stripped);
      if (stripped.empty()) continue;
      const std::size_t eq = stripped.find('=');
      if (eq == std::string::npos)
        throw config_error("config line " + std::to_string(lineno) +
                           ": expected key = value, got '" + stripped + "'");
      std::string key = detail::trim(stripped.substr(0, eq));
      std::string value = detail::trim(stripped.substr(eq + 1));
      if (key.empty())
        throw config_error("config line " + std::to_string(lineno) +
                           ": empty key");
      if (value.size() >= 2 && value.front() == '"' && value.back() == '"')
        value = value.substr(1, value.size() - 2);
      cfg.set(key, value);
    }
    return cfg;
  }

  /** Parse a config file; unreadable path raises config_error. */
  static KeyValueConfig from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw config_error("cannot read config file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse(buf.str());
  }

  void set(const std::string& key, const std::string& value) {
    for (auto& kv : entries_)
      if (kv.first == key) {
        kv.second = value;
        return;
      }
    entries_.emplace_back(key, value);
  }

  bool has(const std::string& key) const { return find(key) != nullptr; }

  std::string get_string(const std::string& key) const {
    const std::string* v = find(key);
    if (!v) throw config_error("missing config key: " + key);
    return *v;
  }

  std::string get_string(const std::string& key, const std::string& dflt) const {
    const std::string* v = find(key);
    return v ? *v : dflt;
  }

  double get_double(const std::string& key) const {
    return detail::parse_double(get_string(key), "key '" + key + "'");
  }

  double get_double(const std::string& key, double dflt) const {
    const std::string* v = find(key);
    return v ? detail::parse_double(*v, "key '" + key + "'") : dflt;
  }

  std::uint64_t get_uint64(const std::string& key, std::uint64_t dflt) const {
    const std::string* v = find(key);
    if (!v) return dflt;
    const std::string s = detail::trim(*v);
    char* end = nullptr;
    const unsigned long long u = std::strtoull(s.c_str(), &end, 10);
    if (s.empty() || end != s.c_str() + s.size() || s[0] == '-')
      throw config_error("key '" + key + "': not a non-negative integer: '" +
                         s + "'");
    return static_cast<std::uint64_t>(u);
  }

  std::size_t get_size(const std::string& key, std::size_t dflt) const {
    return static_cast<std::size_t>(
        get_uint64(key, static_cast<std::uint64_t>(dflt)));
  }

  /** Flat list of doubles: `[a, b, c]` or `a,b,c`; empty value -> empty. */
  std::vector<double> get_double_list(const std::string& key) const {
    const std::string* v = find(key);
    if (!v) throw config_error("missing config key: " + key);
    return parse_list(*v, key);
  }

  std::vector<double> get_double_list(const std::string& key,
                                      std::vector<double> dflt) const {
    const std::string* v = find(key);
    return v ? parse_list(*v, key) : std::move(dflt);
  }

  std::vector<std::size_t> get_size_list(const std::string& key,
                                         std::vector<std::size_t> dflt) const {
    const std::string* v = find(key);
    if (!v) return dflt;
    std::vector<std::size_t> out;
    for (double d : parse_list(*v, key)) {
      if (d < 0.0 || d != std::floor(d))
        throw config_error("key '" + key +
                           "': expected non-negative integers");
      out.push_back(static_cast<std::size_t>(d));
    }
    return out;
  }

  const std::vector<std::pair<std::string, std::string>>& entries() const {
    return entries_;
  }

 private:
  static std::vector<double> parse_list(const std::string& raw,
                                        const std::string& key) {
    std::string s = detail::trim(raw);
    if (!s.empty() && s.front() == '[' && s.back() == ']')
      s = detail::trim(s.substr(1, s.size() - 2));
    std::vector<double> out;
    if (s.empty()) return out;
    for (const std::string& part : detail::split(s, ','))
      out.push_back(detail::parse_double(part, "key '" + key + "'"));
    return out;
  }

  const std::string* find(const std::string& key) const {
    for (const auto& kv : entries_)
      if (kv.first == key) return &kv.second;
    return nullptr;
  }

  std::vector<std::pair<std::string, std::string>> entries_;
};

/**
 * Parse an evaluation grid.  Accepted forms:
 *   - `lo:step:hi`       inclusive linear grid (endpoint snapped to hi)
 *   - `log:lo:hi:count`  log-spaced grid with `count` points
 *   - `a,b,c` / `[a,b,c]` explicit list
 *   - a single number
 */
inline std::vector<double> parse_grid(const std::string& text) {
  const std::string s = detail::trim(text);
  if (s.empty()) throw config_error("grid: empty specification");

  if (s.rfind("log:", 0) == 0) {
    const auto parts = detail::split(s, ':');
    if (parts.size() != 4)
      throw config_error("grid: expected log:lo:hi:count, got '" + s + "'");
    const double lo = detail::parse_double(parts[1], "grid lo");
    const double hi = detail::parse_double(parts[2], "grid hi");
    const double cnt = detail::parse_double(parts[3], "grid count");
    if (!(lo > 0.0) || !(hi > lo))
      throw config_error("grid: log range needs 0 < lo < hi");
    if (cnt < 1.0 || cnt != std::floor(cnt))
      throw config_error("grid: count must be a positive integer");
    const std::size_t count = static_cast<std::size_t>(cnt);
    std::vector<double> out;
    if (count == 1) return {lo};
    for (std::size_t k = 0; k < count; ++k)
      out.push_back(lo * std::pow(hi / lo,
                                  static_cast<double>(k) /
                                      static_cast<double>(count - 1)));
    out.back() = hi;
    return out;
  }

  if (s.find(':') != std::string::npos) {
    const auto parts = detail::split(s, ':');
    if (parts.size() != 3)
      throw config_error("grid: expected lo:step:hi, got '" + s + "'");
    const double lo = detail::parse_double(parts[0], "grid lo");
    const double step = detail::parse_double(parts[1], "grid step");
    const double hi = detail::parse_double(parts[2], "grid hi");
    if (!(step > 0.0) || hi < lo)
      throw config_error("grid: linear range needs step > 0 and hi >= lo");
    // Index-based generation (no accumulation drift); 1e-6 slack admits an
    // endpoint that rounding nudged just past hi, then snaps it back.
    const std::size_t count =
        static_cast<std::size_t>(std::floor((hi - lo) / step + 1e-6)) + 1;
    std::vector<double> out;
    for (std::size_t k = 0; k < count; ++k)
      out.push_back(lo + static_cast<double>(k) * step);
    if (std::abs(out.back() - hi) < step * 1e-6) out.back() = hi;
    return out;
  }

  // Explicit list or single number.
  std::string body = s;
  if (!body.empty() && body.front() == '[' && body.back() == ']')
    body = detail::trim(body.substr(1, body.size() - 2));
  std::vector<double> out;
  for (const std::string& part : detail::split(body, ','))
    out.push_back(detail::parse_double(part, "grid"));
  return out;
}

}  // namespace levyq

#endif  // LEVYQ_CONFIG_HPP
