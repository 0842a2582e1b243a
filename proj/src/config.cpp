#include "irwri/config.hpp"

#include <unistd.h>

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <limits>
#include <sstream>

extern char** environ;

namespace irwri {

namespace {

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return s;
}

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  std::size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

double parse_double(const std::string& section, const std::string& key,
                    const std::string& value) {
  const std::string v = trim(value);
  if (v == "inf" || v == "+inf") {
    return std::numeric_limits<double>::infinity();
  }
  double out = 0.0;
  const char* first = v.data();
  const char* last = v.data() + v.size();
  auto [ptr, ec] = std::from_chars(first, last, out);
  if (ec != std::errc() || ptr != last) {
    throw ConfigError("[" + section + "] " + key + ": '" + value +
                      "' is not a number");
  }
  return out;
}

}  // namespace

ConfigMap ConfigMap::parse_string(const std::string& text) {
  ConfigMap cfg;
  std::istringstream in(text);
  std::string line;
  std::string section;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#' || t[0] == ';') continue;
    if (t.front() == '[') {
      if (t.back() != ']' || t.size() < 3) {
        throw ConfigError("config line " + std::to_string(line_no) +
                          ": malformed section header '" + t + "'");
      }
      section = lower(trim(t.substr(1, t.size() - 2)));
      if (section.empty()) {
        throw ConfigError("config line " + std::to_string(line_no) +
                          ": empty section name");
      }
      continue;
    }
    const std::size_t eq = t.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config line " + std::to_string(line_no) +
                        ": expected key = value, got '" + t + "'");
    }
    const std::string key = lower(trim(t.substr(0, eq)));
    const std::string value = trim(t.substr(eq + 1));
    if (key.empty()) {
      throw ConfigError("config line " + std::to_string(line_no) +
                        ": empty key");
    }
    if (section.empty()) {
      throw ConfigError("config line " + std::to_string(line_no) +
                        ": key '" + key + "' appears before any [section]");
    }
    if (cfg.find(section, key) != nullptr) {
      throw ConfigError("duplicate key [" + section + "] " + key);
    }
    cfg.set(section, key, value);
  }
  return cfg;
}

ConfigMap ConfigMap::parse_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw ConfigError("cannot open config file " + path.string());
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_string(buf.str());
}

int ConfigMap::apply_env_overrides(const std::string& prefix) {
  int applied = 0;
  for (char** e = environ; e != nullptr && *e != nullptr; ++e) {
    const std::string entry(*e);
    if (entry.compare(0, prefix.size(), prefix) != 0) continue;
    const std::size_t eq = entry.find('=');
    if (eq == std::string::npos) continue;
    const std::string name = entry.substr(prefix.size(), eq - prefix.size());
    const std::string value = entry.substr(eq + 1);
    const std::size_t sep = name.find("__");
    if (sep == std::string::npos || sep == 0 || sep + 2 >= name.size()) {
      throw ConfigError("environment override " + prefix + name +
                        " must look like " + prefix + "SECTION__KEY");
    }
    const std::string section = lower(name.substr(0, sep));
    const std::string key = lower(name.substr(sep + 2));
    set(section, key, value);
    ++applied;
  }
  return applied;
}

const std::string* ConfigMap::find(const std::string& section,
                                   const std::string& key) const {
  const std::string s = lower(section);
  const std::string k = lower(key);
  for (const Section& sec : sections_) {
    if (sec.name != s) continue;
    for (const auto& [ek, ev] : sec.entries) {
      if (ek == k) return &ev;
    }
  }
  return nullptr;
}

bool ConfigMap::has(const std::string& section, const std::string& key) const {
  return find(section, key) != nullptr;
}

bool ConfigMap::has_section(const std::string& section) const {
  const std::string s = lower(section);
  for (const Section& sec : sections_) {
    if (sec.name == s) return true;
  }
  return false;
}

std::string ConfigMap::get_string(const std::string& section,
                                  const std::string& key) const {
  const std::string* v = find(section, key);
  if (v == nullptr) {
    throw ConfigError("missing config key [" + lower(section) + "] " +
                      lower(key));
  }
  return *v;
}

std::string ConfigMap::get_string(const std::string& section,
                                  const std::string& key,
                                  const std::string& fallback) const {
  const std::string* v = find(section, key);
  return v == nullptr ? fallback : *v;
}

double ConfigMap::get_double(const std::string& section,
                             const std::string& key) const {
  return parse_double(section, key, get_string(section, key));
}

double ConfigMap::get_double(const std::string& section, const std::string& key,
                             double fallback) const {
  const std::string* v = find(section, key);
  return v == nullptr ? fallback : parse_double(section, key, *v);
}

int ConfigMap::get_int(const std::string& section,
                       const std::string& key) const {
  const double d = get_double(section, key);
  const int i = static_cast<int>(d);
  if (double(i) != d) {
    throw ConfigError("[" + lower(section) + "] " + lower(key) +
                      " must be an integer");
  }
  return i;
}

int ConfigMap::get_int(const std::string& section, const std::string& key,
                       int fallback) const {
  return has(section, key) ? get_int(section, key) : fallback;
}

std::uint64_t ConfigMap::get_u64(const std::string& section,
                                 const std::string& key,
                                 std::uint64_t fallback) const {
  const std::string* v = find(section, key);
  if (v == nullptr) return fallback;
  const std::string t = trim(*v);
  std::uint64_t out = 0;
  auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), out);
  if (ec != std::errc() || ptr != t.data() + t.size()) {
    throw ConfigError("[" + lower(section) + "] " + lower(key) +
                      " must be an unsigned integer");
  }
  return out;
}

bool ConfigMap::get_bool(const std::string& section, const std::string& key,
                         bool fallback) const {
  const std::string* v = find(section, key);
  if (v == nullptr) return fallback;
  const std::string t = lower(trim(*v));
  if (t == "true" || t == "1" || t == "yes" || t == "on") return true;
  if (t == "false" || t == "0" || t == "no" || t == "off") return false;
  throw ConfigError("[" + lower(section) + "] " + lower(key) +
                    " must be a boolean");
}

std::vector<std::string> ConfigMap::get_string_list(
    const std::string& section, const std::string& key) const {
  const std::string raw = get_string(section, key);
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(raw);
  while (std::getline(in, item, ',')) {
    const std::string t = trim(item);
    if (!t.empty()) out.push_back(t);
  }
  if (out.empty()) {
    throw ConfigError("[" + lower(section) + "] " + lower(key) +
                      " must be a non-empty comma-separated list");
  }
  return out;
}

std::vector<double> ConfigMap::get_double_list(const std::string& section,
                                               const std::string& key) const {
  std::vector<double> out;
  for (const std::string& item : get_string_list(section, key)) {
    out.push_back(parse_double(section, key, item));
  }
  return out;
}

void ConfigMap::set(const std::string& section, const std::string& key,
                    const std::string& value) {
  const std::string s = lower(section);
  const std::string k = lower(key);
  for (Section& sec : sections_) {
    if (sec.name != s) continue;
    for (auto& [ek, ev] : sec.entries) {
      if (ek == k) {
        ev = value;
        return;
      }
    }
    sec.entries.emplace_back(k, value);
    return;
  }
  sections_.push_back(Section{s, {{k, value}}});
}

void ConfigMap::require_known(
    const std::map<std::string, std::set<std::string>>& schema) const {
  for (const Section& sec : sections_) {
    const auto it = schema.find(sec.name);
    if (it == schema.end()) {
      throw ConfigError("unknown config section [" + sec.name + "]");
    }
    for (const auto& [key, value] : sec.entries) {
      if (it->second.count(key) == 0) {
        throw ConfigError("unknown config key [" + sec.name + "] " + key);
      }
    }
  }
}

std::string ConfigMap::serialize() const {
  std::ostringstream out;
  bool first = true;
  for (const Section& sec : sections_) {
    if (!first) out << "\n";
    first = false;
    out << "[" << sec.name << "]\n";
    for (const auto& [key, value] : sec.entries) {
      out << key << " = " << value << "\n";
    }
  }
  return out.str();
}

void ConfigMap::write_file(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) {
    throw Error("cannot write " + path.string());
  }
  out << serialize();
}

}  // namespace irwri
