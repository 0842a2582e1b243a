#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "irwri/types.hpp"

namespace irwri {

// Sectioned key = value document. Section and key names are
// case-insensitive (stored lowercase); values keep their case. Lines whose
// first non-blank character is '#' or ';' are comments; inline comments are
// not supported. Duplicate keys within a section are rejected.
class ConfigMap {
 public:
  static ConfigMap parse_file(const std::filesystem::path& path);
  static ConfigMap parse_string(const std::string& text);

  // Applies IRWRI_<SECTION>__<KEY>=value process environment overrides.
  // Returns the number of overrides applied.
  int apply_env_overrides(const std::string& prefix = "IRWRI_");

  bool has(const std::string& section, const std::string& key) const;
  bool has_section(const std::string& section) const;

  // Missing keys throw ConfigError naming the section and key; the
  // defaulted variants return `fallback` instead.
  std::string get_string(const std::string& section,
                         const std::string& key) const;
  std::string get_string(const std::string& section, const std::string& key,
                         const std::string& fallback) const;
  double get_double(const std::string& section, const std::string& key) const;
  double get_double(const std::string& section, const std::string& key,
                    double fallback) const;
  int get_int(const std::string& section, const std::string& key) const;
  int get_int(const std::string& section, const std::string& key,
              int fallback) const;
  std::uint64_t get_u64(const std::string& section, const std::string& key,
                        std::uint64_t fallback) const;
  bool get_bool(const std::string& section, const std::string& key,
                bool fallback) const;
  // Comma-separated list of numbers.
  std::vector<double> get_double_list(const std::string& section,
                                      const std::string& key) const;
  std::vector<std::string> get_string_list(const std::string& section,
                                           const std::string& key) const;

  void set(const std::string& section, const std::string& key,
           const std::string& value);

  // Rejects any present section/key pair absent from the schema. Sections
  // listed with an empty key set accept no keys at all.
  void require_known(
      const std::map<std::string, std::set<std::string>>& schema) const;

  // Round-trippable text in insertion order.
  std::string serialize() const;
  void write_file(const std::filesystem::path& path) const;

 private:
  struct Section {
    std::string name;
    std::vector<std::pair<std::string, std::string>> entries;
  };
  std::vector<Section> sections_;

  const std::string* find(const std::string& section,
                          const std::string& key) const;
};

}  // namespace irwri
