#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "pspin/mixture.hpp"

namespace pspin::cli {

using json = nlohmann::json;

struct LoadedConfig {
  json doc;
  std::string hash_hex;  // FNV-1a 64 over the raw config bytes
};

/// Reads and parses a JSON run config; any failure maps to exit code 2.
LoadedConfig load_config(const std::string& path);

/// Rejects keys outside the allowed set (schema validation, exit code 2).
void check_keys(const json& obj, const std::vector<std::string>& allowed,
                const std::string& where);

double get_num(const json& obj, const std::string& key);
double get_num_or(const json& obj, const std::string& key, double fallback);
int get_int(const json& obj, const std::string& key);
int get_int_or(const json& obj, const std::string& key, int fallback);
std::uint64_t get_u64_or(const json& obj, const std::string& key, std::uint64_t fallback);
std::string get_str_or(const json& obj, const std::string& key, const std::string& fallback);

/// Mixture from the run-config shape {"terms": [{"p": 3, "a": 2.449...}], ...}.
Mixture mixture_from(const json& obj);

/// Canonical double formatting for CSV artifacts (round-trip exact, stable bytes).
std::string fmt(double v);

struct CsvWriter {
  explicit CsvWriter(const std::string& path, const std::string& header_comment,
                     const std::string& columns);
  ~CsvWriter();
  void row(const std::vector<double>& values);
  void raw(const std::string& line);

 private:
  void* f_ = nullptr;
};

void write_json(const std::string& path, const json& doc);

}  // namespace pspin::cli
