#include "cli/config.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "pspin/errors.hpp"

namespace pspin::cli {

namespace {

std::string fnv1a_hex(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  char buf[24];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace

LoadedConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  require(in.good(), errc::invalid_argument, "cannot open config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  const std::string bytes = ss.str();
  LoadedConfig out;
  try {
    out.doc = json::parse(bytes);
  } catch (const std::exception& e) {
    fail(errc::invalid_argument, "config '" + path + "' is not valid JSON: " + e.what());
  }
  require(out.doc.is_object(), errc::invalid_argument, "config root must be a JSON object");
  out.hash_hex = fnv1a_hex(bytes);
  return out;
}

void check_keys(const json& obj, const std::vector<std::string>& allowed,
                const std::string& where) {
  for (const auto& item : obj.items()) {
    bool ok = false;
    for (const auto& k : allowed) ok = ok || item.key() == k;
    require(ok, errc::invalid_argument, "unknown key '" + item.key() + "' in " + where);
  }
}

double get_num(const json& obj, const std::string& key) {
  require(obj.contains(key) && obj[key].is_number(), errc::invalid_argument,
          "config: missing or non-numeric '" + key + "'");
  return obj[key].get<double>();
}

double get_num_or(const json& obj, const std::string& key, double fallback) {
  if (!obj.contains(key)) return fallback;
  require(obj[key].is_number(), errc::invalid_argument, "config: '" + key + "' must be numeric");
  return obj[key].get<double>();
}

int get_int(const json& obj, const std::string& key) {
  require(obj.contains(key) && obj[key].is_number_integer(), errc::invalid_argument,
          "config: missing or non-integer '" + key + "'");
  return obj[key].get<int>();
}

int get_int_or(const json& obj, const std::string& key, int fallback) {
  if (!obj.contains(key)) return fallback;
  require(obj[key].is_number_integer(), errc::invalid_argument,
          "config: '" + key + "' must be an integer");
  return obj[key].get<int>();
}

std::uint64_t get_u64_or(const json& obj, const std::string& key, std::uint64_t fallback) {
  if (!obj.contains(key)) return fallback;
  require(obj[key].is_number_unsigned() || obj[key].is_number_integer(), errc::invalid_argument,
          "config: '" + key + "' must be an unsigned integer");
  return obj[key].get<std::uint64_t>();
}

std::string get_str_or(const json& obj, const std::string& key, const std::string& fallback) {
  if (!obj.contains(key)) return fallback;
  require(obj[key].is_string(), errc::invalid_argument, "config: '" + key + "' must be a string");
  return obj[key].get<std::string>();
}

Mixture mixture_from(const json& obj) {
  require(obj.contains("terms") && obj["terms"].is_array() && !obj["terms"].empty(),
          errc::invalid_argument, "config: 'terms' must be a non-empty array");
  std::vector<MixtureTerm> terms;
  for (const auto& t : obj["terms"]) {
    require(t.is_object(), errc::invalid_argument, "config: each term must be an object");
    check_keys(t, {"p", "a"}, "mixture term");
    terms.push_back({get_int(t, "p"), get_num(t, "a")});
  }
  return Mixture(terms);
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

CsvWriter::CsvWriter(const std::string& path, const std::string& header_comment,
                     const std::string& columns) {
  std::FILE* f = std::fopen(path.c_str(), "wb");
  require(f != nullptr, errc::io_error, "cannot open '" + path + "' for writing");
  f_ = f;
  std::fputs(header_comment.c_str(), f);
  std::fputs(columns.c_str(), f);
  std::fputc('\n', f);
}

CsvWriter::~CsvWriter() {
  if (f_) std::fclose(static_cast<std::FILE*>(f_));
}

void CsvWriter::row(const std::vector<double>& values) {
  auto* f = static_cast<std::FILE*>(f_);
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) std::fputc(',', f);
    std::fputs(fmt(values[i]).c_str(), f);
  }
  std::fputc('\n', f);
}

void CsvWriter::raw(const std::string& line) {
  auto* f = static_cast<std::FILE*>(f_);
  std::fputs(line.c_str(), f);
  std::fputc('\n', f);
}

void write_json(const std::string& path, const json& doc) {
  std::ofstream out(path, std::ios::binary);
  require(out.good(), errc::io_error, "cannot open '" + path + "' for writing");
  out << doc.dump(2) << "\n";
}

}  // namespace pspin::cli
