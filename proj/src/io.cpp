#include "pdc/io.hpp"

#include <unistd.h>

#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <sstream>

#include "pdc/errors.hpp"

#ifndef PDCSIM_VERSION
#define PDCSIM_VERSION "unknown"
#endif

namespace pdc {

void CsvTable::add_row(std::vector<double> row) {
  if (row.size() != header.size()) throw DomainError("CSV row width does not match the header");
  rows.push_back(std::move(row));
}

std::string CsvTable::render() const {
  std::string out;
  for (std::size_t k = 0; k < header.size(); ++k) out += (k ? "," : "") + header[k];
  out += '\n';
  char buf[32];
  for (const auto& row : rows) {
    for (std::size_t k = 0; k < row.size(); ++k) {
      std::snprintf(buf, sizeof buf, "%.17g", row[k]);
      if (k) out += ',';
      out += buf;
    }
    out += '\n';
  }
  return out;
}

namespace {
std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> cells;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    const auto b = cell.find_first_not_of(" \t\r"), e = cell.find_last_not_of(" \t\r");
    cells.push_back(b == std::string::npos ? "" : cell.substr(b, e - b + 1));
  }
  return cells;
}

bool parse_number(const std::string& s, double& out) {
  if (s.empty()) return false;
  char* end = nullptr;
  out = std::strtod(s.c_str(), &end);
  return end == s.c_str() + s.size();
}
}  // namespace

CsvTable read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("", "cannot open CSV file '" + path.string() + "'");
  CsvTable t;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto cells = split(line);
    std::vector<double> row(cells.size());
    bool numeric = true;
    for (std::size_t k = 0; k < cells.size(); ++k) numeric = numeric && parse_number(cells[k], row[k]);
    if (!numeric) {
      if (t.header.empty() && t.rows.empty()) {
        t.header = cells;
        continue;
      }
      throw ConfigError("", path.string() + ":" + std::to_string(lineno) + ": non-numeric value");
    }
    if (t.header.empty()) {
      for (std::size_t k = 0; k < row.size(); ++k) t.header.push_back("col" + std::to_string(k));
    }
    if (row.size() != t.header.size()) {
      throw ConfigError("", path.string() + ":" + std::to_string(lineno) + ": expected " +
                                std::to_string(t.header.size()) + " columns");
    }
    t.rows.push_back(std::move(row));
  }
  return t;
}

void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
  namespace fs = std::filesystem;
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write '" + tmp.string() + "'");
    out << content;
    out.flush();
    if (!out) {
      std::error_code ec;
      fs::remove(tmp, ec);
      throw Error("write to '" + tmp.string() + "' failed");
    }
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw Error("cannot move artifact into place at '" + path.string() + "'");
  }
}

std::string version_string() { return PDCSIM_VERSION; }

nlohmann::json make_sidecar(const std::string& command, const nlohmann::json& config, const nlohmann::json& summary) {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char stamp[32];
  std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", &tm);
  nlohmann::json j;
  j["command"] = command;
  j["version"] = version_string();
  j["timestamp"] = stamp;
  j["config"] = config;
  j["summary"] = summary;
  return j;
}

}  // namespace pdc
