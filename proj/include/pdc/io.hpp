#ifndef PDC_IO_HPP
#define PDC_IO_HPP

#include <filesystem>
#include <json.hpp>
#include <string>
#include <vector>

namespace pdc {

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;

  void add_row(std::vector<double> row);
  std::string render() const;  // round-trip precision, '\n' line ends
};

// Reads a numeric CSV; a first line that does not parse as numbers is taken as the header.
CsvTable read_csv(const std::filesystem::path& path);

// Writes through a temporary file in the same directory and renames it into
// place, so readers never see a half-written file.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

// Version string of the build (git describe when available).
std::string version_string();

// Sidecar metadata for an artifact. The timestamp only lives here, so CSVs
// of identical runs are byte-identical.
nlohmann::json make_sidecar(const std::string& command, const nlohmann::json& config, const nlohmann::json& summary);

}  // namespace pdc

#endif  // PDC_IO_HPP
