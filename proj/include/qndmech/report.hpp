#pragma once

// Output files. Every file starts with one provenance line naming the tool
// version, the command and the SHA-256 of the configuration text, so that
// identical runs produce identical bytes.

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace qnd {

inline constexpr const char* kVersion = "0.1.0";

std::string sha256_hex(const std::string& data);

struct Provenance {
  std::string command;
  std::string config_sha256;

  std::string line() const;  // without trailing newline, no comment marker
};

/// Shortest round-trip formatting, stable across runs.
std::string format_number(double v);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

std::string csv_escape(const std::string& field);
void write_csv(const std::filesystem::path& path, const Provenance& prov, const CsvTable& table);

struct PlotSeries {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};

struct PlotSpec {
  std::string title;
  std::string x_label;
  std::string y_label;
  std::vector<PlotSeries> series;
  std::optional<double> marker_x;
  std::string marker_label;
};

std::string render_svg(const PlotSpec& spec, const Provenance& prov);
void write_svg(const std::filesystem::path& path, const PlotSpec& spec, const Provenance& prov);

void write_text(const std::filesystem::path& path, const Provenance& prov, const std::string& body);

}  // namespace qnd
