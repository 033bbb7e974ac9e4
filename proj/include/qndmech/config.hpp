#pragma once

// Sectioned key = value parameter files.
//
//   # comment            ; comment
//   [hardware]
//   kappa_hz = 221.5e6
//
// Every key is checked against a fixed schema; unknown sections and keys are
// rejected with their line number. Only `axis` may repeat.

#include "qndmech/params.hpp"
#include "qndmech/transfer.hpp"

#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace qnd {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ConfigEntry {
  std::string value;
  int line = 0;
};

class ConfigFile {
 public:
  static ConfigFile parse(const std::string& text, const std::string& origin = "<config>");
  static ConfigFile load(const std::filesystem::path& path);

  const std::string& raw() const { return raw_; }
  const std::string& origin() const { return origin_; }
  bool has_section(const std::string& section) const;

  std::optional<std::string> text(const std::string& section, const std::string& key) const;
  std::optional<double> number(const std::string& section, const std::string& key) const;
  double number_or(const std::string& section, const std::string& key, double fallback) const;
  bool flag_or(const std::string& section, const std::string& key, bool fallback) const;
  /// Comma-separated numbers or a range "start:stop:count".
  std::optional<std::vector<double>> list(const std::string& section, const std::string& key) const;
  std::vector<ConfigEntry> all(const std::string& section, const std::string& key) const;

  [[noreturn]] void fail(const ConfigEntry& at, const std::string& message) const;

 private:
  const ConfigEntry* find(const std::string& section, const std::string& key) const;

  std::string raw_;
  std::string origin_;
  std::map<std::string, std::map<std::string, std::vector<ConfigEntry>>> data_;
  std::map<std::string, int> section_lines_;
};

/// "a,b,c" or "start:stop:count" (inclusive, linear).
std::vector<double> parse_number_list(const std::string& text);

/// Hardware parameters from a section with kappa_hz, gamma_hz, omega_m_hz,
/// tau_us, n_th, eta. In [hardware], `preset = optomechanical` fills the
/// defaults; other sections must list every required key.
ProtocolParams hardware_from(const ConfigFile& cfg, const std::string& section);

/// Hardware plus the [protocol] section (K1, K2, Kf or "auto", squeezing_db).
ProtocolParams protocol_from(const ConfigFile& cfg);

ModelOptions model_from(const ConfigFile& cfg);

ModelKind parse_model_kind(const std::string& name);
std::string model_tag(ModelKind kind);

/// Keys a hardware section outside [hardware] must provide.
const std::vector<std::string>& required_hardware_keys();

}  // namespace qnd
