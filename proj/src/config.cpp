#include "qndmech/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

namespace qnd {

namespace {

const std::set<std::string> kHardwareKeys = {"preset", "kappa_hz", "gamma_hz", "omega_m_hz",
                                             "tau_us", "n_th",     "eta"};

const std::map<std::string, std::set<std::string>>& schema() {
  static const std::map<std::string, std::set<std::string>> s = {
      {"hardware", kHardwareKeys},
      {"electromechanical", kHardwareKeys},
      {"protocol", {"K1", "K2", "Kf", "squeezing_db", "model", "bath", "bath_variant"}},
      {"simulate", {"n_bins", "tolerance", "max_bins", "rwa"}},
      {"sweep", {"axis"}},
      {"optimize",
       {"g_max", "ladder", "kappa_tau_min", "kappa_tau_max", "squeezing_db_min", "squeezing_db_max",
        "kf_ratio_min", "kf_ratio_max", "seeds", "refinements", "max_iterations"}},
      {"figures",
       {"fig2_db_max", "fig2_points", "fig3_n_th", "fig3_eta", "fig3_db_max", "fig4_g_over_kappa",
        "fig4_squeezing_db", "fig5_kappa_over_omega", "fig5_db_max"}},
  };
  return s;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::optional<double> to_double(const std::string& s) {
  const std::string t = trim(s);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc() || ptr != t.data() + t.size() || t.empty()) return std::nullopt;
  return v;
}

constexpr double kTwoPi = 2.0 * std::numbers::pi;

}  // namespace

ConfigFile ConfigFile::parse(const std::string& text, const std::string& origin) {
  ConfigFile cfg;
  cfg.raw_ = text;
  cfg.origin_ = origin;
  std::istringstream in(text);
  std::string line, section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto cut = line.find_first_of("#;");
    const std::string body = trim(cut == std::string::npos ? line : line.substr(0, cut));
    if (body.empty()) continue;
    const ConfigEntry here{body, lineno};
    if (body.front() == '[') {
      if (body.back() != ']') cfg.fail(here, "malformed section header");
      section = trim(body.substr(1, body.size() - 2));
      if (!schema().count(section)) cfg.fail(here, "unknown section [" + section + "]");
      if (cfg.section_lines_.count(section)) cfg.fail(here, "duplicate section [" + section + "]");
      cfg.section_lines_[section] = lineno;
      cfg.data_[section];
      continue;
    }
    const auto eq = body.find('=');
    if (eq == std::string::npos) cfg.fail(here, "expected key = value");
    if (section.empty()) cfg.fail(here, "key outside of any section");
    const std::string key = trim(body.substr(0, eq));
    const std::string value = trim(body.substr(eq + 1));
    if (!schema().at(section).count(key)) cfg.fail(here, "unknown key '" + key + "' in [" + section + "]");
    auto& slot = cfg.data_[section][key];
    if (!slot.empty() && key != "axis")
      cfg.fail(here, "duplicate key '" + key + "' (first set on line " + std::to_string(slot.front().line) + ")");
    slot.push_back({value, lineno});
  }
  return cfg;
}

ConfigFile ConfigFile::load(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot open config file " + path.string());
  std::ostringstream ss;
  ss << f.rdbuf();
  return parse(ss.str(), path.string());
}

void ConfigFile::fail(const ConfigEntry& at, const std::string& message) const {
  throw ConfigError(origin_ + ":" + std::to_string(at.line) + ": " + message);
}

bool ConfigFile::has_section(const std::string& section) const { return data_.count(section) > 0; }

const ConfigEntry* ConfigFile::find(const std::string& section, const std::string& key) const {
  const auto s = data_.find(section);
  if (s == data_.end()) return nullptr;
  const auto k = s->second.find(key);
  if (k == s->second.end() || k->second.empty()) return nullptr;
  return &k->second.front();
}

std::optional<std::string> ConfigFile::text(const std::string& section, const std::string& key) const {
  if (const auto* e = find(section, key)) return e->value;
  return std::nullopt;
}

std::optional<double> ConfigFile::number(const std::string& section, const std::string& key) const {
  const auto* e = find(section, key);
  if (!e) return std::nullopt;
  const auto v = to_double(e->value);
  if (!v || !std::isfinite(*v)) fail(*e, "'" + key + "' expects a number, got '" + e->value + "'");
  return v;
}

double ConfigFile::number_or(const std::string& section, const std::string& key, double fallback) const {
  return number(section, key).value_or(fallback);
}

bool ConfigFile::flag_or(const std::string& section, const std::string& key, bool fallback) const {
  const auto* e = find(section, key);
  if (!e) return fallback;
  std::string v = e->value;
  std::transform(v.begin(), v.end(), v.begin(), [](unsigned char c) { return std::tolower(c); });
  if (v == "true" || v == "yes" || v == "on" || v == "1") return true;
  if (v == "false" || v == "no" || v == "off" || v == "0") return false;
  fail(*e, "'" + key + "' expects true or false, got '" + e->value + "'");
}

std::optional<std::vector<double>> ConfigFile::list(const std::string& section, const std::string& key) const {
  const auto* e = find(section, key);
  if (!e) return std::nullopt;
  try {
    return parse_number_list(e->value);
  } catch (const std::invalid_argument& err) {
    fail(*e, err.what());
  }
}

std::vector<ConfigEntry> ConfigFile::all(const std::string& section, const std::string& key) const {
  const auto s = data_.find(section);
  if (s == data_.end()) return {};
  const auto k = s->second.find(key);
  return k == s->second.end() ? std::vector<ConfigEntry>{} : k->second;
}

std::vector<double> parse_number_list(const std::string& text) {
  std::vector<double> out;
  if (text.find(':') != std::string::npos) {
    std::vector<std::string> parts;
    std::istringstream in(text);
    for (std::string part; std::getline(in, part, ':');) parts.push_back(part);
    if (parts.size() != 3) throw std::invalid_argument("range must be start:stop:count");
    const auto a = to_double(parts[0]), b = to_double(parts[1]), n = to_double(parts[2]);
    if (!a || !b || !n || *n < 1 || std::floor(*n) != *n)
      throw std::invalid_argument("range must be start:stop:count with integer count");
    const int count = static_cast<int>(*n);
    for (int i = 0; i < count; ++i) out.push_back(count == 1 ? *a : *a + (*b - *a) * i / (count - 1));
    return out;
  }
  std::istringstream in(text);
  for (std::string part; std::getline(in, part, ',');) {
    const auto v = to_double(part);
    if (!v) throw std::invalid_argument("'" + trim(part) + "' is not a number");
    out.push_back(*v);
  }
  if (out.empty()) throw std::invalid_argument("empty number list");
  return out;
}

const std::vector<std::string>& required_hardware_keys() {
  static const std::vector<std::string> keys = {"kappa_hz", "gamma_hz", "omega_m_hz", "tau_us", "n_th",
                                                "eta"};
  return keys;
}

ProtocolParams hardware_from(const ConfigFile& cfg, const std::string& section) {
  ProtocolParams p;
  const auto preset = cfg.text(section, "preset");
  if (preset) {
    if (*preset != "optomechanical")
      cfg.fail(cfg.all(section, "preset").front(), "unknown preset '" + *preset + "'");
    p = optomechanical_preset();
  } else if (section == "hardware") {
    p = optomechanical_preset();
  } else {
    std::vector<std::string> missing;
    for (const auto& k : required_hardware_keys())
      if (!cfg.text(section, k)) missing.push_back(k);
    if (!missing.empty()) {
      std::string msg = "[" + section + "] is missing required keys:";
      for (const auto& k : missing) msg += " " + k;
      throw ConfigError(cfg.origin() + ": " + msg);
    }
  }
  if (const auto v = cfg.number(section, "kappa_hz")) p.kappa = kTwoPi * *v;
  if (const auto v = cfg.number(section, "gamma_hz")) p.gamma = kTwoPi * *v;
  if (const auto v = cfg.number(section, "omega_m_hz")) p.omega_m = kTwoPi * *v;
  if (const auto v = cfg.number(section, "tau_us")) p.tau = *v * 1e-6;
  p.n_th = cfg.number_or(section, "n_th", p.n_th);
  p.eta = cfg.number_or(section, "eta", p.eta);
  try {
    p.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(cfg.origin() + ": [" + section + "] " + e.what());
  }
  return p;
}

ProtocolParams protocol_from(const ConfigFile& cfg) {
  ProtocolParams p = hardware_from(cfg, "hardware");
  p.set_gains(cfg.number_or("protocol", "K1", 1.0), cfg.number_or("protocol", "K2", 1.0));
  p.squeezing = squeezing_from_db(cfg.number_or("protocol", "squeezing_db", 0.0));
  const std::string kf = cfg.text("protocol", "Kf").value_or("auto");
  if (kf == "auto") {
    p.feedforward = p.eta > 0.0 ? p.K1() / std::sqrt(p.eta) : 0.0;
  } else {
    p.feedforward = *cfg.number("protocol", "Kf");
  }
  try {
    p.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(cfg.origin() + ": [protocol] " + e.what());
  }
  return p;
}

ModelKind parse_model_kind(const std::string& name) {
  if (name == "adiabatic") return ModelKind::AdiabaticIdeal;
  if (name == "full") return ModelKind::FullCavity;
  if (name == "nonrwa") return ModelKind::NonRWA;
  throw std::invalid_argument("unknown model '" + name + "' (expected adiabatic, full or nonrwa)");
}

std::string model_tag(ModelKind kind) {
  switch (kind) {
    case ModelKind::AdiabaticIdeal: return "adiabatic";
    case ModelKind::FullCavity: return "full";
    case ModelKind::NonRWA: return "nonrwa";
  }
  return "unknown";
}

ModelOptions model_from(const ConfigFile& cfg) {
  ModelOptions o;
  if (const auto m = cfg.text("protocol", "model")) {
    try {
      o.kind = parse_model_kind(*m);
    } catch (const std::invalid_argument& e) {
      cfg.fail(cfg.all("protocol", "model").front(), e.what());
    }
  } else {
    o.kind = ModelKind::FullCavity;
  }
  o.bath = cfg.flag_or("protocol", "bath", false);
  const std::string variant = cfg.text("protocol", "bath_variant").value_or("exact");
  if (variant == "exact") {
    o.bath_variant = BathVariant::Exact;
  } else if (variant == "linear") {
    o.bath_variant = BathVariant::Linear;
  } else {
    cfg.fail(cfg.all("protocol", "bath_variant").front(), "bath_variant must be exact or linear");
  }
  return o;
}

}  // namespace qnd
