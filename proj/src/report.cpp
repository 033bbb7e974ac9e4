#include "qndmech/report.hpp"

#include <fmt/format.h>
#include <openssl/evp.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

namespace qnd {

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw std::runtime_error("cannot write " + path.string());
  return f;
}

std::string xml_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

// Tick positions at 1, 2 or 5 times a power of ten.
std::vector<double> nice_ticks(double lo, double hi) {
  if (!(hi > lo)) return {lo};
  const double raw = (hi - lo) / 5.0;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  double step = mag;
  for (double m : {1.0, 2.0, 5.0, 10.0})
    if (m * mag >= raw) {
      step = m * mag;
      break;
    }
  std::vector<double> ticks;
  for (double t = std::ceil(lo / step) * step; t <= hi + 1e-9 * step; t += step)
    ticks.push_back(std::abs(t) < 1e-12 * step ? 0.0 : t);
  return ticks;
}

const char* const kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e",
                                "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};

}  // namespace

std::string sha256_hex(const std::string& data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1)
    throw std::runtime_error("SHA-256 failed");
  std::string hex;
  for (unsigned int i = 0; i < len; ++i) hex += fmt::format("{:02x}", digest[i]);
  return hex;
}

std::string Provenance::line() const {
  return fmt::format("qndmech {} command={} config_sha256={}", kVersion, command, config_sha256);
}

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (v == 0.0) return "0";
  return fmt::format("{}", v);
}

std::string csv_escape(const std::string& field) {
  if (field.find_first_of(",\"\r\n") == std::string::npos) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

void write_csv(const std::filesystem::path& path, const Provenance& prov, const CsvTable& table) {
  auto f = open_out(path);
  f << "# " << prov.line() << "\r\n";
  auto emit = [&](const std::vector<std::string>& row) {
    for (std::size_t i = 0; i < row.size(); ++i) f << (i ? "," : "") << csv_escape(row[i]);
    f << "\r\n";
  };
  emit(table.header);
  for (const auto& r : table.rows) emit(r);
}

std::string render_svg(const PlotSpec& spec, const Provenance& prov) {
  const double W = 720, H = 480, L = 70, R = 200, T = 40, B = 60;
  const double pw = W - L - R, ph = H - T - B;
  double xlo = INFINITY, xhi = -INFINITY, ylo = 0.0, yhi = -INFINITY;
  for (const auto& s : spec.series)
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (!std::isfinite(s.y[i])) continue;
      xlo = std::min(xlo, s.x[i]);
      xhi = std::max(xhi, s.x[i]);
      ylo = std::min(ylo, s.y[i]);
      yhi = std::max(yhi, s.y[i]);
    }
  if (!std::isfinite(xlo)) xlo = 0, xhi = 1;
  if (spec.marker_x) xhi = std::max(xhi, *spec.marker_x);
  if (!(yhi > ylo)) yhi = ylo + 1.0;
  if (!(xhi > xlo)) xhi = xlo + 1.0;
  yhi *= 1.05;
  auto sx = [&](double x) { return L + (x - xlo) / (xhi - xlo) * pw; };
  auto sy = [&](double y) { return T + (1.0 - (y - ylo) / (yhi - ylo)) * ph; };

  std::string out;
  out += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  out += "<!-- " + prov.line() + " -->\n";
  out += fmt::format(
      "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"{}\" height=\"{}\" "
      "font-family=\"sans-serif\" font-size=\"12\">\n",
      W, H);
  out += fmt::format("<rect x=\"0\" y=\"0\" width=\"{}\" height=\"{}\" fill=\"white\"/>\n", W, H);
  out += fmt::format("<text x=\"{}\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">{}</text>\n",
                     L + pw / 2, xml_escape(spec.title));
  if (spec.marker_x) {
    const double mx = sx(*spec.marker_x);
    out += fmt::format("<rect x=\"{:.2f}\" y=\"{}\" width=\"{:.2f}\" height=\"{}\" fill=\"#eeeeee\"/>\n",
                       L, T, mx - L, ph);
    out += fmt::format(
        "<line x1=\"{0:.2f}\" y1=\"{1}\" x2=\"{0:.2f}\" y2=\"{2}\" stroke=\"#555\" stroke-dasharray=\"4 3\"/>\n",
        mx, T, T + ph);
    out += fmt::format("<text x=\"{:.2f}\" y=\"{}\" font-size=\"11\">{}</text>\n", mx + 4, T + 14,
                       xml_escape(spec.marker_label));
  }
  out += fmt::format("<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"black\"/>\n",
                     L, T, pw, ph);
  for (double t : nice_ticks(xlo, xhi)) {
    out += fmt::format("<line x1=\"{0:.2f}\" y1=\"{1}\" x2=\"{0:.2f}\" y2=\"{2}\" stroke=\"black\"/>\n", sx(t),
                       T + ph, T + ph + 5);
    out += fmt::format("<text x=\"{:.2f}\" y=\"{}\" text-anchor=\"middle\">{}</text>\n", sx(t), T + ph + 19,
                       format_number(t));
  }
  for (double t : nice_ticks(ylo, yhi)) {
    out += fmt::format("<line x1=\"{}\" y1=\"{:.2f}\" x2=\"{}\" y2=\"{:.2f}\" stroke=\"black\"/>\n", L - 5,
                       sy(t), L, sy(t));
    out += fmt::format("<text x=\"{}\" y=\"{:.2f}\" text-anchor=\"end\">{}</text>\n", L - 8, sy(t) + 4,
                       format_number(t));
  }
  out += fmt::format("<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{}</text>\n", L + pw / 2, H - 15,
                     xml_escape(spec.x_label));
  out += fmt::format("<text x=\"18\" y=\"{0}\" text-anchor=\"middle\" transform=\"rotate(-90 18 {0})\">{1}</text>\n",
                     T + ph / 2, xml_escape(spec.y_label));

  for (std::size_t k = 0; k < spec.series.size(); ++k) {
    const auto& s = spec.series[k];
    const char* color = kPalette[k % std::size(kPalette)];
    std::string pts;
    for (std::size_t i = 0; i < s.x.size(); ++i)
      if (std::isfinite(s.y[i])) pts += fmt::format("{:.2f},{:.2f} ", sx(s.x[i]), sy(s.y[i]));
    if (!pts.empty()) pts.pop_back();
    const char* dash = (k % 2) ? " stroke-dasharray=\"6 3\"" : "";
    out += fmt::format("<polyline fill=\"none\" stroke=\"{}\" stroke-width=\"1.6\"{} points=\"{}\"/>\n", color,
                       dash, pts);
    const double ly = T + 10 + 18.0 * k;
    out += fmt::format("<line x1=\"{}\" y1=\"{:.1f}\" x2=\"{}\" y2=\"{:.1f}\" stroke=\"{}\" stroke-width=\"2\"{}/>\n",
                       L + pw + 12, ly, L + pw + 36, ly, color, dash);
    out += fmt::format("<text x=\"{}\" y=\"{:.1f}\">{}</text>\n", L + pw + 42, ly + 4, xml_escape(s.label));
  }
  out += "</svg>\n";
  return out;
}

void write_svg(const std::filesystem::path& path, const PlotSpec& spec, const Provenance& prov) {
  auto f = open_out(path);
  f << render_svg(spec, prov);
}

void write_text(const std::filesystem::path& path, const Provenance& prov, const std::string& body) {
  auto f = open_out(path);
  f << "# " << prov.line() << "\n" << body;
}

}  // namespace qnd
