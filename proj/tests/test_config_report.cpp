#include "qndmech/config.hpp"
#include "qndmech/report.hpp"

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace qnd;

namespace {

std::string error_of(const std::string& text) {
  try {
    auto cfg = ConfigFile::parse(text, "t.ini");
    protocol_from(cfg);
    model_from(cfg);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace

TEST_CASE("configuration values") {
  const auto cfg = ConfigFile::parse(
      "# comment\n[hardware]\npreset = optomechanical\neta = 0.81 ; inline\n"
      "[protocol]\nK1 = 2\nK2 = 3\nsqueezing_db = 20\nmodel = nonrwa\nbath = yes\n");
  const auto p = protocol_from(cfg);
  CHECK(p.kappa == doctest::Approx(2.0 * M_PI * 221.5e6));
  CHECK(p.K1() == doctest::Approx(2.0));
  CHECK(p.K2() == doctest::Approx(3.0));
  CHECK(p.squeezing == doctest::Approx(10.0));
  CHECK(p.feedforward == doctest::Approx(2.0 / 0.9));
  const auto m = model_from(cfg);
  CHECK(m.kind == ModelKind::NonRWA);
  CHECK(m.bath);
}

TEST_CASE("configuration errors carry line numbers") {
  CHECK(error_of("[hardware]\npreset = optomechanical\nkapa_hz = 1\n").find("t.ini:3") != std::string::npos);
  CHECK(error_of("[hardware]\n\n[nope]\n").find("t.ini:3: unknown section") != std::string::npos);
  CHECK(error_of("[protocol]\nK1 = 1\nK1 = 2\n").find("t.ini:3: duplicate key") != std::string::npos);
  CHECK(error_of("[hardware]\npreset = optomechanical\neta = 1.5\n").find("eta") != std::string::npos);
  CHECK(error_of("[hardware]\npreset = optomechanical\n[protocol]\nK1 = abc\n").find("t.ini:4") != std::string::npos);
  CHECK(error_of("[hardware]\npreset = optomechanical\n[protocol]\nmodel = fancy\n").find("t.ini:4") != std::string::npos);
  CHECK(error_of("K1 = 1\n").find("t.ini:1") != std::string::npos);
}

TEST_CASE("hardware sections without a preset must be complete") {
  const auto cfg = ConfigFile::parse("[electromechanical]\nkappa_hz = 1e6\ntau_us = 10\n", "e.ini");
  try {
    hardware_from(cfg, "electromechanical");
    FAIL("expected an error");
  } catch (const ConfigError& e) {
    const std::string msg = e.what();
    for (const char* key : {"gamma_hz", "omega_m_hz", "n_th", "eta"}) CHECK(msg.find(key) != std::string::npos);
    CHECK(msg.find("kappa_hz") == std::string::npos);
  }
}

TEST_CASE("number lists") {
  CHECK(parse_number_list("1, 2.5,4") == std::vector<double>{1.0, 2.5, 4.0});
  CHECK(parse_number_list("0:1:5") == std::vector<double>{0.0, 0.25, 0.5, 0.75, 1.0});
  CHECK_THROWS(parse_number_list("0:1"));
  CHECK_THROWS(parse_number_list("a,b"));
  CHECK_THROWS(parse_number_list(""));
}

TEST_CASE("provenance and hashing") {
  CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  const Provenance prov{"fig2", sha256_hex("")};
  CHECK(prov.line().find("command=fig2") != std::string::npos);
  CHECK(prov.line().find(kVersion) != std::string::npos);
}

TEST_CASE("number formatting round-trips") {
  for (double v : {0.1, 1.0 / 3.0, 2.0381e-17, 12345678.9, -0.5})
    CHECK(std::stod(format_number(v)) == v);
  CHECK(format_number(2.0) == "2");
}

TEST_CASE("CSV quoting and byte stability") {
  CHECK(csv_escape("plain") == "plain");
  CHECK(csv_escape("a,b") == "\"a,b\"");
  CHECK(csv_escape("say \"hi\"") == "\"say \"\"hi\"\"\"");
  const auto dir = std::filesystem::temp_directory_path() / "qndmech_test_csv";
  std::filesystem::create_directories(dir);
  const Provenance prov{"sweep", sha256_hex("x")};
  const CsvTable t{{"a", "b"}, {{"1", "x,y"}, {format_number(0.1), "z"}}};
  write_csv(dir / "one.csv", prov, t);
  write_csv(dir / "two.csv", prov, t);
  const std::string one = slurp(dir / "one.csv");
  CHECK(one == slurp(dir / "two.csv"));
  CHECK(one == "# " + prov.line() + "\r\na,b\r\n1,\"x,y\"\r\n0.1,z\r\n");
  std::filesystem::remove_all(dir);
}

TEST_CASE("SVG output") {
  PlotSpec spec{"t", "x", "y", {{"a<b", {0.0, 1.0, 2.0}, {0.0, 1.0, 0.5}}}, 1.5, "mark"};
  const Provenance prov{"fig2", sha256_hex("")};
  const std::string svg = render_svg(spec, prov);
  CHECK(svg.find("<svg") != std::string::npos);
  CHECK(svg.find(prov.line()) != std::string::npos);
  CHECK(svg.find("<polyline") != std::string::npos);
  CHECK(svg.find("a&lt;b") != std::string::npos);
  CHECK(svg == render_svg(spec, prov));
}
