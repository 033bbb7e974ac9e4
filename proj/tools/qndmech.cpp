// qndmech: figure data, single-point reports, sweeps and optimisation runs.

#include "qndmech/config.hpp"
#include "qndmech/optimizer.hpp"
#include "qndmech/report.hpp"
#include "qndmech/timebin.hpp"
#include "qndmech/transfer.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>

#include <filesystem>
#include <iostream>
#include <sstream>

namespace fs = std::filesystem;
using namespace qnd;

namespace {

struct RunConfig {
  ConfigFile file;
  std::string command;
  fs::path out;
  bool oracle = false;
  std::uint64_t seed = 1;

  Provenance provenance() const { return {command, sha256_hex(file.raw())}; }
};

std::vector<double> db_axis(double max_db, int points) {
  if (points < 2) throw std::invalid_argument("a squeezing axis needs at least 2 points");
  std::vector<double> v(points);
  for (int i = 0; i < points; ++i) v[i] = max_db * i / (points - 1);
  return v;
}

std::string tag(double v) {
  std::string s = format_number(v);
  for (char& c : s)
    if (c == '.') c = 'p';
  return s;
}

// One CSV per curve plus a combined SVG.
void emit_curves(const RunConfig& rc, const std::string& stem, PlotSpec plot,
                 const std::vector<std::pair<std::string, std::string>>& files_and_models,
                 const std::string& x_name) {
  const Provenance prov = rc.provenance();
  for (std::size_t k = 0; k < plot.series.size(); ++k) {
    const auto& s = plot.series[k];
    CsvTable t{{x_name, "E", "model"}, {}};
    for (std::size_t i = 0; i < s.x.size(); ++i)
      t.rows.push_back({format_number(s.x[i]), format_number(s.y[i]), files_and_models[k].second});
    write_csv(rc.out / files_and_models[k].first, prov, t);
    std::cout << "wrote " << (rc.out / files_and_models[k].first).string() << "\n";
  }
  write_svg(rc.out / (stem + ".svg"), plot, prov);
  std::cout << "wrote " << (rc.out / (stem + ".svg")).string() << "\n";
}

void fig2(const RunConfig& rc) {
  const ConfigFile& c = rc.file;
  ProtocolParams base = hardware_from(c, "hardware");
  const auto dbs = db_axis(c.number_or("figures", "fig2_db_max", 20.0),
                           static_cast<int>(c.number_or("figures", "fig2_points", 201)));
  PlotSpec plot{"Entanglement vs presqueezing", "squeezing [dB]", "log-negativity E", {}, 12.7, "12.7 dB"};
  std::vector<std::pair<std::string, std::string>> files;
  for (auto [K1, K2] : {std::pair{1.0, 1.0}, {1.0, 8.0}, {8.0, 1.0}})
    for (ModelKind kind : {ModelKind::AdiabaticIdeal, ModelKind::FullCavity}) {
      ProtocolParams p = base;
      p.set_gains(K1, K2);
      p.feedforward = K1 / std::sqrt(p.eta);
      PlotSeries s{fmt::format("K1={} K2={} {}", K1, K2, model_tag(kind)), dbs, {}};
      for (double db : dbs) {
        p.squeezing = squeezing_from_db(db);
        s.y.push_back(model_ln(p, {kind, false, BathVariant::Exact}));
      }
      plot.series.push_back(std::move(s));
      files.emplace_back(fmt::format("fig2_K1-{}_K2-{}_{}.csv", tag(K1), tag(K2), model_tag(kind)),
                         model_tag(kind));
    }
  emit_curves(rc, "fig2", std::move(plot), files, "squeezing_db");
}

void fig3(const RunConfig& rc) {
  const ConfigFile& c = rc.file;
  ProtocolParams base = hardware_from(c, "hardware");
  const auto n_th = c.list("figures", "fig3_n_th").value_or(std::vector<double>{0.0, 5.0, 20.0});
  const auto etas = c.list("figures", "fig3_eta").value_or(std::vector<double>{1.0, 0.9, 0.7});
  const auto dbs = db_axis(c.number_or("figures", "fig3_db_max", 20.0), 101);
  PlotSpec plot{"Bath and loss, K1=1 K2=8", "squeezing [dB]", "log-negativity E", {}, 12.7, "12.7 dB"};
  std::vector<std::pair<std::string, std::string>> files;
  for (double n : n_th)
    for (double eta : etas) {
      ProtocolParams p = base;
      p.n_th = n;
      p.eta = eta;
      p.set_gains(1.0, 8.0);
      p.feedforward = eta > 0.0 ? 1.0 / std::sqrt(eta) : 0.0;
      PlotSeries s{fmt::format("n_th={} eta={}", n, eta), dbs, {}};
      for (double db : dbs) {
        p.squeezing = squeezing_from_db(db);
        s.y.push_back(model_ln(p, {ModelKind::FullCavity, true, BathVariant::Exact}));
      }
      plot.series.push_back(std::move(s));
      files.emplace_back(fmt::format("fig3_nth-{}_eta-{}.csv", tag(n), tag(eta)), "full+bath");
    }
  emit_curves(rc, "fig3", std::move(plot), files, "squeezing_db");
}

SearchSpace space_from(const ConfigFile& c, const ProtocolParams& hw, std::uint64_t seed) {
  SearchSpace s;
  s.hardware = hw;
  s.model = model_from(c);
  s.g_max = c.number_or("optimize", "g_max", 0.01);
  s.kappa_tau_min = c.number_or("optimize", "kappa_tau_min", s.kappa_tau_min);
  s.kappa_tau_max = c.number_or("optimize", "kappa_tau_max", s.kappa_tau_max);
  s.squeezing_db_min = c.number_or("optimize", "squeezing_db_min", s.squeezing_db_min);
  s.squeezing_db_max = c.number_or("optimize", "squeezing_db_max", s.squeezing_db_max);
  s.kf_ratio_min = c.number_or("optimize", "kf_ratio_min", s.kf_ratio_min);
  s.kf_ratio_max = c.number_or("optimize", "kf_ratio_max", s.kf_ratio_max);
  s.seeds = static_cast<int>(c.number_or("optimize", "seeds", s.seeds));
  s.refinements = static_cast<int>(c.number_or("optimize", "refinements", s.refinements));
  s.max_iterations = static_cast<int>(c.number_or("optimize", "max_iterations", s.max_iterations));
  s.seed = seed;
  return s;
}

std::vector<std::string> optimum_row(double g, const OptimizationResult& r, const std::string& model) {
  const ProtocolParams& b = r.best;
  return {format_number(g),           format_number(r.best_ln), model,
          format_number(b.kappa_tau()), format_number(b.K1()),  format_number(b.K2()),
          format_number(b.feedforward), format_number(squeezing_to_db(b.squeezing))};
}

const std::vector<std::string> kOptimumHeader = {"g_over_kappa", "E",  "model", "kappa_tau",
                                                 "K1",           "K2", "Kf",    "squeezing_db"};

void fig4(const RunConfig& rc) {
  const ConfigFile& c = rc.file;
  if (!c.has_section("electromechanical")) {
    std::string keys;
    for (const auto& k : required_hardware_keys()) keys += " " + k;
    throw ConfigError(c.origin() +
                      ": fig4 needs an [electromechanical] section with the keys:" + keys +
                      " (see configs/electromechanical.template.ini)");
  }
  const std::vector<std::pair<std::string, ProtocolParams>> platforms = {
      {"optomechanical", hardware_from(c, "hardware")},
      {"electromechanical", hardware_from(c, "electromechanical")}};
  const auto ladder =
      c.list("figures", "fig4_g_over_kappa")
          .value_or(std::vector<double>{0.002, 0.004, 0.006, 0.008, 0.01, 0.015, 0.02, 0.03, 0.04, 0.05});
  const double sq_db = c.number_or("figures", "fig4_squeezing_db", 12.7);

  PlotSpec plot{"Optimised entanglement vs coupling ceiling", "g_max / kappa", "max log-negativity E", {}, {}, ""};
  const Provenance prov = rc.provenance();
  for (const auto& [name, hw] : platforms)
    for (double cap : {0.0, sq_db}) {
      SearchSpace s = space_from(c, hw, rc.seed);
      s.model = {ModelKind::FullCavity, true, BathVariant::Exact};
      s.squeezing_db_min = 0.0;
      s.squeezing_db_max = cap;
      const auto results = optimize_ladder(s, ladder);
      const std::string label = cap > 0.0 ? fmt::format("{} S<={}dB", name, cap) : name + " no squeezing";
      PlotSeries series{label, ladder, {}};
      CsvTable t{kOptimumHeader, {}};
      for (std::size_t i = 0; i < ladder.size(); ++i) {
        series.y.push_back(results[i].best_ln);
        t.rows.push_back(optimum_row(ladder[i], results[i], "full+bath"));
      }
      const fs::path file = rc.out / fmt::format("fig4_{}_sq-{}dB.csv", name, tag(cap));
      write_csv(file, prov, t);
      std::cout << "wrote " << file.string() << "\n";
      plot.series.push_back(std::move(series));
    }
  write_svg(rc.out / "fig4.svg", plot, prov);
  std::cout << "wrote " << (rc.out / "fig4.svg").string() << "\n";
}

void fig5(const RunConfig& rc) {
  const ConfigFile& c = rc.file;
  ProtocolParams p = hardware_from(c, "hardware");
  const double ratio = c.number_or("figures", "fig5_kappa_over_omega", 0.04);
  if (!(ratio > 0.0)) throw ConfigError(c.origin() + ": fig5_kappa_over_omega must be positive");
  p.omega_m = p.kappa / ratio;
  p.set_gains(1.0, 8.0);
  p.feedforward = 1.0 / std::sqrt(p.eta);
  const auto dbs = db_axis(c.number_or("figures", "fig5_db_max", 20.0), 101);
  PlotSpec plot{fmt::format("RWA vs full solution, kappa/omega_m = {}", ratio), "squeezing [dB]",
                "log-negativity E", {}, 12.7, "12.7 dB"};
  std::vector<std::pair<std::string, std::string>> files;
  for (ModelKind kind : {ModelKind::FullCavity, ModelKind::NonRWA}) {
    PlotSeries s{kind == ModelKind::FullCavity ? "RWA" : "beyond RWA", dbs, {}};
    for (double db : dbs) {
      p.squeezing = squeezing_from_db(db);
      s.y.push_back(model_ln(p, {kind, false, BathVariant::Exact}));
    }
    plot.series.push_back(std::move(s));
    files.emplace_back(fmt::format("fig5_{}.csv", kind == ModelKind::FullCavity ? "rwa" : "nonrwa"),
                       model_tag(kind));
  }
  emit_curves(rc, "fig5", std::move(plot), files, "squeezing_db");
}

std::string matrix_text(const Mat4& m) {
  std::string s;
  for (int r = 0; r < 4; ++r) {
    for (int k = 0; k < 4; ++k) s += fmt::format("{:>14.6g}", m(r, k));
    s += "\n";
  }
  return s;
}

void simulate_cmd(const RunConfig& rc) {
  const ConfigFile& c = rc.file;
  const ProtocolParams p = protocol_from(c);
  const ModelOptions opts = model_from(c);
  std::ostringstream out;
  out << fmt::format("K1 = {:.6g}  K2 = {:.6g}  Kf = {:.6g}  S = {:.4g} dB  kappa*tau = {:.6g}  eta = {:.4g}  n_th = {:.4g}\n",
                     p.K1(), p.K2(), p.feedforward, squeezing_to_db(p.squeezing), p.kappa_tau(), p.eta, p.n_th);

  const TransferModel model = build_transfer(p, opts);
  const SimResult res = ln_from_transfer(model, make_vacuum(2));
  out << "\nselected model: " << model_tag(opts.kind) << (opts.bath ? " with bath" : "") << "\n";
  out << "coefficients (source -> target):\n";
  for (const auto& e : model.coefficients)
    out << fmt::format("  {:<16} {:<3} {:>14.6g}\n", e.source, e.target, e.coefficient);
  out << "covariance (q1 p1 q2 p2):\n" << matrix_text(res.mech_cov);
  if (!res.physicality.pass)
    out << fmt::format("NON-PHYSICAL output, eigenvalue {:.3g}\n", res.physicality.min_eigenvalue);

  out << "\nlog-negativity per model:\n";
  for (ModelKind kind : {ModelKind::AdiabaticIdeal, ModelKind::FullCavity, ModelKind::NonRWA}) {
    if (kind == ModelKind::NonRWA && !(p.omega_m > 0.0)) {
      out << "  nonrwa     skipped (omega_m_hz not set)\n";
      continue;
    }
    out << fmt::format("  {:<10} {:.8f}\n", model_tag(kind), model_ln(p, {kind, opts.bath, opts.bath_variant}));
  }
  out << fmt::format("  {:<10} {:.8f}  (lossless, no bath)\n", "estimate", std::max(0.0, approx_ln(p)));
  if (opts.bath && std::abs(p.K1() - p.K2()) <= 1e-12 * std::max(1.0, p.K1()))
    out << fmt::format("  {:<10} {:.8f}\n", "bath est.", std::max(0.0, adiabatic_bath_ln(p)));

  if (rc.oracle) {
    SimConfig sc;
    sc.params = p;
    sc.bath = opts.bath;
    sc.rwa = c.flag_or("simulate", "rwa", opts.kind != ModelKind::NonRWA);
    sc.n_bins = static_cast<int>(c.number_or("simulate", "n_bins", 1024));
    const double tol = c.number_or("simulate", "tolerance", 1e-3);
    const SimResult tb =
        simulate_converged(sc, tol, static_cast<int>(c.number_or("simulate", "max_bins", 1 << 20)));
    out << fmt::format("\ntime-bin oracle ({}): E = {:.8f}  N = {}  |E(N)-E(N/2)| = {:.3g}{}\n",
                       sc.rwa ? "RWA" : "no RWA", tb.ln, tb.n_bins, tb.convergence_estimate,
                       tb.convergence_estimate > tol ? "  NOT CONVERGED" : "");
    out << fmt::format("gap to selected model: {:.3g}\n", tb.ln - res.ln);
  }
  std::cout << out.str();
  write_text(rc.out / "simulate_summary.txt", rc.provenance(), out.str());
  CsvTable t{{"source", "target", "coefficient"}, {}};
  for (const auto& e : model.coefficients) t.rows.push_back({e.source, e.target, format_number(e.coefficient)});
  write_csv(rc.out / "simulate_coefficients.csv", rc.provenance(), t);
}

void optimize_cmd(const RunConfig& rc) {
  const ConfigFile& c = rc.file;
  const ProtocolParams hw = hardware_from(c, "hardware");
  const SearchSpace space = space_from(c, hw, rc.seed);
  const std::vector<double> ladder = c.list("optimize", "ladder").value_or(std::vector<double>{space.g_max});
  const auto results = optimize_ladder(space, ladder);
  const std::string model = model_tag(space.model.kind) + (space.model.bath ? "+bath" : "");
  const Provenance prov = rc.provenance();

  CsvTable best{kOptimumHeader, {}};
  CsvTable trace{{"g_over_kappa", "log10_kappa_tau", "u1", "u2", "kf_ratio", "squeezing_db", "value", "feasible"}, {}};
  std::ostringstream summary;
  for (std::size_t i = 0; i < ladder.size(); ++i) {
    const auto& r = results[i];
    best.rows.push_back(optimum_row(ladder[i], r, model));
    for (const auto& e : r.trace) {
      std::vector<std::string> row = {format_number(ladder[i])};
      for (double x : e.x) row.push_back(format_number(x));
      row.push_back(format_number(e.value));
      row.push_back(e.feasible ? "1" : "0");
      trace.rows.push_back(std::move(row));
    }
    const ProtocolParams& b = r.best;
    summary << fmt::format(
        "g_max/kappa = {:.6g}: E* = {:.8f}  kappa*tau = {:.6g}  K1 = {:.6g}  K2 = {:.6g}  Kf = {:.6g}  "
        "Kf*sqrt(eta)/K1 = {:.6f}  S = {:.4g} dB  evaluations = {}\n",
        ladder[i], r.best_ln, b.kappa_tau(), b.K1(), b.K2(), b.feedforward,
        b.K1() > 0.0 ? b.feedforward * std::sqrt(b.eta) / b.K1() : 0.0, squeezing_to_db(b.squeezing),
        r.evaluations);
    if (rc.oracle) {
      SimConfig sc;
      sc.params = b;
      sc.bath = space.model.bath;
      sc.rwa = space.model.kind != ModelKind::NonRWA;
      sc.n_bins = static_cast<int>(c.number_or("simulate", "n_bins", 1024));
      const double tol = c.number_or("simulate", "tolerance", 1e-3);
      const SimResult tb = simulate_converged(sc, tol, static_cast<int>(c.number_or("simulate", "max_bins", 1 << 20)));
      summary << fmt::format("  time-bin oracle: E = {:.8f}  gap = {:.3g}  N = {}  estimate = {:.3g}\n", tb.ln,
                             tb.ln - r.best_ln, tb.n_bins, tb.convergence_estimate);
    }
  }
  write_csv(rc.out / "optimize_result.csv", prov, best);
  write_csv(rc.out / "optimize_trace.csv", prov, trace);
  write_text(rc.out / "optimize_summary.txt", prov, summary.str());
  std::cout << summary.str();
}

void sweep_cmd(const RunConfig& rc) {
  const ConfigFile& c = rc.file;
  const ProtocolParams base = protocol_from(c);
  const ModelOptions opts = model_from(c);
  std::vector<GridAxis> axes;
  for (const auto& e : c.all("sweep", "axis")) {
    std::istringstream in(e.value);
    GridAxis a;
    std::string values;
    in >> a.name >> values;
    if (a.name.empty() || values.empty()) c.fail(e, "axis expects '<name> <values>'");
    try {
      a.values = parse_number_list(values);
      ProtocolParams probe = base;
      set_sweep_parameter(probe, a.name, a.values.front());
    } catch (const std::invalid_argument& err) {
      c.fail(e, err.what());
    }
    axes.push_back(std::move(a));
  }
  if (axes.empty()) throw ConfigError(c.origin() + ": [sweep] needs at least one axis");
  const auto rows = sweep(base, opts, axes);
  const std::string model = model_tag(opts.kind) + (opts.bath ? "+bath" : "");
  CsvTable t;
  for (const auto& a : axes) t.header.push_back(a.name);
  t.header.insert(t.header.end(), {"E", "model"});
  for (const auto& r : rows) {
    std::vector<std::string> row;
    for (double v : r.coords) row.push_back(format_number(v));
    row.push_back(format_number(r.ln));
    row.push_back(model);
    t.rows.push_back(std::move(row));
  }
  write_csv(rc.out / "sweep.csv", rc.provenance(), t);
  std::cout << "wrote " << (rc.out / "sweep.csv").string() << " (" << rows.size() << " points)\n";
  if (axes.size() == 1) {
    PlotSpec plot{"Sweep", axes[0].name, "log-negativity E", {{model, axes[0].values, {}}}, {}, ""};
    for (const auto& r : rows) plot.series[0].y.push_back(r.ln);
    write_svg(rc.out / "sweep.svg", plot, rc.provenance());
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Pulsed QND entanglement of two mechanical oscillators"};
  app.require_subcommand(1);
  std::string config_path, out_dir = ".", which;
  bool oracle = false;
  std::uint64_t seed = 1;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "parameter file")->check(CLI::ExistingFile);
    sub->add_option("--out", out_dir, "output directory");
    sub->add_flag("--oracle", oracle, "cross-check with the time-bin simulator");
    sub->add_option("--seed", seed, "random seed");
  };
  auto* figure = app.add_subcommand("figure", "reproduce a figure data set");
  figure->add_option("which", which, "fig2, fig3, fig4 or fig5")
      ->required()
      ->check(CLI::IsMember({"fig2", "fig3", "fig4", "fig5"}));
  add_common(figure);
  auto* simulate = app.add_subcommand("simulate", "single-point report");
  add_common(simulate);
  auto* optimize = app.add_subcommand("optimize", "maximise entanglement under a coupling ceiling");
  add_common(optimize);
  auto* sweep = app.add_subcommand("sweep", "dense grid evaluation");
  add_common(sweep);
  CLI11_PARSE(app, argc, argv);

  try {
    RunConfig rc{config_path.empty() ? ConfigFile::parse("", "<defaults>") : ConfigFile::load(config_path),
                 "", out_dir, oracle, seed};
    fs::create_directories(rc.out);
    if (figure->parsed()) {
      rc.command = which;
      if (which == "fig2") fig2(rc);
      if (which == "fig3") fig3(rc);
      if (which == "fig4") fig4(rc);
      if (which == "fig5") fig5(rc);
    } else if (simulate->parsed()) {
      rc.command = "simulate";
      simulate_cmd(rc);
    } else if (optimize->parsed()) {
      rc.command = "optimize";
      optimize_cmd(rc);
    } else if (sweep->parsed()) {
      rc.command = "sweep";
      sweep_cmd(rc);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
