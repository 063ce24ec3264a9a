#pragma once

// Experiment driver: dispatches a parsed configuration, writes one or more
// CSV tables plus manifest.json into the output directory, and maps failures
// to exit codes
//   0 ok, 1 configuration error, 2 numerical failure, 3 invariant failure.
//
// The manifest needs nlohmann/json; link the qdi_vendor target.

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <deque>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "qdi/asymptotics.hpp"
#include "qdi/config.hpp"
#include "qdi/diagnostics.hpp"
#include "qdi/gaussian_exact.hpp"
#include "qdi/mcmc.hpp"

#ifndef QDI_VERSION
#define QDI_VERSION "0.0.0"
#endif

namespace qdi {

enum ExitCode : int { exit_ok = 0, exit_config = 1, exit_numerical = 2, exit_invariant = 3 };

class InvariantError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Floats with 17 significant digits; integers and strings verbatim.
inline std::string csv_cell(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}
inline std::string csv_cell(long long v) { return std::to_string(v); }
inline std::string csv_cell(unsigned long long v) { return std::to_string(v); }
inline std::string csv_cell(int v) { return std::to_string(v); }
inline std::string csv_cell(std::size_t v) { return std::to_string(v); }
inline std::string csv_cell(const std::string& v) { return v; }
inline std::string csv_cell(const char* v) { return v; }
inline std::string csv_cell(bool v) { return v ? "1" : "0"; }

class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

  template <typename... Cells>
  void add(const Cells&... cells) {
    static_assert(sizeof...(Cells) > 0);
    std::vector<std::string> row{csv_cell(cells)...};
    if (row.size() != header_.size()) throw std::logic_error("csv row width does not match header");
    rows_.push_back(std::move(row));
  }

  std::size_t size() const { return rows_.size(); }
  const std::vector<std::string>& header() const { return header_; }
  const std::vector<std::vector<std::string>>& rows() const { return rows_; }

  void write(const std::filesystem::path& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
    auto line = [&](const std::vector<std::string>& cells) {
      for (std::size_t k = 0; k < cells.size(); ++k) out << (k ? "," : "") << cells[k];
      out << '\n';
    };
    line(header_);
    for (const auto& r : rows_) line(r);
  }

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

inline std::string coord_label(const Lattice& lat, SiteId id) {
  const Coord c = lat.geometry().coord(id);
  std::string s;
  for (int a = 0; a < lat.dim(); ++a) s += (a ? ":" : "") + std::to_string(c[a]);
  return s;
}

/// Stream labels for derive_seed; fixed so manifests stay meaningful across
/// versions.
enum SeedStream : std::uint64_t { stream_gradient_chain = 1, stream_divergence_chain = 2 };

struct RunOutcome {
  int exit_code = exit_ok;
  std::string message;
  std::vector<std::filesystem::path> files;
  nlohmann::ordered_json manifest;
};

namespace runner_detail {

struct Context {
  const ExperimentConfig& cfg;
  std::deque<std::pair<std::string, CsvTable>> tables;  // stable references
  nlohmann::ordered_json summary = nlohmann::ordered_json::object();
  nlohmann::ordered_json seeds = nlohmann::ordered_json::object();
  std::vector<std::string> violations;

  CsvTable& table(const std::string& name, std::vector<std::string> header) {
    tables.emplace_back(name, CsvTable(std::move(header)));
    return tables.back().second;
  }
  void check(bool ok, const std::string& what) {
    if (!ok) violations.push_back(what);
  }
  Lattice lattice() const { return Lattice::with_kernel(cfg.d, cfg.L, cfg.kernel.build(cfg.d)); }
  DisorderSpec disorder(std::size_t realization) const {
    DisorderSpec s = cfg.disorder;
    s.realization = realization;
    return s;
  }
  void maybe_corrupt(VectorField& X) const {
    if (cfg.inject_fault == FaultInjection::corrupt_x && X.size() > 0) X[X.size() / 2] += 1.0;
  }
};

inline void run_gaussian_exact(Context& ctx) {
  const auto& cfg = ctx.cfg;
  const auto lat = ctx.lattice();
  const DirichletLaplacian A(lat);
  auto& edges = ctx.table("gaussian_exact.csv", {"realization", "edge", "from", "to", "weight", "X"});
  auto& checks = ctx.table("gaussian_exact_checks.csv", {"realization", "max_divergence_residual", "volume_sum",
                                                         "surface_sum", "integral_difference"});
  double worst = 0.0;
  for (std::size_t r = 0; r < cfg.n_realizations; ++r) {
    const auto eta = sample_disorder(ctx.disorder(r), lat.geometry());
    auto X = mean_gradient(A, eta, cfg.solver);
    ctx.maybe_corrupt(X);
    for (std::size_t e = 0; e < lat.edge_count(); ++e) {
      const auto& ed = lat.edge(e);
      edges.add(r, e, coord_label(lat, ed.lo), coord_label(lat, ed.hi), ed.weight, X[e]);
    }
    const auto res = divergence_residual(lat, X, eta);
    const auto form = integral_form_check(lat, X, eta);
    checks.add(r, res.max_abs, form.volume_sum, form.surface_sum, form.difference);
    worst = std::max(worst, res.max_abs);
    ctx.check(res.max_abs <= cfg.invariant_tolerance,
              "divergence residual " + csv_cell(res.max_abs) + " in realization " + std::to_string(r));
  }
  ctx.summary["max_divergence_residual"] = worst;
}

inline void run_mcmc(Context& ctx) {
  const auto& cfg = ctx.cfg;
  const auto lat = ctx.lattice();
  const DirichletLaplacian A(lat);
  const bool gaussian = cfg.potential.family() == Potential::Family::quadratic;
  auto& edges = ctx.table("mcmc_edges.csv", {"realization", "edge", "from", "to", "mean", "std_error", "exact", "z"});
  auto& sites = ctx.table("mcmc_sites.csv", {"realization", "site", "eta", "divergence", "std_error", "residual", "z"});
  auto chains = nlohmann::ordered_json::array();
  std::size_t within3 = 0, within4 = 0;
  for (std::size_t r = 0; r < cfg.n_realizations; ++r) {
    const auto eta = sample_disorder(ctx.disorder(r), lat.geometry());
    const auto s1 = derive_seed(cfg.disorder.seed, {stream_gradient_chain, r});
    const auto s2 = derive_seed(cfg.disorder.seed, {stream_divergence_chain, r});
    const auto grad = estimate_gradient_mean(lat, cfg.potential, eta, all_edges(lat), cfg.sampler, s1);
    VectorField exact(lat.edge_count(), std::numeric_limits<double>::quiet_NaN());
    if (gaussian) {
      // V = c t^2 / 2 has mean gradient independent of c.
      exact = mean_gradient(A, eta, cfg.solver);
      ctx.maybe_corrupt(exact);
      const auto res = divergence_residual(lat, exact, eta);
      ctx.check(res.max_abs <= cfg.invariant_tolerance,
                "exact divergence residual " + csv_cell(res.max_abs) + " in realization " + std::to_string(r));
    }
    for (const auto& [e, x] : grad.edges) {
      const double z = (x.mean - exact[e]) / x.std_error;
      if (std::abs(z) <= 3.0) ++within3;
      const auto& ed = lat.edge(e);
      edges.add(r, e, coord_label(lat, ed.lo), coord_label(lat, ed.hi), x.mean, x.std_error, exact[e], z);
    }
    const auto div = estimate_divergence(lat, cfg.potential, eta, cfg.sampler, s2);
    for (std::size_t i = 0; i < lat.site_count(); ++i) {
      const auto& res = div.residual[i];
      const double z = res.mean / res.std_error;
      if (std::abs(z) <= 4.0) ++within4;
      sites.add(r, coord_label(lat, lat.geometry().interior_site(i)), eta[i], div.divergence[i].mean,
                res.std_error, res.mean, z);
    }
    for (const auto* d : {&grad.diagnostics, &div.diagnostics}) {
      chains.push_back({{"realization", r},
                        {"observable", d == &grad.diagnostics ? "gradient" : "divergence"},
                        {"seed", d == &grad.diagnostics ? s1 : s2},
                        {"proposal_width", d->proposal_width},
                        {"burn_in_acceptance", d->burn_in_acceptance},
                        {"measure_acceptance", d->measure_acceptance},
                        {"samples", d->samples},
                        {"capped", d->capped}});
    }
  }
  ctx.seeds["chains"] = chains;
  const double n_edges = static_cast<double>(lat.edge_count() * cfg.n_realizations);
  const double n_sites = static_cast<double>(lat.site_count() * cfg.n_realizations);
  if (gaussian) ctx.summary["fraction_edges_within_3_stderr_of_exact"] = within3 / n_edges;
  ctx.summary["fraction_sites_residual_within_4_stderr"] = within4 / n_sites;
}

inline void run_scaling(Context& ctx) {
  const auto& cfg = ctx.cfg;
  const auto scan = variance_scaling_scan(cfg.d, cfg.radii(), cfg.disorder.eta2, cfg.solver, cfg.threads);
  auto& t = ctx.table("scaling.csv", {"L", "variance", "solver_tolerance"});
  for (const auto& row : scan.rows) t.add(static_cast<int>(row.control), row.value, row.uncertainty);
  if (scan.rows.size() >= 3) {
    const auto f = fit(FitModel::log_linear, scan);
    ctx.summary["fit"] = {{"model", "variance = a + b log L"},
                          {"a", f.intercept},
                          {"b", f.slope},
                          {"b_per_doubling", f.slope * std::numbers::ln2},
                          {"r_squared", f.r_squared}};
  }
}

inline void run_decay(Context& ctx) {
  const auto& cfg = ctx.cfg;
  const auto scan = decay_scan_d3(cfg.L, cfg.r_list, cfg.disorder.eta2, cfg.decay_orientation, cfg.solver, cfg.threads);
  auto& t = ctx.table("decay.csv", {"r", "covariance", "r_times_covariance"});
  for (std::size_t k = 0; k < scan.covariance.rows.size(); ++k)
    t.add(static_cast<int>(scan.covariance.rows[k].control), scan.covariance.rows[k].value,
          scan.compensated.rows[k].value);
  ScanResult positive;
  for (const auto& row : scan.covariance.rows)
    if (row.control > 0.0 && row.value > 0.0) positive.rows.push_back(row);
  ctx.summary["orientation"] = scan.covariance.metadata.at("orientation");
  if (positive.rows.size() >= 3) {
    const auto f = fit(FitModel::power_law, positive);
    ctx.summary["fit"] = {{"model", "covariance = A r^-q"}, {"q", f.exponent()}, {"r_squared", f.r_squared}};
  }
}

inline void run_clt(Context& ctx) {
  const auto& cfg = ctx.cfg;
  const auto scan = clt_scan(cfg.d, cfg.radii(), cfg.n_realizations, cfg.disorder, cfg.threads);
  auto& t = ctx.table("clt.csv", {"L", "variance", "jackknife_error", "population_variance", "relative_deviation"});
  for (const auto& row : scan.rows) {
    const int L = static_cast<int>(row.control);
    const double pop = clt_population_variance(cfg.d, L, cfg.disorder.eta2);
    t.add(L, row.value, row.uncertainty, pop, (row.value - pop) / pop);
  }
  ctx.seeds["disorder_realizations"] = {{"first", 0}, {"count", cfg.n_realizations}};
}

inline void run_quadrature(Context& ctx) {
  const auto& cfg = ctx.cfg;
  const double pi2 = std::numbers::pi * std::numbers::pi;
  if (!cfg.R_list.empty()) {
    auto& t = ctx.table("j_of_r.csv", {"R", "J", "J_rel_deviation_from_pi2", "J_error", "I", "I_error",
                                        "relation_rel_deviation"});
    std::vector<std::array<double, 6>> rows(cfg.R_list.size());
    parallel_for(rows.size(), cfg.threads, [&](std::size_t k) {
      const double R = cfg.R_list[k];
      const auto j = j_of_r_detailed(R, cfg.quadrature);
      const auto i = i_of_r_detailed(R, cfg.quadrature);
      rows[k] = {j.value, std::abs(j.value - pi2) / pi2, j.error, i.value, i.error,
                 std::abs(4.0 * R * i.value / std::numbers::pi - j.value) / j.value};
    });
    std::vector<std::size_t> order(rows.size());
    for (std::size_t k = 0; k < order.size(); ++k) order[k] = k;
    std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return cfg.R_list[a] < cfg.R_list[b]; });
    for (auto k : order) t.add(cfg.R_list[k], rows[k][0], rows[k][1], rows[k][2], rows[k][3], rows[k][4], rows[k][5]);
  }
  const auto lim = j_limit_reference_detailed(cfg.quadrature);
  ctx.summary["j_limit"] = {{"value", lim.value}, {"error", lim.error}, {"abs_deviation_from_pi2", std::abs(lim.value - pi2)}};
  if (!cfg.q_list.empty()) {
    auto& t = ctx.table("sphere.csv", {"L", "q", "closed_form", "quadrature", "rel_difference", "L_times_S"});
    auto Ls = cfg.L_list;
    std::sort(Ls.begin(), Ls.end());
    auto qs = cfg.q_list;
    std::sort(qs.begin(), qs.end());
    for (int L : Ls)
      for (double q : qs) {
        const double c = sphere_integral(L, q);
        const auto n = sphere_integral_quadrature(L, q, cfg.quadrature);
        t.add(L, q, c, n.value, std::abs(c - n.value) / c, L * c);
        ctx.check(std::abs(c - n.value) <= std::max(cfg.quadrature.abs_tolerance, 10.0 * n.error),
                  "sphere integral closed form disagrees with quadrature at L=" + std::to_string(L));
      }
  }
}

inline void run_identities(Context& ctx) {
  const auto& cfg = ctx.cfg;
  const auto lat = ctx.lattice();
  const DirichletLaplacian A(lat);
  auto& t = ctx.table("identities.csv", {"check", "realization", "lhs", "rhs", "deviation", "tolerance", "passed"});
  const double tol = cfg.invariant_tolerance;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  auto row = [&](const char* name, long long r, double lhs, double rhs, double dev) {
    const bool ok = dev <= tol;
    t.add(name, r, lhs, rhs, dev, tol, ok);
    ctx.check(ok, std::string(name) + " deviation " + csv_cell(dev));
  };

  row("surface_identity", -1, nan, 1.0, surface_identity_check(A, cfg.solver));
  if (lat.site_count() <= 5000)
    row("surface_identity_columnwise", -1, nan, 1.0, surface_identity_check_direct(A, cfg.solver, cfg.threads));
  const auto sm = second_moment_identity(lat, cfg.disorder.eta2, cfg.solver, cfg.threads);
  row("second_moment", -1, sm.lhs, sm.rhs, sm.relative_difference);
  const auto sa = second_moment_identity_adjoint(lat, cfg.disorder.eta2, cfg.solver);
  row("second_moment_adjoint", -1, sa.lhs, sa.rhs, sa.relative_difference);
  for (std::size_t r = 0; r < cfg.n_realizations; ++r) {
    const auto eta = sample_disorder(ctx.disorder(r), lat.geometry());
    auto X = mean_gradient(A, eta, cfg.solver);
    ctx.maybe_corrupt(X);
    const auto res = divergence_residual(lat, X, eta);
    row("divergence_equation", static_cast<long long>(r), nan, nan, res.max_abs);
    const auto f = integral_form_check(lat, X, eta);
    row("integral_form", static_cast<long long>(r), f.volume_sum, f.surface_sum,
        std::abs(f.difference) / std::max(1.0, std::abs(f.volume_sum)));
  }
}

}  // namespace runner_detail

/// Runs the experiment and writes its files into cfg.output. Never throws
/// for run-time failures; they are reported through the exit code and the
/// manifest.
inline RunOutcome run(const ExperimentConfig& cfg) {
  namespace fs = std::filesystem;
  using clock = std::chrono::steady_clock;
  const auto t0 = clock::now();
  RunOutcome out;
  runner_detail::Context ctx{cfg};
  bool partial = false;

  try {
    validate_config(cfg);
    switch (cfg.experiment) {
      case Experiment::gaussian_exact: runner_detail::run_gaussian_exact(ctx); break;
      case Experiment::mcmc: runner_detail::run_mcmc(ctx); break;
      case Experiment::scaling: runner_detail::run_scaling(ctx); break;
      case Experiment::decay: runner_detail::run_decay(ctx); break;
      case Experiment::clt: runner_detail::run_clt(ctx); break;
      case Experiment::quadrature: runner_detail::run_quadrature(ctx); break;
      case Experiment::identities: runner_detail::run_identities(ctx); break;
    }
    if (!ctx.violations.empty()) {
      out.exit_code = exit_invariant;
      out.message = "invariant check failed: " + ctx.violations.front();
    }
  } catch (const ConfigError& e) {
    out.exit_code = exit_config;
    out.message = std::string("configuration error: ") + e.what();
  } catch (const SolverError& e) {
    out.exit_code = exit_numerical;
    out.message = std::string("numerical failure: ") + e.what();
    partial = true;
  } catch (const QuadratureError& e) {
    out.exit_code = exit_numerical;
    out.message = std::string("numerical failure: ") + e.what();
    partial = true;
  } catch (const InvariantError& e) {
    out.exit_code = exit_invariant;
    out.message = std::string("invariant check failed: ") + e.what();
    partial = true;
  } catch (const std::invalid_argument& e) {
    out.exit_code = exit_config;
    out.message = std::string("configuration error: ") + e.what();
    partial = true;
  } catch (const std::exception& e) {
    out.exit_code = exit_numerical;
    out.message = std::string("failure: ") + e.what();
    partial = true;
  }

  const fs::path dir(cfg.output);
  try {
    fs::create_directories(dir);
    for (const auto& [name, table] : ctx.tables) {
      table.write(dir / name);
      out.files.push_back(dir / name);
    }
  } catch (const std::exception& e) {
    if (out.exit_code == exit_ok) {
      out.exit_code = exit_config;
      out.message = std::string("cannot write output: ") + e.what();
    }
    partial = true;
  }

  auto& m = out.manifest;
  m["artifact"] = "qdi";
  m["version"] = QDI_VERSION;
  m["experiment"] = to_string(cfg.experiment);
  m["config"] = to_config_text(cfg);
  auto echo = nlohmann::ordered_json::object();
  for (const auto& [k, v] : cfg.echo) echo[k] = v;
  m["config_as_given"] = echo;
  m["exit_code"] = out.exit_code;
  m["status"] = out.exit_code == exit_ok ? "ok" : out.message;
  m["partial"] = partial;
  m["wall_time_seconds"] = std::chrono::duration<double>(clock::now() - t0).count();
  m["threads"] = cfg.threads;
  ctx.seeds["master"] = cfg.disorder.seed;
  ctx.seeds["disorder"] = "value at site x in realization r is a function of (master, r, x)";
  m["seeds"] = ctx.seeds;
  m["tolerances"] = {{"solver_rel_tolerance", cfg.solver.rel_tolerance},
                     {"quadrature_abs_tolerance", cfg.quadrature.abs_tolerance},
                     {"quadrature_rel_tolerance", cfg.quadrature.rel_tolerance},
                     {"invariant_tolerance", cfg.invariant_tolerance}};
  m["summary"] = ctx.summary;
  m["violations"] = ctx.violations;
  auto files = nlohmann::ordered_json::array();
  for (const auto& f : out.files) files.push_back(f.filename().string());
  m["files"] = files;
  try {
    std::ofstream mf(dir / "manifest.json");
    mf << m.dump(2) << '\n';
    if (!mf) throw std::runtime_error("write failed");
    out.files.push_back(dir / "manifest.json");
  } catch (const std::exception&) {
    if (out.exit_code == exit_ok) {
      out.exit_code = exit_config;
      out.message = "cannot write manifest";
    }
  }
  return out;
}

}  // namespace qdi
