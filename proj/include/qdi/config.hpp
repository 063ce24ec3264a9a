#pragma once

// Flat key=value experiment configuration.
//
//   # comment
//   experiment=identities
//   d=2
//   L=6
//
// Lists are comma separated. Unknown keys, malformed values and invalid
// combinations are reported with the offending line number.

#include <charconv>
#include <cstdint>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "qdi/diagnostics.hpp"
#include "qdi/disorder.hpp"
#include "qdi/gaussian_exact.hpp"
#include "qdi/kernel.hpp"
#include "qdi/mcmc.hpp"
#include "qdi/potential.hpp"
#include "qdi/quadrature.hpp"

namespace qdi {

enum class Experiment { gaussian_exact, mcmc, scaling, decay, clt, quadrature, identities };

inline const char* to_string(Experiment e) {
  switch (e) {
    case Experiment::gaussian_exact: return "gaussian-exact";
    case Experiment::mcmc: return "mcmc";
    case Experiment::scaling: return "scaling";
    case Experiment::decay: return "decay";
    case Experiment::clt: return "clt";
    case Experiment::quadrature: return "quadrature";
    case Experiment::identities: return "identities";
  }
  return "unknown";
}

/// Test hook: corrupts the computed vector field before the invariant checks.
enum class FaultInjection { none, corrupt_x };

class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::size_t line, const std::string& what)
      : std::runtime_error(line ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

struct KernelSpec {
  std::string name = "nearest-neighbor";
  double range2_weight = 0.0;

  Kernel build(int d) const {
    if (name == "axial-range2") return Kernel::axial_range2(d, range2_weight);
    return Kernel::nearest_neighbor(d);
  }
  std::string describe() const {
    if (name == "axial-range2") {
      std::ostringstream os;
      os.precision(17);
      os << name << ":" << range2_weight;
      return os.str();
    }
    return name;
  }
};

struct ExperimentConfig {
  Experiment experiment = Experiment::identities;
  int d = 2;
  int L = 4;
  std::vector<int> L_list;
  KernelSpec kernel;
  Potential potential = Potential::quadratic();
  DisorderSpec disorder;
  std::size_t n_realizations = 1;
  SamplerConfig sampler;
  SolverConfig solver;
  QuadratureConfig quadrature;
  std::vector<double> R_list;
  std::vector<double> q_list;
  std::vector<int> r_list;
  DecayOrientation decay_orientation = DecayOrientation::transverse;
  /// Threshold for exact-identity checks that map to exit code 3.
  double invariant_tolerance = 1e-8;
  std::string output = "out";
  unsigned threads = 1;
  FaultInjection inject_fault = FaultInjection::none;

  /// Keys as written, after normalization, in file order.
  std::vector<std::pair<std::string, std::string>> echo;

  std::vector<int> radii() const { return L_list.empty() ? std::vector<int>{L} : L_list; }
};

namespace config_detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

inline std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    out.push_back(trim(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

template <typename T>
T parse_number(std::string_view v, std::size_t line, std::string_view key) {
  T out{};
  const auto* end = v.data() + v.size();
  const auto [ptr, ec] = std::from_chars(v.data(), end, out);
  if (v.empty() || ec != std::errc() || ptr != end) {
    throw ConfigError(line, "type mismatch for '" + std::string(key) + "': cannot parse '" + std::string(v) + "'");
  }
  return out;
}

template <typename T>
std::vector<T> parse_list(std::string_view v, std::size_t line, std::string_view key) {
  std::vector<T> out;
  for (auto item : split(v, ',')) out.push_back(parse_number<T>(item, line, key));
  return out;
}

inline bool parse_bool(std::string_view v, std::size_t line, std::string_view key) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError(line, "type mismatch for '" + std::string(key) + "': expected true or false");
}

inline Potential parse_potential(std::string_view v, std::size_t line) {
  const auto parts = split(v, ':');
  try {
    if (parts[0] == "quadratic") {
      if (parts.size() == 1) return Potential::quadratic();
      if (parts.size() == 2) return Potential::quadratic(parse_number<double>(parts[1], line, "potential"));
    } else if (parts[0] == "quartic" && parts.size() == 3) {
      return Potential::quartic(parse_number<double>(parts[1], line, "potential"),
                                parse_number<double>(parts[2], line, "potential"));
    }
  } catch (const std::invalid_argument& e) {
    throw ConfigError(line, std::string("invalid potential: ") + e.what());
  }
  throw ConfigError(line, "potential must be quadratic, quadratic:c or quartic:a:b");
}

inline KernelSpec parse_kernel(std::string_view v, std::size_t line) {
  const auto parts = split(v, ':');
  KernelSpec k;
  if (parts[0] == "nearest-neighbor" && parts.size() == 1) return k;
  if (parts[0] == "axial-range2" && parts.size() == 2) {
    k.name = "axial-range2";
    k.range2_weight = parse_number<double>(parts[1], line, "kernel");
    if (!(k.range2_weight >= 0.0 && k.range2_weight <= 1.0))
      throw ConfigError(line, "axial-range2 weight must lie in [0, 1]");
    return k;
  }
  throw ConfigError(line, "kernel must be nearest-neighbor or axial-range2:w");
}

inline Experiment parse_experiment(std::string_view v, std::size_t line) {
  for (auto e : {Experiment::gaussian_exact, Experiment::mcmc, Experiment::scaling, Experiment::decay, Experiment::clt,
                 Experiment::quadrature, Experiment::identities})
    if (v == to_string(e)) return e;
  throw ConfigError(line, "unknown experiment '" + std::string(v) + "'");
}

inline std::string join(const auto& xs) {
  std::ostringstream os;
  os.precision(17);
  for (std::size_t k = 0; k < xs.size(); ++k) os << (k ? "," : "") << xs[k];
  return os.str();
}

}  // namespace config_detail

/// Checks cross-key constraints. `line_of` maps a key to the line it was set
/// on (0 when defaulted) so errors point at the right place.
inline void validate_config(const ExperimentConfig& c, const std::map<std::string, std::size_t>& line_of = {}) {
  auto at = [&](const char* key) {
    auto it = line_of.find(key);
    return it == line_of.end() ? std::size_t{0} : it->second;
  };
  auto radius_line = [&] { return at("L_list") ? at("L_list") : at("L"); };
  if (c.d < 1 || c.d > kMaxDim) throw ConfigError(at("d"), "d must be between 1 and " + std::to_string(kMaxDim));
  const auto radii = c.radii();
  for (int L : radii)
    if (L < 0) throw ConfigError(radius_line(), "L must be >= 0");
  if (!(c.disorder.eta2 > 0.0)) throw ConfigError(at("eta2"), "eta2 must be > 0");
  if (c.n_realizations < 1) throw ConfigError(at("n_realizations"), "n_realizations must be >= 1");
  if (c.threads < 1) throw ConfigError(at("threads"), "threads must be >= 1");
  if (!(c.invariant_tolerance > 0.0)) throw ConfigError(at("invariant_tolerance"), "invariant_tolerance must be > 0");
  if (!(c.solver.rel_tolerance > 0.0)) throw ConfigError(at("rel_tolerance"), "rel_tolerance must be > 0");
  try {
    c.quadrature.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(0, e.what());
  }
  try {
    Lattice::with_kernel(c.d, 0, c.kernel.build(c.d));
  } catch (const std::invalid_argument& e) {
    throw ConfigError(at("kernel"), std::string("invalid kernel: ") + e.what());
  }

  switch (c.experiment) {
    case Experiment::scaling:
      if (c.kernel.name != "nearest-neighbor") throw ConfigError(at("kernel"), "scaling uses the nearest-neighbor kernel");
      for (int L : radii)
        if (L < 1) throw ConfigError(radius_line(), "L must be >= 1 for scaling");
      break;
    case Experiment::clt:
      for (int L : radii)
        if (L < 1) throw ConfigError(radius_line(), "L must be >= 1 for clt");
      if (c.n_realizations < 100) throw ConfigError(at("n_realizations"), "clt needs n_realizations >= 100");
      break;
    case Experiment::decay:
      if (c.d != 3) throw ConfigError(at("d"), "decay is defined for d = 3");
      if (c.kernel.name != "nearest-neighbor") throw ConfigError(at("kernel"), "decay uses the nearest-neighbor kernel");
      if (c.r_list.empty()) throw ConfigError(0, "decay needs r_list");
      for (int r : c.r_list)
        if (r < 0 || 2 * r > c.L) throw ConfigError(at("r_list"), "decay separations must satisfy 0 <= r <= L/2");
      break;
    case Experiment::quadrature:
      if (c.R_list.empty() && c.q_list.empty()) throw ConfigError(0, "quadrature needs R_list or q_list");
      for (double R : c.R_list)
        if (!(R > 0.0)) throw ConfigError(at("R_list"), "R values must be > 0");
      for (double q : c.q_list)
        if (!(q > 0.0) || q == 1.0) throw ConfigError(at("q_list"), "q values must be > 0 and != 1");
      if (!c.q_list.empty() && c.L_list.empty()) throw ConfigError(at("q_list"), "q_list needs L_list");
      break;
    case Experiment::mcmc:
      try {
        c.sampler.validate();
      } catch (const std::invalid_argument& e) {
        throw ConfigError(0, std::string("invalid sampler settings: ") + e.what());
      }
      break;
    case Experiment::identities:
      if (c.L < 1) throw ConfigError(at("L"), "L must be >= 1 for identities");
      break;
    case Experiment::gaussian_exact:
      break;
  }
}

inline ExperimentConfig parse_config(std::string_view text) {
  using namespace config_detail;
  ExperimentConfig c;
  std::map<std::string, std::size_t> line_of;
  bool have_experiment = false;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    auto line = text.substr(start, end - start);
    start = end + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ConfigError(line_no, "expected key=value");
    const std::string key(trim(line.substr(0, eq)));
    const auto v = trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError(line_no, "empty key");
    if (line_of.count(key)) throw ConfigError(line_no, "duplicate key '" + key + "'");
    line_of[key] = line_no;
    const auto n = line_no;

    if (key == "experiment") {
      c.experiment = parse_experiment(v, n);
      have_experiment = true;
    } else if (key == "d") {
      c.d = parse_number<int>(v, n, key);
    } else if (key == "L") {
      c.L = parse_number<int>(v, n, key);
    } else if (key == "L_list") {
      c.L_list = parse_list<int>(v, n, key);
    } else if (key == "kernel") {
      c.kernel = parse_kernel(v, n);
    } else if (key == "potential") {
      c.potential = parse_potential(v, n);
    } else if (key == "disorder") {
      try {
        c.disorder.family = parse_disorder_family(v);
      } catch (const std::invalid_argument& e) {
        throw ConfigError(n, e.what());
      }
    } else if (key == "eta2") {
      c.disorder.eta2 = parse_number<double>(v, n, key);
    } else if (key == "seed") {
      c.disorder.seed = parse_number<std::uint64_t>(v, n, key);
    } else if (key == "n_realizations") {
      c.n_realizations = parse_number<std::size_t>(v, n, key);
    } else if (key == "R_list") {
      c.R_list = parse_list<double>(v, n, key);
    } else if (key == "q_list") {
      c.q_list = parse_list<double>(v, n, key);
    } else if (key == "r_list") {
      c.r_list = parse_list<int>(v, n, key);
    } else if (key == "decay_orientation") {
      if (v == "transverse")
        c.decay_orientation = DecayOrientation::transverse;
      else if (v == "collinear")
        c.decay_orientation = DecayOrientation::collinear;
      else
        throw ConfigError(n, "decay_orientation must be transverse or collinear");
    } else if (key == "proposal_width") {
      c.sampler.proposal_width = parse_number<double>(v, n, key);
    } else if (key == "burn_in_sweeps") {
      c.sampler.burn_in_sweeps = parse_number<std::size_t>(v, n, key);
    } else if (key == "measure_sweeps") {
      c.sampler.measure_sweeps = parse_number<std::size_t>(v, n, key);
    } else if (key == "thin") {
      c.sampler.thin = parse_number<std::size_t>(v, n, key);
    } else if (key == "target_acceptance") {
      c.sampler.target_acceptance = parse_number<double>(v, n, key);
    } else if (key == "autotune") {
      c.sampler.autotune = parse_bool(v, n, key);
    } else if (key == "batches") {
      c.sampler.batches = parse_number<std::size_t>(v, n, key);
    } else if (key == "height_cap") {
      c.sampler.height_cap = parse_number<double>(v, n, key);
    } else if (key == "rel_tolerance") {
      c.solver.rel_tolerance = parse_number<double>(v, n, key);
    } else if (key == "max_iterations") {
      c.solver.max_iterations = parse_number<std::size_t>(v, n, key);
    } else if (key == "quad_abs_tolerance") {
      c.quadrature.abs_tolerance = parse_number<double>(v, n, key);
    } else if (key == "quad_rel_tolerance") {
      c.quadrature.rel_tolerance = parse_number<double>(v, n, key);
    } else if (key == "quad_max_subdivisions") {
      c.quadrature.max_subdivisions = parse_number<unsigned>(v, n, key);
    } else if (key == "quad_cutoff") {
      c.quadrature.cutoff = parse_number<double>(v, n, key);
    } else if (key == "invariant_tolerance") {
      c.invariant_tolerance = parse_number<double>(v, n, key);
    } else if (key == "output") {
      if (v.empty()) throw ConfigError(n, "output must not be empty");
      c.output = std::string(v);
    } else if (key == "threads") {
      c.threads = parse_number<unsigned>(v, n, key);
    } else if (key == "inject_fault") {
      if (v == "none")
        c.inject_fault = FaultInjection::none;
      else if (v == "corrupt_x")
        c.inject_fault = FaultInjection::corrupt_x;
      else
        throw ConfigError(n, "inject_fault must be none or corrupt_x");
    } else {
      throw ConfigError(n, "unknown key '" + key + "'");
    }
    c.echo.emplace_back(key, std::string(v));
  }
  if (!have_experiment) throw ConfigError(0, "missing required key 'experiment'");
  validate_config(c, line_of);
  return c;
}

/// Every setting in canonical key=value form; parse_config on the result
/// reproduces the configuration.
inline std::string to_config_text(const ExperimentConfig& c) {
  using config_detail::join;
  std::ostringstream os;
  os.precision(17);
  os << "experiment=" << to_string(c.experiment) << "\n";
  os << "d=" << c.d << "\n";
  os << "L=" << c.L << "\n";
  if (!c.L_list.empty()) os << "L_list=" << join(c.L_list) << "\n";
  os << "kernel=" << c.kernel.describe() << "\n";
  os << "potential=" << c.potential.describe() << "\n";
  os << "disorder=" << to_string(c.disorder.family) << "\n";
  os << "eta2=" << c.disorder.eta2 << "\n";
  os << "seed=" << c.disorder.seed << "\n";
  os << "n_realizations=" << c.n_realizations << "\n";
  if (!c.R_list.empty()) os << "R_list=" << join(c.R_list) << "\n";
  if (!c.q_list.empty()) os << "q_list=" << join(c.q_list) << "\n";
  if (!c.r_list.empty()) os << "r_list=" << join(c.r_list) << "\n";
  os << "decay_orientation=" << (c.decay_orientation == DecayOrientation::transverse ? "transverse" : "collinear") << "\n";
  os << "proposal_width=" << c.sampler.proposal_width << "\n";
  os << "burn_in_sweeps=" << c.sampler.burn_in_sweeps << "\n";
  os << "measure_sweeps=" << c.sampler.measure_sweeps << "\n";
  os << "thin=" << c.sampler.thin << "\n";
  os << "target_acceptance=" << c.sampler.target_acceptance << "\n";
  os << "autotune=" << (c.sampler.autotune ? "true" : "false") << "\n";
  os << "batches=" << c.sampler.batches << "\n";
  os << "height_cap=" << c.sampler.height_cap << "\n";
  os << "rel_tolerance=" << c.solver.rel_tolerance << "\n";
  os << "max_iterations=" << c.solver.max_iterations << "\n";
  os << "quad_abs_tolerance=" << c.quadrature.abs_tolerance << "\n";
  os << "quad_rel_tolerance=" << c.quadrature.rel_tolerance << "\n";
  os << "quad_max_subdivisions=" << c.quadrature.max_subdivisions << "\n";
  os << "quad_cutoff=" << c.quadrature.cutoff << "\n";
  os << "invariant_tolerance=" << c.invariant_tolerance << "\n";
  os << "output=" << c.output << "\n";
  os << "threads=" << c.threads << "\n";
  os << "inject_fault=" << (c.inject_fault == FaultInjection::corrupt_x ? "corrupt_x" : "none") << "\n";
  return os.str();
}

}  // namespace qdi
