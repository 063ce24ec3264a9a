#pragma once

// Random-scan single-site Metropolis sampling of the finite-volume quenched
// Gibbs measure
//   mu(dphi) ~ exp(-H(phi)) dphi,  zero heights outside the box,
// and Monte Carlo estimates of the associated vector field
//   X_ij = E[V'(phi_i - phi_j)].

#include <cmath>
#include <cstdint>
#include <map>
#include <random>
#include <span>
#include <stdexcept>
#include <vector>

#include "qdi/disorder.hpp"
#include "qdi/lattice.hpp"
#include "qdi/potential.hpp"
#include "qdi/quadrature.hpp"
#include "qdi/stats.hpp"

namespace qdi {

struct SamplerConfig {
  double proposal_width = 1.0;
  std::size_t burn_in_sweeps = 2000;
  std::size_t measure_sweeps = 20000;
  std::size_t thin = 1;
  double target_acceptance = 0.44;
  bool autotune = true;
  std::size_t batches = 30;
  /// Proposals with |t| above the cap are rejected and counted.
  double height_cap = 1e6;

  void validate() const {
    if (!(proposal_width > 0.0)) throw std::invalid_argument("proposal_width must be > 0");
    if (thin < 1) throw std::invalid_argument("thin must be >= 1");
    if (measure_sweeps < 100 * thin) throw std::invalid_argument("measure_sweeps must be >= 100 * thin");
    if (!(target_acceptance > 0.0 && target_acceptance < 1.0))
      throw std::invalid_argument("target_acceptance must lie in (0, 1)");
    if (batches < 2 || measure_sweeps / thin < batches) throw std::invalid_argument("too few samples for batch means");
  }
};

struct ChainState {
  HeightField phi;
  std::mt19937_64 rng;
  std::uint64_t sweeps = 0;
  std::uint64_t capped = 0;
  double proposal_width = 1.0;

  /// Flat start phi = 0.
  ChainState(const Lattice& lat, std::uint64_t seed, double width)
      : phi(lat.site_count()), rng(seed), proposal_width(width) {}
};

/// log-density of phi_i = t given all other heights, up to a t-independent
/// constant: -sum_j p(j-i) V(t - phi_j) + eta_i t.
inline double conditional_logdensity(const Lattice& lat, const Potential& pot, const HeightField& phi,
                                     const DisorderField& eta, std::size_t ordinal, double t) {
  double s = eta[ordinal] * t;
  const auto& w = lat.support_weights();
  for (std::size_t k = 0; k < lat.degree(); ++k) s -= w[k] * pot.value(t - lat.height(phi, lat.neighbor(ordinal, k)));
  return s;
}

/// One random-scan sweep of |Lambda| single-site Gaussian proposals at the
/// state's current width. Returns the acceptance fraction.
inline double metropolis_sweep(ChainState& state, const Lattice& lat, const Potential& pot, const DisorderField& eta,
                               double height_cap = 1e6) {
  const std::size_t n = lat.site_count();
  std::uniform_int_distribution<std::size_t> pick(0, n - 1);
  std::normal_distribution<double> step(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::size_t accepted = 0;
  for (std::size_t m = 0; m < n; ++m) {
    const std::size_t i = pick(state.rng);
    const double cur = state.phi[i];
    const double prop = cur + state.proposal_width * step(state.rng);
    const double u = unif(state.rng);
    if (!(std::abs(prop) <= height_cap)) {
      ++state.capped;
      continue;
    }
    const double delta = conditional_logdensity(lat, pot, state.phi, eta, i, prop) -
                         conditional_logdensity(lat, pot, state.phi, eta, i, cur);
    if (delta >= 0.0 || u < std::exp(delta)) {
      state.phi[i] = prop;
      ++accepted;
    }
  }
  ++state.sweeps;
  return static_cast<double>(accepted) / static_cast<double>(n);
}

struct ChainDiagnostics {
  double proposal_width = 0.0;       ///< width frozen after burn-in
  double burn_in_acceptance = 0.0;   ///< mean acceptance over the last half of burn-in
  double measure_acceptance = 0.0;
  std::size_t samples = 0;
  std::uint64_t capped = 0;
};

/// Burn-in, optional width autotuning, then measurement. `observe` maps the
/// current heights to `n_obs` values written into a span.
template <typename Observe>
ChainDiagnostics run_chain(const Lattice& lat, const Potential& pot, const DisorderField& eta, const SamplerConfig& cfg,
                           std::uint64_t seed, BatchMeans& acc, Observe&& observe) {
  cfg.validate();
  if (eta.size() != lat.site_count()) throw std::invalid_argument("disorder field does not match the lattice");
  ChainState state(lat, seed, cfg.proposal_width);
  ChainDiagnostics diag;

  double tail_acc = 0.0;
  std::size_t tail_n = 0;
  for (std::size_t s = 0; s < cfg.burn_in_sweeps; ++s) {
    const double a = metropolis_sweep(state, lat, pot, eta, cfg.height_cap);
    if (cfg.autotune) {
      // Robbins-Monro step on log(width) toward the target acceptance.
      const double gain = 1.0 / std::sqrt(1.0 + static_cast<double>(s) / 10.0);
      state.proposal_width *= std::exp(gain * (a - cfg.target_acceptance));
    }
    if (2 * s >= cfg.burn_in_sweeps) {
      tail_acc += a;
      ++tail_n;
    }
  }
  diag.burn_in_acceptance = tail_n ? tail_acc / static_cast<double>(tail_n) : 0.0;
  diag.proposal_width = state.proposal_width;

  std::vector<double> buf(acc.observables());
  double acc_sum = 0.0;
  for (std::size_t s = 0; s < cfg.measure_sweeps; ++s) {
    acc_sum += metropolis_sweep(state, lat, pot, eta, cfg.height_cap);
    if ((s + 1) % cfg.thin == 0 && !acc.full()) {
      observe(state.phi, std::span<double>(buf));
      acc.add(buf);
      ++diag.samples;
    }
  }
  diag.measure_acceptance = acc_sum / static_cast<double>(cfg.measure_sweeps);
  diag.capped = state.capped;
  return diag;
}

inline BatchMeans make_accumulator(std::size_t n_obs, const SamplerConfig& cfg) {
  const std::size_t samples = cfg.measure_sweeps / cfg.thin;
  return BatchMeans(n_obs, cfg.batches, samples / cfg.batches);
}

struct GradientEstimate {
  /// Keyed by canonical edge index; the stored mean is for (lo -> hi).
  std::map<std::size_t, EdgeEstimate> edges;
  ChainDiagnostics diagnostics;

  /// Estimate for the oriented pair (from, to); reversing flips the mean.
  EdgeEstimate oriented(const Lattice& lat, SiteId from, SiteId to) const {
    auto ref = lat.find_edge(from, to);
    if (!ref) throw std::out_of_range("pair is not a kernel edge");
    EdgeEstimate e = edges.at(ref->index);
    e.mean *= ref->sign;
    return e;
  }
};

/// Time average of V'(phi_lo - phi_hi) on each requested canonical edge.
inline GradientEstimate estimate_gradient_mean(const Lattice& lat, const Potential& pot, const DisorderField& eta,
                                               const std::vector<std::size_t>& edges, const SamplerConfig& cfg,
                                               std::uint64_t seed) {
  for (std::size_t e : edges)
    if (e >= lat.edge_count()) throw std::out_of_range("edge index out of range");
  cfg.validate();
  auto acc = make_accumulator(edges.size(), cfg);
  GradientEstimate out;
  out.diagnostics = run_chain(lat, pot, eta, cfg, seed, acc, [&](const HeightField& phi, std::span<double> v) {
    for (std::size_t k = 0; k < edges.size(); ++k) {
      const Edge& ed = lat.edge(edges[k]);
      v[k] = pot.derivative(lat.height(phi, ed.lo) - lat.height(phi, ed.hi));
    }
  });
  for (std::size_t k = 0; k < edges.size(); ++k) out.edges[edges[k]] = acc.estimate(k);
  return out;
}

inline std::vector<std::size_t> all_edges(const Lattice& lat) {
  std::vector<std::size_t> e(lat.edge_count());
  for (std::size_t k = 0; k < e.size(); ++k) e[k] = k;
  return e;
}

struct DivergenceEstimate {
  /// Per interior site: estimate of sum_j p(j-i) V'(phi_i - phi_j).
  std::vector<EdgeEstimate> divergence;
  /// eta_i minus the divergence estimate; std_error carries over.
  std::vector<EdgeEstimate> residual;
  ChainDiagnostics diagnostics;
};

/// Samples the site divergence of V' directly, so its batch-means error
/// includes the covariances between the edges at a site.
inline DivergenceEstimate estimate_divergence(const Lattice& lat, const Potential& pot, const DisorderField& eta,
                                              const SamplerConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  const std::size_t n = lat.site_count();
  auto acc = make_accumulator(n, cfg);
  const auto& w = lat.support_weights();
  DivergenceEstimate out;
  out.diagnostics = run_chain(lat, pot, eta, cfg, seed, acc, [&](const HeightField& phi, std::span<double> v) {
    for (std::size_t i = 0; i < n; ++i) {
      double s = 0.0;
      for (std::size_t k = 0; k < lat.degree(); ++k) s += w[k] * pot.derivative(phi[i] - lat.height(phi, lat.neighbor(i, k)));
      v[i] = s;
    }
  });
  out.divergence.resize(n);
  out.residual.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    out.divergence[i] = acc.estimate(i);
    out.residual[i] = out.divergence[i];
    out.residual[i].mean = eta[i] - out.divergence[i].mean;
  }
  return out;
}

struct SingleSiteMoments {
  double mean_height = 0.0;
  /// <V'(phi_i - 0)>, identical on every edge to the zero boundary.
  double mean_derivative = 0.0;
  /// sum_j p_j <V'>; equals eta_i by partial integration.
  double divergence = 0.0;
  double residual = 0.0;  ///< divergence - eta_i
  double error = 0.0;     ///< combined quadrature error bound on the ratios
};

/// One interior site surrounded by zero boundary heights:
///   w(t) = exp(-sum_j p_j V(t) + eta t),
/// with <t> and <V'(t)> by 1-d adaptive quadrature.
inline SingleSiteMoments single_site_quadrature_oracle(const Potential& pot, double eta_i,
                                                       const std::vector<double>& weights,
                                                       const QuadratureConfig& cfg = {}) {
  cfg.validate();
  double ptot = 0.0;
  for (double p : weights) {
    if (!(p >= 0.0)) throw std::invalid_argument("kernel weights must be non-negative");
    ptot += p;
  }
  if (!(ptot > 0.0)) throw std::invalid_argument("kernel weights must not all vanish");
  auto logw = [&](double t) { return -ptot * pot.value(t) + eta_i * t; };

  // Mode of log w: root of ptot V'(t) = eta by bisection (V' is increasing
  // outside a bounded set for both families, so bracket generously).
  double lo = -1.0, hi = 1.0;
  while (ptot * pot.derivative(lo) - eta_i > 0.0) lo *= 2.0;
  while (ptot * pot.derivative(hi) - eta_i < 0.0) hi *= 2.0;
  // Scan for the global maximum of log w on the bracket.
  double mode = lo, best = logw(lo);
  for (int k = 1; k <= 4000; ++k) {
    const double t = lo + (hi - lo) * k / 4000.0;
    if (logw(t) > best) {
      best = logw(t);
      mode = t;
    }
  }
  // Integration window where log w is within 60 of its maximum; the
  // neglected mass is below exp(-60) relative.
  const double drop = 60.0;
  double left = mode - 1.0, right = mode + 1.0;
  while (logw(left) > best - drop) left = mode - 2.0 * (mode - left);
  while (logw(right) > best - drop) right = mode + 2.0 * (right - mode);

  auto weight = [&](double t) { return std::exp(logw(t) - best); };
  const std::vector<double> pts{left, mode, right};
  const auto z = integrate_pieces(weight, pts, cfg);
  const auto m1 = integrate_pieces([&](double t) { return t * weight(t); }, pts, cfg);
  const auto md = integrate_pieces([&](double t) { return pot.derivative(t) * weight(t); }, pts, cfg);
  if (!(z.value > 0.0)) throw QuadratureError("single-site normalization vanished");

  SingleSiteMoments out;
  out.mean_height = m1.value / z.value;
  out.mean_derivative = md.value / z.value;
  out.divergence = ptot * out.mean_derivative;
  out.residual = out.divergence - eta_i;
  out.error = (md.error + std::abs(out.mean_derivative) * z.error) / z.value * ptot +
              (m1.error + std::abs(out.mean_height) * z.error) / z.value;
  if (!(out.error <= std::max(cfg.abs_tolerance, cfg.rel_tolerance * (1.0 + std::abs(out.divergence)))))
    throw QuadratureError("single-site quadrature did not reach the requested tolerance");
  return out;
}

}  // namespace qdi
