#pragma once

#include <stdexcept>

#include "qdi/disorder.hpp"
#include "qdi/lattice.hpp"
#include "qdi/potential.hpp"

namespace qdi {

/// 1/2 sum_{i,j in Lambda} p(i-j) V(phi_i - phi_j). Invariant under a joint
/// shift of all interior heights.
inline double interior_energy(const Lattice& lat, const Potential& pot, const HeightField& phi) {
  const auto& g = lat.geometry();
  double e = 0.0;
  for (const Edge& ed : lat.edges())
    if (g.is_interior(ed.lo) && g.is_interior(ed.hi))
      e += ed.weight * pot.value(lat.height(phi, ed.lo) - lat.height(phi, ed.hi));
  return e;
}

/// Finite-volume Hamiltonian with zero boundary condition:
///   H(phi) = 1/2 sum_{i,j in Lambda} p V(phi_i - phi_j)
///          + sum_{i in Lambda, j outside} p V(phi_i) - sum_i eta_i phi_i
inline double energy(const Lattice& lat, const Potential& pot, const HeightField& phi, const DisorderField& eta) {
  if (phi.size() != lat.site_count() || eta.size() != lat.site_count())
    throw std::invalid_argument("fields do not match the lattice");
  // Each interior-interior pair appears once in the edge list, which absorbs
  // the 1/2 of the ordered double sum.
  double e = 0.0;
  for (const Edge& ed : lat.edges()) e += ed.weight * pot.value(lat.height(phi, ed.lo) - lat.height(phi, ed.hi));
  for (std::size_t i = 0; i < phi.size(); ++i) e -= eta[i] * phi[i];
  return e;
}

}  // namespace qdi
