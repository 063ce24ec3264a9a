#pragma once

// Box geometry bound to a kernel: the edge graph, height fields, and
// antisymmetric edge (vector) fields.

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "qdi/geometry.hpp"
#include "qdi/kernel.hpp"

namespace qdi {

/// Canonically oriented edge: `lo` precedes `hi` lexicographically. At least
/// one endpoint is interior.
struct Edge {
  SiteId lo = 0;
  SiteId hi = 0;
  double weight = 0.0;
};

/// Edge index plus the orientation sign of the requested (from, to) pair
/// relative to the canonical orientation.
struct EdgeRef {
  std::size_t index = 0;
  double sign = 1.0;
};

/// Heights on the interior, indexed by interior ordinal. Sites outside the
/// box carry the zero boundary condition.
struct HeightField {
  std::vector<double> values;

  HeightField() = default;
  explicit HeightField(std::size_t n, double fill = 0.0) : values(n, fill) {}
  explicit HeightField(std::vector<double> v) : values(std::move(v)) {}

  std::size_t size() const { return values.size(); }
  double& operator[](std::size_t i) { return values[i]; }
  double operator[](std::size_t i) const { return values[i]; }
};

/// Antisymmetric edge field stored once per canonical edge.
struct VectorField {
  std::vector<double> values;

  VectorField() = default;
  explicit VectorField(std::size_t n, double fill = 0.0) : values(n, fill) {}

  std::size_t size() const { return values.size(); }
  double& operator[](std::size_t e) { return values[e]; }
  double operator[](std::size_t e) const { return values[e]; }
};

struct BoundaryEdge {
  SiteId inside = 0;
  SiteId outside = 0;
  double weight = 0.0;
};

class Lattice {
 public:
  Lattice(BoxGeometry geometry, Kernel kernel)
      : geometry_(std::move(geometry)), kernel_(std::move(kernel)) {
    if (auto report = validate_kernel(kernel_); !report.ok())
      throw std::invalid_argument("invalid kernel (" + std::string(to_string(report.violation)) + "): " +
                                  report.message);
    if (kernel_.dim != geometry_.dim()) throw std::invalid_argument("kernel and geometry dimensions differ");
    if (kernel_.range() > geometry_.range())
      throw std::invalid_argument("geometry shell is thinner than the kernel range");
    for (std::size_t n = 0; n < kernel_.offsets.size(); ++n) {
      if (kernel_.weights[n] > 0.0) {
        offsets_.push_back(kernel_.offsets[n]);
        weights_.push_back(kernel_.weights[n]);
      }
    }
    build_edges();
  }

  /// Default setup: nearest-neighbor kernel on {-L..L}^d.
  static Lattice nearest_neighbor(int dim, int radius) {
    return Lattice(BoxGeometry(dim, radius, 1), Kernel::nearest_neighbor(dim));
  }

  static Lattice with_kernel(int dim, int radius, Kernel kernel) {
    const int range = std::max(1, kernel.range());
    return Lattice(BoxGeometry(dim, radius, range), std::move(kernel));
  }

  const BoxGeometry& geometry() const { return geometry_; }
  const Kernel& kernel() const { return kernel_; }
  int dim() const { return geometry_.dim(); }
  int radius() const { return geometry_.radius(); }
  std::size_t site_count() const { return geometry_.interior_count(); }
  std::size_t edge_count() const { return edges_.size(); }
  const std::vector<Edge>& edges() const { return edges_; }
  const Edge& edge(std::size_t e) const { return edges_[e]; }

  /// Number of kernel offsets with positive weight.
  std::size_t degree() const { return offsets_.size(); }
  const std::vector<Coord>& support() const { return offsets_; }
  const std::vector<double>& support_weights() const { return weights_; }

  /// Neighbor of interior site `ordinal` along support offset `k`.
  SiteId neighbor(std::size_t ordinal, std::size_t k) const { return neighbors_[ordinal * degree() + k]; }

  /// Edge between interior site `ordinal` and its k-th neighbor, oriented
  /// from the interior site.
  EdgeRef incident(std::size_t ordinal, std::size_t k) const { return incident_[ordinal * degree() + k]; }

  HeightField zero_heights() const { return HeightField(site_count()); }
  VectorField zero_vector_field() const { return VectorField(edge_count()); }

  /// Height at any site, zero outside the box.
  double height(const HeightField& phi, SiteId id) const {
    const auto ord = geometry_.ordinal(id);
    return ord >= 0 ? phi[static_cast<std::size_t>(ord)] : 0.0;
  }

  std::optional<EdgeRef> find_edge(SiteId from, SiteId to) const {
    if (geometry_.is_interior(from)) {
      const auto ord = static_cast<std::size_t>(geometry_.ordinal(from));
      for (std::size_t k = 0; k < degree(); ++k)
        if (neighbor(ord, k) == to) return incident(ord, k);
    } else if (geometry_.is_interior(to)) {
      const auto ord = static_cast<std::size_t>(geometry_.ordinal(to));
      for (std::size_t k = 0; k < degree(); ++k) {
        if (neighbor(ord, k) == from) {
          EdgeRef r = incident(ord, k);
          r.sign = -r.sign;
          return r;
        }
      }
    }
    return std::nullopt;
  }

  std::optional<EdgeRef> find_edge(const Coord& from, const Coord& to) const {
    auto a = geometry_.id_of(from);
    auto b = geometry_.id_of(to);
    if (!a || !b) return std::nullopt;
    return find_edge(*a, *b);
  }

  /// Value of w on the oriented pair (from, to); throws if it is not an edge.
  double value(const VectorField& w, SiteId from, SiteId to) const {
    auto ref = find_edge(from, to);
    if (!ref) throw std::out_of_range("pair is not a kernel edge touching the box");
    return ref->sign * w[ref->index];
  }

  double value(const VectorField& w, const Coord& from, const Coord& to) const {
    auto ref = find_edge(from, to);
    if (!ref) throw std::out_of_range("pair is not a kernel edge touching the box");
    return ref->sign * w[ref->index];
  }

 private:
  void build_edges() {
    const std::size_t n = site_count();
    const std::size_t deg = degree();
    neighbors_.resize(n * deg);
    for (std::size_t ord = 0; ord < n; ++ord) {
      const SiteId i = geometry_.interior_site(ord);
      const Coord ci = geometry_.coord(i);
      for (std::size_t k = 0; k < deg; ++k) {
        const SiteId j = *geometry_.id_of(add(ci, offsets_[k]));
        neighbors_[ord * deg + k] = j;
        // Interior-interior pairs are recorded from the lower endpoint only.
        if (!geometry_.is_interior(j) || i < j) edges_.push_back(Edge{std::min(i, j), std::max(i, j), weights_[k]});
      }
    }
    std::sort(edges_.begin(), edges_.end(),
              [](const Edge& a, const Edge& b) { return a.lo != b.lo ? a.lo < b.lo : a.hi < b.hi; });
    incident_.resize(n * deg);
    for (std::size_t ord = 0; ord < n; ++ord) {
      const SiteId i = geometry_.interior_site(ord);
      for (std::size_t k = 0; k < deg; ++k) {
        const SiteId j = neighbors_[ord * deg + k];
        const Edge key{std::min(i, j), std::max(i, j), 0.0};
        auto it = std::lower_bound(edges_.begin(), edges_.end(), key, [](const Edge& a, const Edge& b) {
          return a.lo != b.lo ? a.lo < b.lo : a.hi < b.hi;
        });
        incident_[ord * deg + k] =
            EdgeRef{static_cast<std::size_t>(it - edges_.begin()), i < j ? 1.0 : -1.0};
      }
    }
  }

  BoxGeometry geometry_;
  Kernel kernel_;
  std::vector<Coord> offsets_;
  std::vector<double> weights_;
  std::vector<Edge> edges_;
  std::vector<SiteId> neighbors_;
  std::vector<EdgeRef> incident_;
};

/// phi'_{ij} = phi_i - phi_j on every edge, zero heights outside the box.
inline VectorField gradient_of(const Lattice& lat, const HeightField& phi) {
  if (phi.size() != lat.site_count()) throw std::invalid_argument("height field does not match lattice");
  VectorField w(lat.edge_count());
  for (std::size_t e = 0; e < lat.edge_count(); ++e) {
    const Edge& ed = lat.edge(e);
    w[e] = lat.height(phi, ed.lo) - lat.height(phi, ed.hi);
  }
  return w;
}

/// Largest |w_ij + w_jk + w_kl + w_li| over unit plaquettes whose four edges
/// all belong to the field.
inline double loop_residuals(const Lattice& lat, const VectorField& w) {
  if (lat.dim() < 2) throw std::invalid_argument("loop residuals need d >= 2 (no plaquettes in d = 1)");
  if (w.size() != lat.edge_count()) throw std::invalid_argument("vector field does not match lattice");
  if (lat.kernel().weight(unit_vector(0)) <= 0.0)
    throw std::invalid_argument("loop residuals need unit steps in the kernel support");
  const auto& g = lat.geometry();
  const int d = lat.dim();
  const int lim = g.radius() + 1;
  double worst = 0.0;
  // Corner i ranges over sites whose plaquette can touch the interior.
  Coord c{};
  auto visit = [&](const Coord& i) {
    for (int a = 0; a < d; ++a) {
      for (int b = a + 1; b < d; ++b) {
        const Coord j = add(i, unit_vector(a));
        const Coord k = add(j, unit_vector(b));
        const Coord l = add(i, unit_vector(b));
        auto e1 = lat.find_edge(i, j);
        auto e2 = lat.find_edge(j, k);
        auto e3 = lat.find_edge(k, l);
        auto e4 = lat.find_edge(l, i);
        if (!e1 || !e2 || !e3 || !e4) continue;
        const double s = e1->sign * w[e1->index] + e2->sign * w[e2->index] + e3->sign * w[e3->index] +
                         e4->sign * w[e4->index];
        worst = std::max(worst, std::abs(s));
      }
    }
  };
  for (int a = 0; a < d; ++a) c[a] = -lim;
  while (true) {
    visit(c);
    int a = d - 1;
    while (a >= 0 && c[a] == lim - 1) {
      c[a] = -lim;
      --a;
    }
    if (a < 0) break;
    ++c[a];
  }
  return worst;
}

/// Kernel edges with one endpoint inside and one outside the box, oriented
/// from the inside.
inline std::vector<BoundaryEdge> boundary_edges(const Lattice& lat) {
  std::vector<BoundaryEdge> out;
  const auto& g = lat.geometry();
  for (std::size_t ord = 0; ord < lat.site_count(); ++ord) {
    for (std::size_t k = 0; k < lat.degree(); ++k) {
      const SiteId j = lat.neighbor(ord, k);
      if (!g.is_interior(j)) out.push_back(BoundaryEdge{g.interior_site(ord), j, lat.support_weights()[k]});
    }
  }
  return out;
}

}  // namespace qdi
