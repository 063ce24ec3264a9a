#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

#include "qdi/kernel.hpp"

namespace qdi {

/// Dense site label inside the extended box {-(L+R)..L+R}^d. Row-major with
/// the first coordinate most significant, so id order equals lexicographic
/// order of coordinates.
using SiteId = std::int64_t;

/// The box Lambda = {-L..L}^d together with the shell of exterior sites within
/// sup-distance `range` of Lambda.
class BoxGeometry {
 public:
  BoxGeometry(int dim, int radius, int range) : dim_(dim), radius_(radius), range_(range) {
    if (dim < 1 || dim > kMaxDim) throw std::invalid_argument("dimension must lie in [1, 4]");
    if (radius < 0) throw std::invalid_argument("box radius L must be >= 0");
    if (range < 0) throw std::invalid_argument("kernel range must be >= 0");
    side_ = 2 * (radius + range) + 1;
    extended_count_ = 1;
    for (int a = 0; a < dim; ++a) extended_count_ *= side_;
    ordinal_.assign(static_cast<std::size_t>(extended_count_), -1);
    for (SiteId id = 0; id < extended_count_; ++id) {
      if (sup_norm(coord(id)) <= radius_) {
        ordinal_[static_cast<std::size_t>(id)] = static_cast<std::int64_t>(interior_.size());
        interior_.push_back(id);
      }
    }
  }

  int dim() const { return dim_; }
  int radius() const { return radius_; }
  int range() const { return range_; }

  /// |Lambda| = (2L+1)^d.
  std::size_t interior_count() const { return interior_.size(); }
  std::size_t shell_count() const { return static_cast<std::size_t>(extended_count_) - interior_.size(); }
  SiteId extended_count() const { return extended_count_; }

  Coord coord(SiteId id) const {
    Coord c{};
    const int half = radius_ + range_;
    for (int a = dim_ - 1; a >= 0; --a) {
      c[a] = static_cast<int>(id % side_) - half;
      id /= side_;
    }
    return c;
  }

  std::optional<SiteId> id_of(const Coord& c) const {
    const int half = radius_ + range_;
    SiteId id = 0;
    for (int a = 0; a < kMaxDim; ++a) {
      if (a >= dim_) {
        if (c[a] != 0) return std::nullopt;
        continue;
      }
      if (c[a] < -half || c[a] > half) return std::nullopt;
      id = id * side_ + (c[a] + half);
    }
    return id;
  }

  bool contains(const Coord& c) const {
    for (int a = 0; a < kMaxDim; ++a) {
      if (a >= dim_ ? c[a] != 0 : (c[a] < -radius_ || c[a] > radius_)) return false;
    }
    return true;
  }

  bool is_interior(SiteId id) const { return ordinal_[static_cast<std::size_t>(id)] >= 0; }

  /// Position of an interior site in interior-indexed arrays, -1 for shell sites.
  std::int64_t ordinal(SiteId id) const { return ordinal_[static_cast<std::size_t>(id)]; }

  SiteId interior_site(std::size_t ordinal) const { return interior_[ordinal]; }
  const std::vector<SiteId>& interior_sites() const { return interior_; }

  std::size_t ordinal_of(const Coord& c) const {
    auto id = id_of(c);
    if (!id || !is_interior(*id)) throw std::out_of_range("site is not in the interior box");
    return static_cast<std::size_t>(ordinal(*id));
  }

 private:
  int dim_;
  int radius_;
  int range_;
  int side_ = 1;
  SiteId extended_count_ = 1;
  std::vector<std::int64_t> ordinal_;
  std::vector<SiteId> interior_;
};

}  // namespace qdi
