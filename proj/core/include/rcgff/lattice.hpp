#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace rcgff {

/// Absolute lattice coordinates of a site of Z^d.
using Site = std::vector<std::int64_t>;

enum class Boundary { free, torus };

const char* to_string(Boundary b);
Boundary parse_boundary(const std::string& text);

/// A finite box of Z^d: `extents[i]` sites along axis i starting at
/// `origin[i]`. Sites are numbered row-major (last axis fastest), so the
/// linear order of site indices is the lexicographic order of coordinates.
class Lattice {
 public:
  Lattice() = default;
  Lattice(std::vector<int> extents, Site origin, Boundary boundary);

  int dim() const { return static_cast<int>(extents_.size()); }
  const std::vector<int>& extents() const { return extents_; }
  const Site& origin() const { return origin_; }
  Boundary boundary() const { return boundary_; }
  std::size_t num_sites() const { return num_sites_; }
  std::size_t stride(int axis) const { return strides_[axis]; }

  /// Absolute coordinates of a site index.
  Site site(std::size_t index) const;
  /// Coordinate of a site index along one axis.
  std::int64_t coord(std::size_t index, int axis) const;
  /// Site index for absolute coordinates; wraps on a torus.
  std::optional<std::size_t> index_of(std::span<const std::int64_t> x) const;
  bool contains(std::span<const std::int64_t> x) const {
    return index_of(x).has_value();
  }

  /// Whether the edge {x, x + e_axis} lies inside the box.
  bool has_edge(std::size_t index, int axis) const;
  /// Neighbor x +/- e_axis, if inside the box (always on a torus).
  std::optional<std::size_t> neighbor(std::size_t index, int axis,
                                      int sign) const;

  /// Direction-major edge index axis * |box| + linear(x).
  std::size_t edge_index(std::size_t index, int axis) const {
    return static_cast<std::size_t>(axis) * num_sites_ + index;
  }

  bool operator==(const Lattice&) const = default;

 private:
  std::vector<int> extents_;
  Site origin_;
  Boundary boundary_ = Boundary::free;
  std::vector<std::size_t> strides_;
  std::size_t num_sites_ = 0;
};

}  // namespace rcgff
