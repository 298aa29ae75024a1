#include "rcgff/lattice.hpp"

#include <string>

#include "rcgff/errors.hpp"

namespace rcgff {

const char* to_string(Boundary b) {
  return b == Boundary::torus ? "torus" : "free";
}

Boundary parse_boundary(const std::string& text) {
  if (text == "free") return Boundary::free;
  if (text == "torus") return Boundary::torus;
  fail(ErrorKind::parameter, "unknown boundary '" + text + "'");
}

Lattice::Lattice(std::vector<int> extents, Site origin, Boundary boundary)
    : extents_(std::move(extents)),
      origin_(std::move(origin)),
      boundary_(boundary) {
  require(extents_.size() >= 1, ErrorKind::parameter, "empty extents");
  if (origin_.empty()) origin_.assign(extents_.size(), 0);
  require(origin_.size() == extents_.size(), ErrorKind::parameter,
          "origin dimension does not match extents");
  strides_.assign(extents_.size(), 1);
  num_sites_ = 1;
  for (int i = dim() - 1; i >= 0; --i) {
    require(extents_[i] >= 1, ErrorKind::parameter, "extent must be positive");
    strides_[i] = num_sites_;
    num_sites_ *= static_cast<std::size_t>(extents_[i]);
  }
}

Site Lattice::site(std::size_t index) const {
  Site x(extents_.size());
  for (int i = 0; i < dim(); ++i) x[i] = coord(index, i);
  return x;
}

std::int64_t Lattice::coord(std::size_t index, int axis) const {
  return origin_[axis] +
         static_cast<std::int64_t>((index / strides_[axis]) %
                                   static_cast<std::size_t>(extents_[axis]));
}

std::optional<std::size_t> Lattice::index_of(
    std::span<const std::int64_t> x) const {
  if (x.size() != extents_.size()) return std::nullopt;
  std::size_t idx = 0;
  for (int i = 0; i < dim(); ++i) {
    std::int64_t local = x[i] - origin_[i];
    const std::int64_t len = extents_[i];
    if (boundary_ == Boundary::torus) {
      local %= len;
      if (local < 0) local += len;
    } else if (local < 0 || local >= len) {
      return std::nullopt;
    }
    idx += static_cast<std::size_t>(local) * strides_[i];
  }
  return idx;
}

bool Lattice::has_edge(std::size_t index, int axis) const {
  if (boundary_ == Boundary::torus) return extents_[axis] >= 2;
  const auto local = (index / strides_[axis]) %
                     static_cast<std::size_t>(extents_[axis]);
  return local + 1 < static_cast<std::size_t>(extents_[axis]);
}

std::optional<std::size_t> Lattice::neighbor(std::size_t index, int axis,
                                             int sign) const {
  const auto len = static_cast<std::size_t>(extents_[axis]);
  const auto local = (index / strides_[axis]) % len;
  const std::size_t base = index - local * strides_[axis];
  if (sign > 0) {
    if (local + 1 < len) return index + strides_[axis];
    if (boundary_ == Boundary::torus && len >= 2) return base;
    return std::nullopt;
  }
  if (local > 0) return index - strides_[axis];
  if (boundary_ == Boundary::torus && len >= 2)
    return base + (len - 1) * strides_[axis];
  return std::nullopt;
}

}  // namespace rcgff
