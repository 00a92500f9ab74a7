#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace vcit::checks {

struct MeasurementVector {
  std::vector<double> values;
  std::vector<std::string> labels;

  void validate() const;
  std::size_t size() const { return values.size(); }
};

/// Convex polytope { x : N^T x <= d }. N is m x k with unit columns, one per
/// boundary hyperplane, oriented outward; d holds the plane offsets from the
/// origin.
class HalfSpaceRegion {
 public:
  HalfSpaceRegion() = default;
  /// `normals[j]` is column j. Every column must have norm 1 within 1e-9.
  HalfSpaceRegion(const std::vector<std::vector<double>>& normals,
                  std::vector<double> distances);

  /// Scales each (normal, offset) pair to a unit normal first.
  static HalfSpaceRegion normalized(const std::vector<std::vector<double>>& normals,
                                    const std::vector<double>& offsets);
  /// Axis-aligned box lo <= x <= hi.
  static HalfSpaceRegion box(const std::vector<double>& lo, const std::vector<double>& hi);

  std::size_t dimension() const { return m_; }
  std::size_t faces() const { return distances_.size(); }
  double normal(std::size_t row, std::size_t face) const { return n_[face * m_ + row]; }
  std::vector<double> normal(std::size_t face) const;
  double distance(std::size_t face) const { return distances_[face]; }

  /// c = N^T x.
  std::vector<double> project(const std::vector<double>& x) const;
  std::vector<std::size_t> violated(const std::vector<double>& x) const;
  bool contains(const std::vector<double>& x) const { return violated(x).empty(); }

  HalfSpaceRegion with_face(const std::vector<double>& unit_normal, double distance) const;

 private:
  std::size_t m_ = 0;
  std::vector<double> n_;  // column-major, m_ x faces()
  std::vector<double> distances_;
};

}  // namespace vcit::checks
