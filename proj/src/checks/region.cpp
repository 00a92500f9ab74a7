#include "vcit/checks/region.hpp"

#include <cmath>

#include "vcit/error.hpp"

namespace vcit::checks {

void MeasurementVector::validate() const {
  if (values.size() != labels.size())
    throw Error(Errc::LengthMismatch, "measurement vector has " + std::to_string(values.size()) +
                                          " values but " + std::to_string(labels.size()) +
                                          " labels");
  for (double v : values)
    if (!std::isfinite(v)) throw Error(Errc::InvalidArgument, "measurement is not finite");
}

namespace {

double norm(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

}  // namespace

HalfSpaceRegion::HalfSpaceRegion(const std::vector<std::vector<double>>& normals,
                                 std::vector<double> distances)
    : distances_(std::move(distances)) {
  if (normals.empty()) throw Error(Errc::InvalidArgument, "region needs at least one face");
  if (normals.size() != distances_.size())
    throw Error(Errc::LengthMismatch, "region has " + std::to_string(normals.size()) +
                                          " normals but " + std::to_string(distances_.size()) +
                                          " distances");
  m_ = normals.front().size();
  if (m_ == 0) throw Error(Errc::InvalidArgument, "region dimension must be >= 1");
  n_.reserve(m_ * normals.size());
  for (std::size_t j = 0; j < normals.size(); ++j) {
    const auto& col = normals[j];
    if (col.size() != m_)
      throw Error(Errc::DimensionMismatch, "normal " + std::to_string(j) + " has dimension " +
                                               std::to_string(col.size()) + ", expected " +
                                               std::to_string(m_));
    for (double x : col)
      if (!std::isfinite(x)) throw Error(Errc::InvalidArgument, "normal is not finite");
    if (std::abs(norm(col) - 1.0) > 1e-9)
      throw Error(Errc::InvalidArgument, "normal " + std::to_string(j) + " is not a unit vector");
    if (!std::isfinite(distances_[j]))
      throw Error(Errc::InvalidArgument, "distance is not finite");
    n_.insert(n_.end(), col.begin(), col.end());
  }
}

HalfSpaceRegion HalfSpaceRegion::normalized(const std::vector<std::vector<double>>& normals,
                                            const std::vector<double>& offsets) {
  if (normals.size() != offsets.size())
    throw Error(Errc::LengthMismatch, "normals and offsets differ in count");
  std::vector<std::vector<double>> unit(normals);
  std::vector<double> d(offsets);
  for (std::size_t j = 0; j < unit.size(); ++j) {
    const double len = norm(unit[j]);
    if (!(len > 0.0)) throw Error(Errc::InvalidArgument, "zero normal");
    for (auto& x : unit[j]) x /= len;
    d[j] /= len;
  }
  return HalfSpaceRegion(unit, std::move(d));
}

HalfSpaceRegion HalfSpaceRegion::box(const std::vector<double>& lo, const std::vector<double>& hi) {
  if (lo.size() != hi.size()) throw Error(Errc::DimensionMismatch, "box bounds differ in size");
  std::vector<std::vector<double>> normals;
  std::vector<double> d;
  for (std::size_t i = 0; i < lo.size(); ++i) {
    if (lo[i] > hi[i]) throw Error(Errc::InvalidArgument, "box has lo > hi");
    std::vector<double> e(lo.size(), 0.0);
    e[i] = 1.0;
    normals.push_back(e);
    d.push_back(hi[i]);
    e[i] = -1.0;
    normals.push_back(e);
    d.push_back(-lo[i]);
  }
  return HalfSpaceRegion(normals, std::move(d));
}

std::vector<double> HalfSpaceRegion::normal(std::size_t face) const {
  return {n_.begin() + face * m_, n_.begin() + (face + 1) * m_};
}

std::vector<double> HalfSpaceRegion::project(const std::vector<double>& x) const {
  if (x.size() != m_)
    throw Error(Errc::DimensionMismatch, "vector has dimension " + std::to_string(x.size()) +
                                             ", region expects " + std::to_string(m_));
  std::vector<double> c(faces(), 0.0);
  for (std::size_t j = 0; j < faces(); ++j) {
    const double* col = n_.data() + j * m_;
    double s = 0.0;
    for (std::size_t i = 0; i < m_; ++i) s += col[i] * x[i];
    c[j] = s;
  }
  return c;
}

std::vector<std::size_t> HalfSpaceRegion::violated(const std::vector<double>& x) const {
  const auto c = project(x);
  std::vector<std::size_t> out;
  for (std::size_t j = 0; j < c.size(); ++j)
    if (!(c[j] <= distances_[j])) out.push_back(j);
  return out;
}

HalfSpaceRegion HalfSpaceRegion::with_face(const std::vector<double>& unit_normal,
                                           double distance) const {
  std::vector<std::vector<double>> normals;
  for (std::size_t j = 0; j < faces(); ++j) normals.push_back(normal(j));
  normals.push_back(unit_normal);
  auto d = distances_;
  d.push_back(distance);
  return HalfSpaceRegion(normals, std::move(d));
}

}  // namespace vcit::checks
