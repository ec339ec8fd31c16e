#pragma once

#include <Eigen/Core>

#include <array>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

namespace lrp {

template <typename Scalar>
using Point2 = Eigen::Matrix<Scalar, 2, 1>;
template <typename Scalar>
using Point3 = Eigen::Matrix<Scalar, 3, 1>;

using Point2d = Point2<double>;
using Point3d = Point3<double>;

/// Number of distinguishable reflector types.
inline constexpr int kNumTypes = 2;

class InvalidLayout : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct Room {
  double width = 5.0;
  double depth = 5.0;
  double height = 4.0;

  void validate() const;
  bool contains(const Point2d& p, double margin = 0.0) const {
    return p.x() >= margin && p.x() <= width - margin && p.y() >= margin && p.y() <= depth - margin;
  }
  Point2d center() const { return {0.5 * width, 0.5 * depth}; }
};

struct Lrp {
  Point3d position = Point3d::Zero();
  int type = 0;
  double rcs = 1.0;

  Point2d planar() const { return position.head<2>(); }
};

struct LrpLayout {
  std::vector<Lrp> lrps;
  double radar_height = 0.0;

  std::size_t size() const { return lrps.size(); }
  int count_of_type(int type) const;
  /// Throws InvalidLayout if a reflector leaves the room or has a bad type/RCS.
  void validate(const Room& room, bool require_coplanar = true) const;
};

/// Heading wrapped to [-pi, pi).
template <typename Scalar>
Scalar wrap_angle(Scalar a) {
  constexpr Scalar two_pi = Scalar(2) * std::numbers::pi_v<Scalar>;
  a = std::fmod(a + std::numbers::pi_v<Scalar>, two_pi);
  if (a < Scalar(0)) a += two_pi;
  return a - std::numbers::pi_v<Scalar>;
}

struct Pose {
  double x = 0.0;
  double y = 0.0;
  double theta = 0.0;

  Pose() = default;
  Pose(double x_, double y_, double theta_ = 0.0) : x(x_), y(y_), theta(wrap_angle(theta_)) {}
  Point2d position() const { return {x, y}; }
};

/// Per-type distance lists, each sorted ascending.
struct Fingerprint {
  std::array<std::vector<double>, kNumTypes> distances;

  std::size_t total() const { return distances[0].size() + distances[1].size(); }
  /// Type 0 followed by type 1.
  Eigen::VectorXd concatenated() const;
  void sort();
  bool operator==(const Fingerprint&) const = default;
};

struct QuantizedFingerprint {
  std::array<std::vector<int>, kNumTypes> bins;
  double bin_width = 0.0;

  std::vector<int> key() const;
  bool operator==(const QuantizedFingerprint&) const = default;
};

template <typename DerivedA, typename DerivedB>
auto planar_distance(const Eigen::MatrixBase<DerivedA>& a, const Eigen::MatrixBase<DerivedB>& b) {
  return (a.template head<2>() - b.template head<2>()).norm();
}

/// Range from a radar mounted at `radar_height` above the pose to the reflector.
template <typename Scalar>
Scalar slant_distance(const Point3<Scalar>& lrp, const Point2<Scalar>& radar_xy, Scalar radar_height) {
  const Scalar dx = radar_xy.x() - lrp.x();
  const Scalar dy = radar_xy.y() - lrp.y();
  const Scalar dz = radar_height - lrp.z();
  return std::sqrt(dx * dx + dy * dy + dz * dz);
}

inline double slant_distance(const Lrp& lrp, const Pose& pose, double radar_height) {
  return slant_distance<double>(lrp.position, pose.position(), radar_height);
}

Fingerprint fingerprint(const LrpLayout& layout, const Point2d& position);
inline Fingerprint fingerprint(const LrpLayout& layout, const Pose& pose) {
  return fingerprint(layout, pose.position());
}

/// Same as fingerprint() but with the reflector heights dropped (xy-plane distances).
Fingerprint planar_fingerprint(const LrpLayout& layout, const Point2d& position);

QuantizedFingerprint quantize(const Fingerprint& fp, double bin_width);

/// Bin centers (i + 0.5) * bin_width of a quantized fingerprint.
Fingerprint bin_centers(const QuantizedFingerprint& q);

}  // namespace lrp
