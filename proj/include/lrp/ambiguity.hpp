#pragma once

#include "lrp/geometry.hpp"

#include <array>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace lrp {

class DegenerateConfiguration : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class SearchExhausted : public std::runtime_error {
 public:
  SearchExhausted(int candidates, const std::string& what) : std::runtime_error(what), candidates_(candidates) {}
  int candidates() const { return candidates_; }

 private:
  int candidates_;
};

/// Two distinct planar positions whose fingerprints agree within the scan tolerance.
struct AmbiguityPair {
  Point2d p;
  Point2d q;
  double distance_gap = 0.0;
};

struct AmbiguityLine {
  Point2d anchor;
  Point2d direction;  // unit length
};

template <typename Scalar>
Point2<Scalar> reflect_across_line(const Point2<Scalar>& p, const Point2<Scalar>& on_line, const Point2<Scalar>& dir) {
  const Point2<Scalar> u = dir.normalized();
  const Point2<Scalar> rel = p - on_line;
  return on_line + Scalar(2) * rel.dot(u) * u - rel;
}

template <typename Scalar>
Scalar distance_to_line(const Point2<Scalar>& p, const Point2<Scalar>& on_line, const Point2<Scalar>& dir) {
  const Point2<Scalar> u = dir.normalized();
  const Point2<Scalar> rel = p - on_line;
  return std::abs(rel.x() * u.y() - rel.y() * u.x());
}

/// Reflections of `p` across the line through both reflectors, across their
/// perpendicular bisector, and through their midpoint (in that order).
/// Points on an axis produce duplicates; see distinct_mirror_ambiguities().
std::array<Point2d, 3> mirror_ambiguities(const Point2d& lrp_a, const Point2d& lrp_b, const Point2d& p);

/// mirror_ambiguities() without duplicates and without `p` itself.
std::vector<Point2d> distinct_mirror_ambiguities(const Point2d& lrp_a, const Point2d& lrp_b, const Point2d& p,
                                                 double eps = 1e-9);

/// Ambiguity lines of three same-type reflectors for the pairs (1,2), (1,3), (2,3).
std::array<AmbiguityLine, 3> three_lrp_ambiguity_lines(const Point2d& l1, const Point2d& l2, const Point2d& l3);

/// Smallest distance between a symmetry axis of a same-type pair and the
/// midpoint of the complementary pair, over all pairs that must be checked.
/// Requires 4 reflectors, either one type or two of each.
double four_lrp_clearance(const LrpLayout& layout);

/// True iff no checked symmetry axis passes within `eps` of the complementary midpoint.
bool four_lrp_condition(const LrpLayout& layout, double eps = 1e-6);

struct ScanSettings {
  double grid_step = 0.05;
  double tol = 0.0375;
};

/// Exhaustive grid search for fingerprint collisions in the xy-plane.
/// Pairs closer than 2 grid steps are suppressed. Output is sorted with p < q
/// lexicographically.
std::vector<AmbiguityPair> brute_force_scan(const LrpLayout& layout, const Room& room, const ScanSettings& scan = {});

struct LayoutConstraints {
  double wall_clearance = 0.25;
  double min_spacing = 1.0;
  /// Minimum axis-to-midpoint clearance demanded of accepted candidates.
  double axis_margin = 0.30;
  double mount_height = 3.0;
  std::array<double, kNumTypes> rcs{1.0, 4.0};
};

struct LayoutSearchResult {
  LrpLayout layout;
  std::vector<AmbiguityPair> ambiguities;
  int candidates = 0;
  int accepted = 0;
};

/// Random search over `n_candidates` layouts; returns the accepted layout with
/// the fewest scan pairs. Deterministic for a given seed.
LayoutSearchResult generate_layout(const Room& room, int n_lrps, int n_types, int n_candidates,
                                   const LayoutConstraints& constraints, std::uint64_t seed,
                                   const ScanSettings& scan = {}, double radar_height = 0.0);

}  // namespace lrp
