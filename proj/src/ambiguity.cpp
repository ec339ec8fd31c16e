#include "lrp/ambiguity.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <random>
#include <tuple>
#include <utility>

namespace lrp {

std::array<Point2d, 3> mirror_ambiguities(const Point2d& lrp_a, const Point2d& lrp_b, const Point2d& p) {
  if ((lrp_a - lrp_b).norm() == 0.0) throw DegenerateConfiguration("mirror_ambiguities: reflectors coincide");
  const Point2d mid = 0.5 * (lrp_a + lrp_b);
  const Point2d along = lrp_b - lrp_a;
  const Point2d across(-along.y(), along.x());
  return {reflect_across_line(p, lrp_a, along), reflect_across_line(p, mid, across), Point2d(2.0 * mid - p)};
}

std::vector<Point2d> distinct_mirror_ambiguities(const Point2d& lrp_a, const Point2d& lrp_b, const Point2d& p,
                                                 double eps) {
  std::vector<Point2d> out;
  for (const Point2d& q : mirror_ambiguities(lrp_a, lrp_b, p)) {
    if ((q - p).norm() <= eps) continue;
    if (std::any_of(out.begin(), out.end(), [&](const Point2d& r) { return (r - q).norm() <= eps; })) continue;
    out.push_back(q);
  }
  return out;
}

std::array<AmbiguityLine, 3> three_lrp_ambiguity_lines(const Point2d& l1, const Point2d& l2, const Point2d& l3) {
  const Point2d e1 = l2 - l1;
  const Point2d e2 = l3 - l1;
  const double cross = e1.x() * e2.y() - e1.y() * e2.x();
  if (std::abs(cross) <= 1e-12 * std::max(1.0, e1.squaredNorm() + e2.squaredNorm())) {
    throw DegenerateConfiguration("three_lrp_ambiguity_lines: reflectors are collinear");
  }
  auto line = [](const Point2d& a, const Point2d& b, const Point2d& third) {
    const Point2d mid = 0.5 * (a + b);
    const Point2d to_third = third - mid;
    return AmbiguityLine{mid, Point2d(-to_third.y(), to_third.x()).normalized()};
  };
  return {line(l1, l2, l3), line(l1, l3, l2), line(l2, l3, l1)};
}

namespace {

// Min distance from the midpoint of (c,d) to either symmetry axis of (a,b).
double axis_clearance(const Point2d& a, const Point2d& b, const Point2d& c, const Point2d& d) {
  const Point2d mid_ab = 0.5 * (a + b);
  const Point2d mid_cd = 0.5 * (c + d);
  const Point2d along = b - a;
  if (along.norm() == 0.0) return 0.0;
  const Point2d across(-along.y(), along.x());
  return std::min(distance_to_line(mid_cd, a, along), distance_to_line(mid_cd, mid_ab, across));
}

}  // namespace

double four_lrp_clearance(const LrpLayout& layout) {
  if (layout.size() != 4) throw InvalidLayout("four-reflector condition needs exactly 4 reflectors");
  const int n0 = layout.count_of_type(0);
  std::array<Point2d, 4> pts;
  for (std::size_t i = 0; i < 4; ++i) pts[i] = layout.lrps[i].planar();

  if (n0 == 0 || n0 == 4) {
    // All six pairs, each against its complement.
    constexpr std::array<std::array<int, 4>, 6> combos{{{0, 1, 2, 3},
                                                       {2, 3, 0, 1},
                                                       {0, 2, 1, 3},
                                                       {1, 3, 0, 2},
                                                       {0, 3, 1, 2},
                                                       {1, 2, 0, 3}}};
    double best = std::numeric_limits<double>::infinity();
    for (const auto& c : combos) best = std::min(best, axis_clearance(pts[c[0]], pts[c[1]], pts[c[2]], pts[c[3]]));
    return best;
  }
  if (n0 != 2) throw InvalidLayout("two-type layouts need exactly two reflectors per type");

  std::array<int, 2> t0{};
  std::array<int, 2> t1{};
  int i0 = 0;
  int i1 = 0;
  for (int i = 0; i < 4; ++i) {
    if (layout.lrps[static_cast<std::size_t>(i)].type == 0) {
      t0[static_cast<std::size_t>(i0++)] = i;
    } else {
      t1[static_cast<std::size_t>(i1++)] = i;
    }
  }
  const auto& P = pts;
  return std::min(axis_clearance(P[t0[0]], P[t0[1]], P[t1[0]], P[t1[1]]),
                  axis_clearance(P[t1[0]], P[t1[1]], P[t0[0]], P[t0[1]]));
}

bool four_lrp_condition(const LrpLayout& layout, double eps) { return four_lrp_clearance(layout) > eps; }

std::vector<AmbiguityPair> brute_force_scan(const LrpLayout& layout, const Room& room, const ScanSettings& scan) {
  if (!(scan.grid_step > 0.0) || !(scan.tol > 0.0)) throw std::invalid_argument("scan step and tolerance must be positive");
  const auto nx = static_cast<int>(std::floor(room.width / scan.grid_step + 1e-9)) + 1;
  const auto ny = static_cast<int>(std::floor(room.depth / scan.grid_step + 1e-9)) + 1;
  const auto m = static_cast<Eigen::Index>(layout.size());
  const Eigen::Index n = static_cast<Eigen::Index>(nx) * ny;

  Eigen::Matrix2Xd pos(2, n);
  Eigen::MatrixXd fps(m, n);
  for (int ix = 0; ix < nx; ++ix) {
    for (int iy = 0; iy < ny; ++iy) {
      const Eigen::Index k = static_cast<Eigen::Index>(ix) * ny + iy;
      pos.col(k) = Point2d(ix * scan.grid_step, iy * scan.grid_step);
      fps.col(k) = planar_fingerprint(layout, Point2d(pos.col(k))).concatenated();
    }
  }

  // Sweep in order of the first fingerprint element; only a tol-wide window can match.
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) { return fps(0, a) < fps(0, b); });

  const double min_sep2 = 4.0 * scan.grid_step * scan.grid_step;
  std::vector<AmbiguityPair> pairs;
  for (std::size_t a = 0; a < order.size(); ++a) {
    const Eigen::Index i = order[a];
    for (std::size_t b = a + 1; b < order.size(); ++b) {
      const Eigen::Index j = order[b];
      if (fps(0, j) - fps(0, i) > scan.tol) break;
      const double gap = (fps.col(i) - fps.col(j)).cwiseAbs().maxCoeff();
      if (gap > scan.tol) continue;
      if ((pos.col(i) - pos.col(j)).squaredNorm() <= min_sep2) continue;
      Point2d p = pos.col(i);
      Point2d q = pos.col(j);
      if (std::tie(q.x(), q.y()) < std::tie(p.x(), p.y())) std::swap(p, q);
      pairs.push_back({p, q, gap});
    }
  }
  std::sort(pairs.begin(), pairs.end(), [](const AmbiguityPair& l, const AmbiguityPair& r) {
    return std::tie(l.p.x(), l.p.y(), l.q.x(), l.q.y()) < std::tie(r.p.x(), r.p.y(), r.q.x(), r.q.y());
  });
  return pairs;
}

namespace {

bool satisfies_spacing(const std::vector<Lrp>& lrps, double min_spacing) {
  for (std::size_t i = 0; i < lrps.size(); ++i) {
    for (std::size_t j = i + 1; j < lrps.size(); ++j) {
      if ((lrps[i].planar() - lrps[j].planar()).norm() < min_spacing) return false;
    }
  }
  return true;
}

}  // namespace

LayoutSearchResult generate_layout(const Room& room, int n_lrps, int n_types, int n_candidates,
                                   const LayoutConstraints& constraints, std::uint64_t seed, const ScanSettings& scan,
                                   double radar_height) {
  room.validate();
  if (n_lrps != 4) throw std::invalid_argument("generate_layout supports exactly 4 reflectors");
  if (n_types != 1 && n_types != 2) throw std::invalid_argument("generate_layout supports 1 or 2 reflector types");
  if (n_candidates < 1) throw std::invalid_argument("generate_layout needs at least one candidate");
  if (2.0 * constraints.wall_clearance >= std::min(room.width, room.depth)) {
    throw std::invalid_argument("wall clearance leaves no room for reflectors");
  }

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> ux(constraints.wall_clearance, room.width - constraints.wall_clearance);
  std::uniform_real_distribution<double> uy(constraints.wall_clearance, room.depth - constraints.wall_clearance);

  LayoutSearchResult best;
  best.candidates = n_candidates;
  bool found = false;
  for (int c = 0; c < n_candidates; ++c) {
    LrpLayout candidate;
    candidate.radar_height = radar_height;
    for (int i = 0; i < n_lrps; ++i) {
      const int type = n_types == 2 ? i / 2 : 0;
      const double x = ux(rng);
      const double y = uy(rng);
      candidate.lrps.push_back({Point3d(x, y, constraints.mount_height), type, constraints.rcs[static_cast<std::size_t>(type)]});
    }
    if (!satisfies_spacing(candidate.lrps, constraints.min_spacing)) continue;
    if (four_lrp_clearance(candidate) <= std::max(constraints.axis_margin, 1e-6)) continue;
    ++best.accepted;
    auto pairs = brute_force_scan(candidate, room, scan);
    if (!found || pairs.size() < best.ambiguities.size()) {
      best.layout = std::move(candidate);
      best.ambiguities = std::move(pairs);
      found = true;
    }
  }
  if (!found) {
    throw SearchExhausted(n_candidates, "no candidate out of " + std::to_string(n_candidates) +
                                            " satisfied the placement constraints");
  }
  return best;
}

}  // namespace lrp
