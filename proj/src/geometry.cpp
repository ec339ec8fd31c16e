#include "lrp/geometry.hpp"

#include <algorithm>

namespace lrp {

void Room::validate() const {
  if (!(width > 0.0) || !(depth > 0.0) || !(height > 0.0)) {
    throw InvalidLayout("room dimensions must be positive");
  }
}

int LrpLayout::count_of_type(int type) const {
  return static_cast<int>(std::count_if(lrps.begin(), lrps.end(), [type](const Lrp& l) { return l.type == type; }));
}

void LrpLayout::validate(const Room& room, bool require_coplanar) const {
  room.validate();
  if (lrps.empty()) throw InvalidLayout("layout needs at least one reflector");
  if (radar_height < 0.0 || radar_height > room.height) throw InvalidLayout("radar height outside room");
  for (std::size_t i = 0; i < lrps.size(); ++i) {
    const Lrp& l = lrps[i];
    const std::string where = "lrps[" + std::to_string(i) + "]";
    if (l.type < 0 || l.type >= kNumTypes) throw InvalidLayout(where + ": type must be 0 or 1");
    if (!(l.rcs > 0.0)) throw InvalidLayout(where + ": rcs must be positive");
    if (!room.contains(l.planar()) || l.position.z() < 0.0 || l.position.z() > room.height) {
      throw InvalidLayout(where + ": position outside room");
    }
    if (require_coplanar && std::abs(l.position.z() - lrps.front().position.z()) > 1e-9) {
      throw InvalidLayout(where + ": reflectors must share a mounting height");
    }
  }
}

Eigen::VectorXd Fingerprint::concatenated() const {
  Eigen::VectorXd out(static_cast<Eigen::Index>(total()));
  Eigen::Index k = 0;
  for (const auto& list : distances) {
    for (double d : list) out(k++) = d;
  }
  return out;
}

void Fingerprint::sort() {
  for (auto& list : distances) std::sort(list.begin(), list.end());
}

std::vector<int> QuantizedFingerprint::key() const {
  // Type lists are separated by -1 so that {a}{b,c} and {a,b}{c} differ.
  std::vector<int> k;
  k.reserve(bins[0].size() + bins[1].size() + 1);
  k.insert(k.end(), bins[0].begin(), bins[0].end());
  k.push_back(-1);
  k.insert(k.end(), bins[1].begin(), bins[1].end());
  return k;
}

namespace {

template <typename DistanceFn>
Fingerprint make_fingerprint(const LrpLayout& layout, DistanceFn&& distance) {
  Fingerprint fp;
  for (const Lrp& l : layout.lrps) fp.distances[static_cast<std::size_t>(l.type)].push_back(distance(l));
  fp.sort();
  return fp;
}

}  // namespace

Fingerprint fingerprint(const LrpLayout& layout, const Point2d& position) {
  return make_fingerprint(layout, [&](const Lrp& l) {
    return slant_distance<double>(l.position, position, layout.radar_height);
  });
}

Fingerprint planar_fingerprint(const LrpLayout& layout, const Point2d& position) {
  return make_fingerprint(layout, [&](const Lrp& l) { return planar_distance(l.position, position); });
}

QuantizedFingerprint quantize(const Fingerprint& fp, double bin_width) {
  if (!(bin_width > 0.0)) throw std::invalid_argument("bin width must be positive");
  QuantizedFingerprint q;
  q.bin_width = bin_width;
  for (std::size_t t = 0; t < fp.distances.size(); ++t) {
    auto& bins = q.bins[t];
    bins.reserve(fp.distances[t].size());
    for (double d : fp.distances[t]) bins.push_back(static_cast<int>(std::floor(d / bin_width)));
  }
  return q;
}

Fingerprint bin_centers(const QuantizedFingerprint& q) {
  Fingerprint fp;
  for (std::size_t t = 0; t < q.bins.size(); ++t) {
    for (int i : q.bins[t]) fp.distances[t].push_back((i + 0.5) * q.bin_width);
  }
  return fp;
}

}  // namespace lrp
