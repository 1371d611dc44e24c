#include "bohm/domain.hpp"

#include <algorithm>
#include <limits>

namespace bohm {

PhysicalParams::PhysicalParams(double hbar, std::vector<double> masses, std::size_t nu)
    : hbar_(hbar), masses_(std::move(masses)), nu_(nu) {
  require(hbar_ > 0.0 && std::isfinite(hbar_), ErrorCode::InvalidArgument, "hbar must be > 0");
  require(!masses_.empty() && nu_ >= 1, ErrorCode::InvalidArgument,
          "need at least one particle and nu >= 1");
  for (double m : masses_) {
    require(m > 0.0 && std::isfinite(m), ErrorCode::InvalidArgument, "masses must be > 0");
  }
  require(dim() <= kMaxDim, ErrorCode::InvalidArgument, "configuration dimension exceeds kMaxDim");
}

PhysicalParams PhysicalParams::unit(std::size_t dim) { return PhysicalParams(1.0, {1.0}, dim); }

double PhysicalParams::mu() const {
  return hbar_ / *std::min_element(masses_.begin(), masses_.end());
}

SingularHyperplane::SingularHyperplane(std::array<RealVec, 3> normals,
                                       std::array<double, 3> offset)
    : normals_(std::move(normals)), offset_(offset) {
  const std::size_t d = normals_[0].size();
  require(d >= 3, ErrorCode::InvalidArgument, "singular hyperplanes need d >= 3");
  for (int i = 0; i < 3; ++i) {
    require(normals_[i].size() == d, ErrorCode::InvalidArgument, "normals differ in dimension");
    for (int j = 0; j < 3; ++j) {
      const double expected = i == j ? 1.0 : 0.0;
      require(std::abs(dot(view(normals_[i]), view(normals_[j])) - expected) <= 1e-12,
              ErrorCode::InvalidArgument, "hyperplane normals must be orthonormal");
    }
  }
}

std::array<double, 3> SingularHyperplane::relative(std::span<const double> q) const {
  std::array<double, 3> y{};
  for (int i = 0; i < 3; ++i) y[i] = dot(view(normals_[i]), q) - offset_[i];
  return y;
}

double SingularHyperplane::distance(std::span<const double> q) const {
  const auto y = relative(q);
  return std::sqrt(y[0] * y[0] + y[1] * y[1] + y[2] * y[2]);
}

RealVec SingularHyperplane::anchor() const {
  RealVec p(dim(), 0.0);
  for (int i = 0; i < 3; ++i) {
    for (std::size_t k = 0; k < p.size(); ++k) p[k] += offset_[i] * normals_[i][k];
  }
  return p;
}

DomainSpec::DomainSpec(std::size_t dim, std::vector<SingularHyperplane> hyperplanes,
                       std::optional<PeriodicBox> periodic)
    : dim_(dim), hyperplanes_(std::move(hyperplanes)), periodic_(periodic) {
  require(dim_ >= 1 && dim_ <= kMaxDim, ErrorCode::InvalidArgument, "bad configuration dimension");
  require(dim_ >= 3 || hyperplanes_.empty(), ErrorCode::InvalidArgument,
          "d < 3 admits no singular hyperplanes");
  for (const auto& h : hyperplanes_) {
    require(h.dim() == dim_, ErrorCode::InvalidArgument, "hyperplane dimension mismatch");
  }
  if (periodic_) {
    require(periodic_->hi > periodic_->lo, ErrorCode::InvalidArgument, "empty periodic box");
  }
}

void StoppingRegions::validate(const DomainSpec& spec) const {
  require(epsilon > 0.0, ErrorCode::InvalidArgument, "epsilon must be > 0");
  require(n > 0.0, ErrorCode::InvalidArgument, "ball radius n must be > 0");
  require(horizon > 0.0, ErrorCode::InvalidArgument, "horizon T must be > 0");
  require(delta.size() == spec.hyperplanes().size(), ErrorCode::InvalidArgument,
          "delta needs one radius per singular hyperplane");
  for (double d : delta) require(d > 0.0, ErrorCode::InvalidArgument, "delta entries must be > 0");
}

std::string_view to_string(RegionClass c) {
  switch (c) {
    case RegionClass::Interior: return "Interior";
    case RegionClass::NodeRegion: return "NodeRegion";
    case RegionClass::SingularRegion: return "SingularRegion";
    case RegionClass::OutsideBall: return "OutsideBall";
  }
  return "Unknown";
}

SingularDistances dist_to_singular(const DomainSpec& spec, std::span<const double> q) {
  SingularDistances out;
  out.minimum = std::numeric_limits<double>::infinity();
  out.per_plane.reserve(spec.hyperplanes().size());
  for (const auto& h : spec.hyperplanes()) {
    const double d = h.distance(q);
    out.per_plane.push_back(d);
    out.minimum = std::min(out.minimum, d);
  }
  return out;
}

RegionClass classify(const DomainSpec& spec, const PhysicalParams& /*params*/,
                     const StoppingRegions& regions, std::span<const double> q, double /*t*/,
                     double psi_abs) {
  const auto& planes = spec.hyperplanes();
  require(regions.delta.size() >= planes.size(), ErrorCode::InvalidArgument,
          "delta shorter than hyperplane list");
  for (std::size_t l = 0; l < planes.size(); ++l) {
    if (planes[l].distance(q) <= regions.delta[l]) return RegionClass::SingularRegion;
  }
  double r = norm(q);
  if (const auto& box = spec.periodic()) {
    // Ball membership is decided on the representative inside the periodic box.
    const double w = box->hi - box->lo;
    double s = 0.0;
    for (double x : q) {
      const double y = x - w * std::floor((x - box->lo) / w);
      s += y * y;
    }
    r = std::sqrt(s);
  }
  if (r >= regions.n) return RegionClass::OutsideBall;
  if (psi_abs <= regions.epsilon) return RegionClass::NodeRegion;
  return RegionClass::Interior;
}

}  // namespace bohm
