#include "bohm/propagator.hpp"

#include "fft_detail.hpp"

#include <algorithm>
#include <numbers>

namespace bohm {

namespace {

constexpr Complex kI{0.0, 1.0};

}  // namespace

GridBackedModel::GridBackedModel(std::shared_ptr<const FrameStore> frames, Potential potential)
    : frames_(std::move(frames)), potential_(std::move(potential)) {
  require(frames_ != nullptr, ErrorCode::InvalidArgument, "null frame store");
  frames_->grid.validate();
  require(!frames_->times.empty(), ErrorCode::InsufficientFrames, "frame store holds no frames");
  require(frames_->psi.size() == frames_->times.size() &&
              frames_->dpsi_dt.size() == frames_->times.size(),
          ErrorCode::InvalidArgument, "frame store arrays disagree in length");
  comp_ = frames_->grid.computational();
  for (std::size_t i = 0; i < frames_->times.size(); ++i) {
    auto p = frames_->psi[i];
    auto d = frames_->dpsi_dt[i];
    require(p.size() == comp_.size() && d.size() == comp_.size(), ErrorCode::InvalidArgument,
            "frame size differs from the grid");
    detail::fft_forward(comp_.points, p);
    detail::fft_forward(comp_.points, d);
    const double scale = 1.0 / static_cast<double>(comp_.size());
    for (auto& z : p) z *= scale;
    for (auto& z : d) z *= scale;
    psi_hat_.push_back(std::move(p));
    dpsi_hat_.push_back(std::move(d));
  }
}

void GridBackedModel::spectral_sum(const std::vector<Complex>& hat, std::span<const double> q,
                                   Complex& value, ComplexVec* grad) const {
  const std::size_t d = comp_.dim();
  // Per-axis factors e^{i k (x - lo)}, the Nyquist mode split evenly between +-k.
  std::vector<std::vector<Complex>> e(d), de(d);
  for (std::size_t a = 0; a < d; ++a) {
    const std::size_t n = comp_.points[a];
    const double length = comp_.hi[a] - comp_.lo[a];
    const double x = q[a] - comp_.lo[a];
    e[a].resize(n);
    de[a].resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      const long j = static_cast<long>(i) < static_cast<long>(n / 2) ? static_cast<long>(i)
                                                                     : static_cast<long>(i) - static_cast<long>(n);
      const double k = 2.0 * std::numbers::pi * static_cast<double>(j) / length;
      if (n % 2 == 0 && i == n / 2) {
        e[a][i] = std::cos(k * x);
        de[a][i] = -k * std::sin(k * x);
      } else {
        e[a][i] = std::polar(1.0, k * x);
        de[a][i] = kI * k * e[a][i];
      }
    }
  }
  value = {};
  if (grad) grad->assign(d, Complex{});
  std::vector<std::size_t> idx(d, 0);
  for (std::size_t flat = 0; flat < hat.size(); ++flat) {
    Complex prod = hat[flat];
    for (std::size_t a = 0; a < d; ++a) prod *= e[a][idx[a]];
    value += prod;
    if (grad) {
      for (std::size_t a = 0; a < d; ++a) {
        Complex g = hat[flat] * de[a][idx[a]];
        for (std::size_t b = 0; b < d; ++b) {
          if (b != a) g *= e[b][idx[b]];
        }
        (*grad)[a] += g;
      }
    }
    for (std::size_t a = d; a-- > 0;) {
      if (++idx[a] < comp_.points[a]) break;
      idx[a] = 0;
    }
  }
}

WavefieldSample GridBackedModel::evaluate(std::span<const double> q, double t) const {
  const auto& grid = frames_->grid;
  require(q.size() == grid.dim(), ErrorCode::InvalidArgument, "query dimension mismatch");
  RealVec x = to_vec(q);
  for (std::size_t a = 0; a < grid.dim(); ++a) {
    if (grid.boundary == GridBoundary::Periodic) {
      const double length = grid.hi[a] - grid.lo[a];
      x[a] = grid.lo[a] + (x[a] - grid.lo[a]) - length * std::floor((x[a] - grid.lo[a]) / length);
    } else if (!(x[a] >= grid.lo[a] && x[a] <= grid.hi[a])) {
      fail(ErrorCode::OutOfDomain, "grid-backed query outside the stored box");
    }
  }
  const auto& times = frames_->times;
  const double slack = 1e-12 * std::max(1.0, std::abs(times.back()));
  if (!(t >= times.front() - slack && t <= times.back() + slack)) {
    fail(ErrorCode::OutOfDomain, "grid-backed query outside the stored time range");
  }

  std::vector<Complex> value_hat, rate_hat;
  if (times.size() == 1) {
    value_hat = psi_hat_[0];
    rate_hat = dpsi_hat_[0];
  } else {
    auto it = std::upper_bound(times.begin(), times.end(), t);
    std::size_t i = it == times.begin() ? 0 : static_cast<std::size_t>(it - times.begin()) - 1;
    i = std::min(i, times.size() - 2);
    const double h = times[i + 1] - times[i];
    const double s = std::clamp((t - times[i]) / h, 0.0, 1.0);
    const double s2 = s * s, s3 = s2 * s;
    const double h00 = 2 * s3 - 3 * s2 + 1, h10 = s3 - 2 * s2 + s;
    const double h01 = -2 * s3 + 3 * s2, h11 = s3 - s2;
    const double d00 = (6 * s2 - 6 * s) / h, d10 = 3 * s2 - 4 * s + 1;
    const double d01 = (-6 * s2 + 6 * s) / h, d11 = 3 * s2 - 2 * s;
    const auto& p0 = psi_hat_[i];
    const auto& p1 = psi_hat_[i + 1];
    const auto& r0 = dpsi_hat_[i];
    const auto& r1 = dpsi_hat_[i + 1];
    value_hat.resize(p0.size());
    rate_hat.resize(p0.size());
    for (std::size_t k = 0; k < p0.size(); ++k) {
      value_hat[k] = h00 * p0[k] + h * h10 * r0[k] + h01 * p1[k] + h * h11 * r1[k];
      rate_hat[k] = d00 * p0[k] + d10 * r0[k] + d01 * p1[k] + d11 * r1[k];
    }
  }
  WavefieldSample out;
  spectral_sum(value_hat, view(x), out.psi, &out.grad);
  spectral_sum(rate_hat, view(x), out.dpsi_dt, nullptr);
  out.abs2 = std::norm(out.psi);
  return out;
}

Box GridBackedModel::mass_box(double) const {
  const auto& grid = frames_->grid;
  return Box{grid.lo, grid.hi};
}

std::optional<double> GridBackedModel::potential(std::span<const double> q) const {
  if (!potential_) return std::nullopt;
  return potential_(q);
}

}  // namespace bohm
