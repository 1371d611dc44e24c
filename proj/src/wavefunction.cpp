#include "bohm/wavefunction.hpp"

#include <algorithm>
#include <numbers>

namespace bohm {

using std::numbers::pi;

namespace {

constexpr Complex kI{0.0, 1.0};

}  // namespace

std::string_view to_string(SamplingMethod m) {
  switch (m) {
    case SamplingMethod::InverseCdf: return "inverse_cdf";
    case SamplingMethod::Rejection: return "rejection";
    case SamplingMethod::Metropolis: return "metropolis";
  }
  return "unknown";
}

SamplingMethod WavefunctionModel::sampling_method() const {
  if (dim() == 1) return SamplingMethod::InverseCdf;
  if (envelope()) return SamplingMethod::Rejection;
  return SamplingMethod::Metropolis;
}

// ---------------------------------------------------------------------------
// Harmonic oscillator superpositions

void hermite_functions(double q, std::size_t count, std::vector<double>& phi,
                       std::vector<double>& dphi) {
  phi.assign(count + 1, 0.0);
  dphi.assign(count, 0.0);
  phi[0] = std::pow(pi, -0.25) * std::exp(-0.5 * q * q);
  if (count >= 1) phi[1] = std::sqrt(2.0) * q * phi[0];
  for (std::size_t k = 1; k < count; ++k) {
    const double kk = static_cast<double>(k);
    phi[k + 1] = std::sqrt(2.0 / (kk + 1.0)) * q * phi[k] - std::sqrt(kk / (kk + 1.0)) * phi[k - 1];
  }
  for (std::size_t k = 0; k < count; ++k) {
    const double kk = static_cast<double>(k);
    const double lower = k > 0 ? std::sqrt(kk / 2.0) * phi[k - 1] : 0.0;
    dphi[k] = lower - std::sqrt((kk + 1.0) / 2.0) * phi[k + 1];
  }
  phi.resize(count);
}

HermiteSuperposition1D::HermiteSuperposition1D(std::vector<Complex> coefficients)
    : coefficients_(std::move(coefficients)) {
  require(!coefficients_.empty(), ErrorCode::InvalidArgument, "need at least one coefficient");
  // Normalize by quadrature of |psi_0|^2 over the mass box.
  const Box box = mass_box(0.0);
  std::vector<double> x, w, phi, dphi;
  composite_gauss(box.lo[0], box.hi[0], 400, 12, x, w);
  double norm2 = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    hermite_functions(x[i], coefficients_.size(), phi, dphi);
    Complex s{};
    for (std::size_t k = 0; k < coefficients_.size(); ++k) s += coefficients_[k] * phi[k];
    norm2 += w[i] * std::norm(s);
  }
  require(norm2 > 0.0, ErrorCode::InvalidArgument, "state has zero norm");
  norm_constant_ = 1.0 / std::sqrt(norm2);
  for (auto& c : coefficients_) c *= norm_constant_;
}

std::shared_ptr<HermiteSuperposition1D> HermiteSuperposition1D::ground_plus_second() {
  const double a = std::pow(pi, 0.25);
  return std::make_shared<HermiteSuperposition1D>(
      std::vector<Complex>{a, 0.0, -std::sqrt(2.0) * a});
}

WavefieldSample HermiteSuperposition1D::evaluate(std::span<const double> q, double t) const {
  thread_local std::vector<double> phi, dphi;
  hermite_functions(q[0], coefficients_.size(), phi, dphi);
  WavefieldSample s;
  Complex grad{};
  for (std::size_t k = 0; k < coefficients_.size(); ++k) {
    const double energy = static_cast<double>(k) + 0.5;
    const Complex c = coefficients_[k] * std::polar(1.0, -energy * t);
    s.psi += c * phi[k];
    grad += c * dphi[k];
    s.dpsi_dt += -kI * energy * c * phi[k];
  }
  s.grad.push_back(grad);
  s.abs2 = std::norm(s.psi);
  return s;
}

Box HermiteSuperposition1D::mass_box(double) const {
  const double L = std::sqrt(2.0 * static_cast<double>(coefficients_.size()) + 1.0) + 9.0;
  return Box{{-L}, {L}};
}

// ---------------------------------------------------------------------------
// Free Gaussian packet

FreeGaussianPacket::FreeGaussianPacket(PhysicalParams params, double sigma0, RealVec center,
                                       RealVec momentum)
    : params_(std::move(params)),
      sigma0_(sigma0),
      center_(std::move(center)),
      momentum_(std::move(momentum)) {
  require(sigma0_ > 0.0, ErrorCode::InvalidArgument, "sigma0 must be > 0");
  require(center_.size() == params_.dim() && momentum_.size() == params_.dim(),
          ErrorCode::InvalidArgument, "center/momentum dimension must match params");
}

WavefieldSample FreeGaussianPacket::evaluate(std::span<const double> q, double t) const {
  const double hbar = params_.hbar();
  const double s2 = sigma0_ * sigma0_;
  Complex log_psi{};
  Complex dlog_dt{};
  ComplexVec dlog_dx;
  for (std::size_t a = 0; a < center_.size(); ++a) {
    const double m = params_.mass_of_axis(a);
    const double k0 = momentum_[a] / hbar;
    const double v = momentum_[a] / m;
    const Complex alpha{s2, hbar * t / m};
    const Complex alpha_dot{0.0, hbar / m};
    const double xi = q[a] - center_[a] - v * t;
    log_psi += -0.25 * std::log(pi * s2) + 0.5 * std::log(s2 / alpha) - xi * xi / (2.0 * alpha) +
               kI * k0 * (q[a] - center_[a]) - kI * hbar * k0 * k0 * t / (2.0 * m);
    dlog_dx.push_back(-xi / alpha + kI * k0);
    dlog_dt += -0.5 * alpha_dot / alpha + xi * v / alpha +
               xi * xi * alpha_dot / (2.0 * alpha * alpha) - kI * hbar * k0 * k0 / (2.0 * m);
  }
  WavefieldSample s;
  s.psi = std::exp(log_psi);
  for (const auto& g : dlog_dx) s.grad.push_back(s.psi * g);
  s.dpsi_dt = s.psi * dlog_dt;
  s.abs2 = std::norm(s.psi);
  return s;
}

double FreeGaussianPacket::spread(std::size_t axis, double t) const {
  const double m = params_.mass_of_axis(axis);
  const double alpha_abs = std::abs(Complex{sigma0_ * sigma0_, params_.hbar() * t / m});
  return alpha_abs / (std::sqrt(2.0) * sigma0_);
}

Box FreeGaussianPacket::mass_box(double t) const {
  Box box;
  for (std::size_t a = 0; a < center_.size(); ++a) {
    const double mid = center_[a] + momentum_[a] / params_.mass_of_axis(a) * t;
    const double half = 10.0 * spread(a, t);
    box.lo.push_back(mid - half);
    box.hi.push_back(mid + half);
  }
  return box;
}

std::optional<GaussianEnvelope> FreeGaussianPacket::envelope() const {
  // |psi_0|^2 is exactly N(center, sigma0^2 / 2).
  return GaussianEnvelope{center_, sigma0_ / std::sqrt(2.0), 1.0};
}

// ---------------------------------------------------------------------------
// Sum of free packets

FreeGaussianSum::FreeGaussianSum(PhysicalParams params, std::vector<Component> components,
                                 double t_ref)
    : params_(std::move(params)), components_(std::move(components)), t_ref_(t_ref) {
  require(!components_.empty(), ErrorCode::InvalidArgument, "need at least one packet");
  require(params_.dim() <= 3, ErrorCode::InvalidArgument, "packet sums are limited to d <= 3");
  for (const auto& c : components_) {
    packets_.emplace_back(params_, c.sigma0, c.center, c.momentum);
  }
  const std::size_t panels = params_.dim() == 1 ? 400 : params_.dim() == 2 ? 80 : 24;
  double mass = 0.0;
  for_each_box_node(mass_box(0.0), panels, 8, [&](std::span<const double> q, double w) {
    mass += w * evaluate(q, 0.0).abs2;
  });
  require(mass > 0.0, ErrorCode::InvalidArgument, "packet sum vanishes identically");
  norm_constant_ = 1.0 / std::sqrt(mass);
  for (auto& c : components_) c.weight *= norm_constant_;
}

WavefieldSample FreeGaussianSum::evaluate(std::span<const double> q, double t) const {
  WavefieldSample s;
  s.grad.assign(dim(), Complex{});
  for (std::size_t i = 0; i < packets_.size(); ++i) {
    const WavefieldSample p = packets_[i].evaluate(q, t - t_ref_);
    const Complex w = components_[i].weight;
    s.psi += w * p.psi;
    for (std::size_t a = 0; a < dim(); ++a) s.grad[a] += w * p.grad[a];
    s.dpsi_dt += w * p.dpsi_dt;
  }
  s.abs2 = std::norm(s.psi);
  return s;
}

Box FreeGaussianSum::mass_box(double t) const {
  Box box = packets_[0].mass_box(t - t_ref_);
  for (std::size_t i = 1; i < packets_.size(); ++i) {
    const Box b = packets_[i].mass_box(t - t_ref_);
    for (std::size_t a = 0; a < dim(); ++a) {
      box.lo[a] = std::min(box.lo[a], b.lo[a]);
      box.hi[a] = std::max(box.hi[a], b.hi[a]);
    }
  }
  return box;
}

// ---------------------------------------------------------------------------
// Circling 3D oscillator state

WavefieldSample CylindricalHO3D::evaluate(std::span<const double> q, double t) const {
  const double x = q[0], y = q[1], z = q[2];
  const Complex g = std::pow(pi, -0.75) * std::exp(-0.5 * (x * x + y * y + z * z)) *
                    std::polar(1.0, -2.5 * t);
  const Complex w{x, y};
  WavefieldSample s;
  s.psi = g * w;
  s.grad.push_back(g * (1.0 - x * w));
  s.grad.push_back(g * (kI - y * w));
  s.grad.push_back(g * (-z * w));
  s.dpsi_dt = -2.5 * kI * s.psi;
  s.abs2 = std::norm(s.psi);
  return s;
}

Box CylindricalHO3D::mass_box(double) const { return Box{{-9.0, -9.0, -9.0}, {9.0, 9.0, 9.0}}; }

std::optional<GaussianEnvelope> CylindricalHO3D::envelope() const {
  // |psi|^2 / N(0, I) = 2^{3/2} rho^2 e^{-rho^2/2} e^{-z^2/2} <= 2^{3/2} * 2/e.
  return GaussianEnvelope{RealVec{0.0, 0.0, 0.0}, 1.0, std::pow(2.0, 1.5) * 2.0 / std::numbers::e};
}

// ---------------------------------------------------------------------------
// Plane waves on the circle

PlaneWaveCircle::PlaneWaveCircle(std::vector<std::pair<int, Complex>> modes, double hbar,
                                 double mass)
    : modes_(std::move(modes)), hbar_(hbar), mass_(mass) {
  require(!modes_.empty(), ErrorCode::InvalidArgument, "need at least one mode");
  require(hbar_ > 0.0 && mass_ > 0.0, ErrorCode::InvalidArgument, "hbar and mass must be > 0");
  std::sort(modes_.begin(), modes_.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  for (std::size_t i = 1; i < modes_.size(); ++i) {
    require(modes_[i].first != modes_[i - 1].first, ErrorCode::InvalidArgument,
            "duplicate plane-wave mode");
  }
  double norm2 = 0.0;
  for (const auto& [k, c] : modes_) norm2 += std::norm(c);
  require(norm2 > 0.0, ErrorCode::InvalidArgument, "state has zero norm");
  norm_constant_ = 1.0 / std::sqrt(norm2);
  for (auto& mode : modes_) mode.second *= norm_constant_;
}

double PlaneWaveCircle::energy(int k) const {
  const double p = hbar_ * 2.0 * pi * k;
  return p * p / (2.0 * mass_);
}

WavefieldSample PlaneWaveCircle::evaluate(std::span<const double> q, double t) const {
  WavefieldSample s;
  Complex grad{};
  for (const auto& [k, c] : modes_) {
    const double wave = 2.0 * pi * k;
    const double e = energy(k);
    const Complex term = c * std::polar(1.0, wave * q[0] - e * t / hbar_);
    s.psi += term;
    grad += kI * wave * term;
    s.dpsi_dt += -kI * (e / hbar_) * term;
  }
  s.grad.push_back(grad);
  s.abs2 = std::norm(s.psi);
  return s;
}

Box PlaneWaveCircle::mass_box(double) const { return Box{{0.0}, {1.0}}; }

// ---------------------------------------------------------------------------
// Derived fields

RealVec velocity(const WavefieldSample& sample, const PhysicalParams& params) {
  if (!(sample.abs2 > kNodeFloor)) {
    fail(ErrorCode::NodeEvaluation, "velocity requested at a node (|psi|^2 below floor)");
  }
  RealVec v;
  const Complex conj_psi = std::conj(sample.psi);
  for (std::size_t a = 0; a < sample.grad.size(); ++a) {
    v.push_back(params.hbar() / params.mass_of_axis(a) *
                std::imag(conj_psi * sample.grad[a]) / sample.abs2);
  }
  return v;
}

Current current(const WavefieldSample& sample, const PhysicalParams& params) {
  Current c;
  const Complex conj_psi = std::conj(sample.psi);
  for (std::size_t a = 0; a < sample.grad.size(); ++a) {
    c.j.push_back(params.hbar() / params.mass_of_axis(a) * std::imag(conj_psi * sample.grad[a]));
  }
  c.spacetime = c.j;
  c.spacetime.push_back(sample.abs2);
  return c;
}

Complex schrodinger_residual(const WavefunctionModel& model, const PhysicalParams& params,
                             std::span<const double> q, double t, double h) {
  const auto V = model.potential(q);
  require(V.has_value(), ErrorCode::NotApplicable, "model does not expose its potential");
  const WavefieldSample centre = model.evaluate(q, t);
  RealVec shifted = to_vec(q);
  Complex laplacian_term{};
  for (std::size_t a = 0; a < q.size(); ++a) {
    shifted[a] = q[a] + h;
    const Complex up = model.evaluate(view(shifted), t).grad[a];
    shifted[a] = q[a] - h;
    const Complex down = model.evaluate(view(shifted), t).grad[a];
    shifted[a] = q[a];
    const double m = params.mass_of_axis(a);
    laplacian_term += -params.hbar() * params.hbar() / (2.0 * m) * (up - down) / (2.0 * h);
  }
  const Complex h_psi = laplacian_term + *V * centre.psi;
  return kI * params.hbar() * centre.dpsi_dt - h_psi;
}

}  // namespace bohm
