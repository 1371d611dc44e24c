#include "bohm/propagator.hpp"

#include "fft_detail.hpp"

#include <fftw3.h>

#include <algorithm>
#include <bit>
#include <fstream>
#include <mutex>
#include <numbers>

namespace bohm {

namespace {

std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

constexpr Complex kI{0.0, 1.0};

// Visits every multi-index of `points` in row-major order (last axis fastest).
template <class F>
void for_each_index(const std::vector<std::size_t>& points, F&& visit) {
  const std::size_t d = points.size();
  std::size_t total = 1;
  for (auto n : points) total *= n;
  std::vector<std::size_t> idx(d, 0);
  for (std::size_t flat = 0; flat < total; ++flat) {
    visit(flat, idx);
    for (std::size_t a = d; a-- > 0;) {
      if (++idx[a] < points[a]) break;
      idx[a] = 0;
    }
  }
}

double wavenumber_of(const GridSpec& g, std::size_t axis, std::size_t i) {
  const auto n = static_cast<long>(g.points[axis]);
  const long j = static_cast<long>(i) < n / 2 ? static_cast<long>(i) : static_cast<long>(i) - n;
  return 2.0 * std::numbers::pi * static_cast<double>(j) / (g.hi[axis] - g.lo[axis]);
}

bool is_nyquist(const GridSpec& g, std::size_t axis, std::size_t i) {
  return g.points[axis] % 2 == 0 && i == g.points[axis] / 2;
}

}  // namespace

void detail::fft_forward(const std::vector<std::size_t>& points, std::vector<Complex>& data) {
  std::vector<int> dims(points.begin(), points.end());
  auto* buf = reinterpret_cast<fftw_complex*>(data.data());
  fftw_plan plan = nullptr;
  {
    std::lock_guard lock(planner_mutex());
    plan = fftw_plan_dft(static_cast<int>(dims.size()), dims.data(), buf, buf, FFTW_FORWARD,
                         FFTW_ESTIMATE | FFTW_UNALIGNED);
  }
  if (!plan) fail(ErrorCode::InvalidArgument, "FFTW planning failed");
  fftw_execute(plan);
  std::lock_guard lock(planner_mutex());
  fftw_destroy_plan(plan);
}

std::string_view to_string(GridBoundary b) {
  switch (b) {
    case GridBoundary::Periodic: return "periodic";
    case GridBoundary::Padded: return "padded";
    case GridBoundary::Dirichlet: return "dirichlet";
  }
  return "unknown";
}

std::size_t GridSpec::size() const {
  std::size_t n = 1;
  for (auto p : points) n *= p;
  return n;
}

double GridSpec::cell_volume() const {
  double v = 1.0;
  for (std::size_t a = 0; a < dim(); ++a) v *= spacing(a);
  return v;
}

double GridSpec::coordinate(std::size_t axis, std::size_t i) const {
  return lo[axis] + spacing(axis) * static_cast<double>(i);
}

void GridSpec::validate() const {
  require(dim() >= 1 && hi.size() == dim() && points.size() == dim(), ErrorCode::InvalidArgument,
          "grid lo/hi/points must have the same length");
  require(dim() <= kMaxDim, ErrorCode::InvalidArgument, "grid dimension too large");
  for (std::size_t a = 0; a < dim(); ++a) {
    require(points[a] >= 16, ErrorCode::InvalidArgument, "grid needs >= 16 points per axis");
    require(hi[a] > lo[a], ErrorCode::InvalidArgument, "grid axis has an empty range");
  }
  require(dt > 0.0, ErrorCode::InvalidArgument, "grid dt must be > 0");
  require(frame_stride >= 1, ErrorCode::InvalidArgument, "frame stride must be >= 1");
  require(boundary != GridBoundary::Dirichlet || dim() == 1, ErrorCode::InvalidArgument,
          "Dirichlet half-line grids are one-dimensional");
}

GridSpec GridSpec::computational() const {
  GridSpec c = *this;
  if (boundary == GridBoundary::Dirichlet) {
    c.lo[0] = 2.0 * lo[0] - hi[0];
    c.points[0] = 2 * points[0];
  }
  c.boundary = GridBoundary::Periodic;
  return c;
}

// ---------------------------------------------------------------------------

struct SplitStepPropagator::Fft {
  fftw_plan forward = nullptr;
  fftw_plan backward = nullptr;
  std::size_t size = 0;

  explicit Fft(const GridSpec& g) : size(g.size()) {
    std::vector<int> dims(g.points.begin(), g.points.end());
    std::lock_guard lock(planner_mutex());
    auto* buf = fftw_alloc_complex(size);
    forward = fftw_plan_dft(static_cast<int>(dims.size()), dims.data(), buf, buf, FFTW_FORWARD,
                            FFTW_ESTIMATE | FFTW_UNALIGNED);
    backward = fftw_plan_dft(static_cast<int>(dims.size()), dims.data(), buf, buf, FFTW_BACKWARD,
                             FFTW_ESTIMATE | FFTW_UNALIGNED);
    fftw_free(buf);
    if (!forward || !backward) fail(ErrorCode::InvalidArgument, "FFTW planning failed");
  }
  ~Fft() {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(forward);
    fftw_destroy_plan(backward);
  }
};

SplitStepPropagator::SplitStepPropagator(GridSpec grid, PhysicalParams params, Potential potential)
    : grid_(std::move(grid)), params_(std::move(params)), potential_(std::move(potential)) {
  grid_.validate();
  require(params_.dim() == grid_.dim(), ErrorCode::InvalidArgument,
          "grid dimension differs from the configuration dimension");
  comp_ = grid_.computational();
  fft_ = std::make_unique<Fft>(comp_);
  const std::size_t d = comp_.dim();
  v_values_.assign(comp_.size(), 0.0);
  kinetic_.assign(comp_.size(), 0.0);
  const double hbar = params_.hbar();
  for_each_index(comp_.points, [&](std::size_t flat, const std::vector<std::size_t>& idx) {
    RealVec q(d, 0.0);
    double kin = 0.0;
    for (std::size_t a = 0; a < d; ++a) {
      q[a] = comp_.coordinate(a, idx[a]);
      const double k = wavenumber_of(comp_, a, idx[a]);
      kin += hbar * hbar * k * k / (2.0 * params_.mass_of_axis(a));
    }
    if (grid_.boundary == GridBoundary::Dirichlet && q[0] < grid_.lo[0]) {
      q[0] = 2.0 * grid_.lo[0] - q[0];  // even extension of V
    }
    if (potential_) v_values_[flat] = potential_(view(q));
    kinetic_[flat] = kin;
  });
}

SplitStepPropagator::~SplitStepPropagator() = default;

double SplitStepPropagator::wavenumber(std::size_t axis, std::size_t i) const {
  return wavenumber_of(comp_, axis, i);
}

void SplitStepPropagator::forward(std::vector<Complex>& data) const {
  fftw_execute_dft(fft_->forward, reinterpret_cast<fftw_complex*>(data.data()),
                   reinterpret_cast<fftw_complex*>(data.data()));
}

void SplitStepPropagator::backward(std::vector<Complex>& data) const {
  fftw_execute_dft(fft_->backward, reinterpret_cast<fftw_complex*>(data.data()),
                   reinterpret_cast<fftw_complex*>(data.data()));
  const double scale = 1.0 / static_cast<double>(data.size());
  for (auto& z : data) z *= scale;
}

GridState SplitStepPropagator::sample(const WavefunctionModel& model, double t) const {
  require(model.dim() == comp_.dim(), ErrorCode::InvalidArgument, "model dimension differs from grid");
  GridState state;
  state.t = t;
  state.amplitudes.assign(comp_.size(), Complex{});
  const std::size_t d = comp_.dim();
  const bool odd = grid_.boundary == GridBoundary::Dirichlet;
  for_each_index(comp_.points, [&](std::size_t flat, const std::vector<std::size_t>& idx) {
    RealVec q(d, 0.0);
    for (std::size_t a = 0; a < d; ++a) q[a] = comp_.coordinate(a, idx[a]);
    if (odd) {
      const double lo = grid_.lo[0];
      if (idx[0] == 0 || q[0] == lo) return;  // psi vanishes at lo and at the mirror of hi
      if (q[0] < lo) {
        q[0] = 2.0 * lo - q[0];
        state.amplitudes[flat] = -model.evaluate(view(q), t).psi;
        return;
      }
    }
    state.amplitudes[flat] = model.evaluate(view(q), t).psi;
  });
  state.norm = norm(state.amplitudes);
  return state;
}

double SplitStepPropagator::norm(const std::vector<Complex>& psi) const {
  double s = 0.0;
  for (const auto& z : psi) s += std::norm(z);
  s *= comp_.cell_volume();
  if (grid_.boundary == GridBoundary::Dirichlet) s *= 0.5;
  return std::sqrt(s);
}

GridState SplitStepPropagator::step(const GridState& state, double dt) const {
  require(state.amplitudes.size() == comp_.size(), ErrorCode::InvalidArgument,
          "state does not match the grid");
  const double hbar = params_.hbar();
  GridState next;
  next.t = state.t + dt;
  next.amplitudes = state.amplitudes;
  auto& psi = next.amplitudes;
  if (potential_) {
    for (std::size_t i = 0; i < psi.size(); ++i) psi[i] *= std::polar(1.0, -v_values_[i] * dt / (2.0 * hbar));
  }
  forward(psi);
  for (std::size_t i = 0; i < psi.size(); ++i) psi[i] *= std::polar(1.0, -kinetic_[i] * dt / hbar);
  backward(psi);
  if (potential_) {
    for (std::size_t i = 0; i < psi.size(); ++i) psi[i] *= std::polar(1.0, -v_values_[i] * dt / (2.0 * hbar));
  }
  const double before = norm(state.amplitudes);
  next.norm = norm(psi);
  if (std::abs(next.norm - before) > 1e-10 * std::max(1.0, before)) {
    fail(ErrorCode::UnstableStep, "norm drift per step exceeds 1e-10");
  }
  return next;
}

std::vector<Complex> SplitStepPropagator::time_derivative(const std::vector<Complex>& psi) const {
  std::vector<Complex> hat = psi;
  forward(hat);
  for (std::size_t i = 0; i < hat.size(); ++i) hat[i] *= kinetic_[i];
  backward(hat);
  const double hbar = params_.hbar();
  for (std::size_t i = 0; i < hat.size(); ++i) hat[i] = -kI / hbar * (hat[i] + v_values_[i] * psi[i]);
  return hat;
}

std::vector<std::vector<Complex>> SplitStepPropagator::gradient_spectral(
    const std::vector<Complex>& psi) const {
  std::vector<Complex> hat = psi;
  forward(hat);
  std::vector<std::vector<Complex>> grad(comp_.dim());
  for (std::size_t a = 0; a < comp_.dim(); ++a) {
    std::vector<Complex> g(hat.size());
    for_each_index(comp_.points, [&](std::size_t flat, const std::vector<std::size_t>& idx) {
      g[flat] = is_nyquist(comp_, a, idx[a]) ? Complex{} : kI * wavenumber(a, idx[a]) * hat[flat];
    });
    backward(g);
    grad[a] = std::move(g);
  }
  return grad;
}

double SplitStepPropagator::kinetic_energy(const std::vector<Complex>& psi) const {
  std::vector<Complex> hat = psi;
  forward(hat);
  double s = 0.0;
  for (std::size_t i = 0; i < hat.size(); ++i) s += kinetic_[i] * std::norm(hat[i]);
  s *= comp_.cell_volume() / static_cast<double>(hat.size());
  return grid_.boundary == GridBoundary::Dirichlet ? 0.5 * s : s;
}

double SplitStepPropagator::potential_energy(const std::vector<Complex>& psi) const {
  double s = 0.0;
  for (std::size_t i = 0; i < psi.size(); ++i) s += v_values_[i] * std::norm(psi[i]);
  s *= comp_.cell_volume();
  return grid_.boundary == GridBoundary::Dirichlet ? 0.5 * s : s;
}

double SplitStepPropagator::gradient_norm2(const std::vector<Complex>& psi) const {
  std::vector<Complex> hat = psi;
  forward(hat);
  double s = 0.0;
  for_each_index(comp_.points, [&](std::size_t flat, const std::vector<std::size_t>& idx) {
    double k2 = 0.0;
    for (std::size_t a = 0; a < comp_.dim(); ++a) {
      const double k = wavenumber(a, idx[a]);
      k2 += k * k;
    }
    s += k2 * std::norm(hat[flat]);
  });
  s *= comp_.cell_volume() / static_cast<double>(hat.size());
  return grid_.boundary == GridBoundary::Dirichlet ? 0.5 * s : s;
}

double SplitStepPropagator::edge_mass(const std::vector<Complex>& psi) const {
  double edge = 0.0;
  double total = 0.0;
  for_each_index(comp_.points, [&](std::size_t flat, const std::vector<std::size_t>& idx) {
    const double m = std::norm(psi[flat]);
    total += m;
    for (std::size_t a = 0; a < comp_.dim(); ++a) {
      const std::size_t layer = std::max<std::size_t>(1, comp_.points[a] / 20);
      if (idx[a] < layer || idx[a] >= comp_.points[a] - layer) {
        edge += m;
        break;
      }
    }
  });
  return total > 0.0 ? edge / total : 0.0;
}

FrameStore SplitStepPropagator::propagate(const GridState& initial, double T) const {
  require(T > 0.0, ErrorCode::InvalidArgument, "propagation time must be > 0");
  const auto steps = static_cast<std::size_t>(std::max(1.0, std::ceil(T / grid_.dt - 1e-9)));
  const double h = T / static_cast<double>(steps);
  FrameStore store;
  store.grid = grid_;
  auto record = [&](const GridState& s) {
    store.times.push_back(s.t);
    store.psi.push_back(s.amplitudes);
    store.dpsi_dt.push_back(time_derivative(s.amplitudes));
  };
  GridState state = initial;
  record(state);
  for (std::size_t i = 1; i <= steps; ++i) {
    state = step(state, h);
    if (grid_.boundary == GridBoundary::Padded && edge_mass(state.amplitudes) > 1e-6) {
      fail(ErrorCode::OutOfDomain, "more than 1e-6 of the mass reached the grid edge");
    }
    if (i % grid_.frame_stride == 0 || i == steps) record(state);
  }
  return store;
}

// ---------------------------------------------------------------------------

namespace {

constexpr char kMagic[8] = {'B', 'O', 'H', 'M', 'F', 'R', 'M', '\0'};
constexpr std::uint32_t kFrameVersion = 1;

template <class T>
void put(std::ofstream& out, T value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <class T>
T get(std::ifstream& in) {
  T value{};
  in.read(reinterpret_cast<char*>(&value), sizeof(T));
  if (!in) fail(ErrorCode::Io, "truncated frame store");
  return value;
}

}  // namespace

void FrameStore::write(const std::string& path) const {
  if constexpr (std::endian::native != std::endian::little) {
    fail(ErrorCode::Io, "frame store I/O requires a little-endian host");
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::Io, "cannot open frame store for writing: " + path);
  out.write(kMagic, sizeof(kMagic));
  put<std::uint32_t>(out, kFrameVersion);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(grid.dim()));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(grid.boundary));
  for (std::size_t a = 0; a < grid.dim(); ++a) {
    put<double>(out, grid.lo[a]);
    put<double>(out, grid.hi[a]);
    put<std::uint64_t>(out, grid.points[a]);
  }
  put<double>(out, grid.dt);
  put<std::uint64_t>(out, grid.frame_stride);
  const std::uint64_t per_frame = psi.empty() ? 0 : psi.front().size();
  put<std::uint64_t>(out, times.size());
  put<std::uint64_t>(out, per_frame);
  for (double t : times) put<double>(out, t);
  for (const auto* set : {&psi, &dpsi_dt}) {
    for (const auto& frame : *set) {
      out.write(reinterpret_cast<const char*>(frame.data()),
                static_cast<std::streamsize>(frame.size() * sizeof(Complex)));
    }
  }
  if (!out) fail(ErrorCode::Io, "failed writing frame store: " + path);
}

FrameStore FrameStore::read(const std::string& path) {
  if constexpr (std::endian::native != std::endian::little) {
    fail(ErrorCode::Io, "frame store I/O requires a little-endian host");
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::Io, "cannot open frame store: " + path);
  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || !std::equal(magic, magic + 8, kMagic)) fail(ErrorCode::Io, "not a frame store: " + path);
  if (get<std::uint32_t>(in) != kFrameVersion) fail(ErrorCode::Io, "unsupported frame store version");
  FrameStore store;
  const auto dim = get<std::uint32_t>(in);
  if (dim == 0 || dim > kMaxDim) fail(ErrorCode::Io, "bad frame store dimension");
  store.grid.boundary = static_cast<GridBoundary>(get<std::uint32_t>(in));
  for (std::uint32_t a = 0; a < dim; ++a) {
    store.grid.lo.push_back(get<double>(in));
    store.grid.hi.push_back(get<double>(in));
    store.grid.points.push_back(get<std::uint64_t>(in));
  }
  store.grid.dt = get<double>(in);
  store.grid.frame_stride = get<std::uint64_t>(in);
  const auto frames = get<std::uint64_t>(in);
  const auto per_frame = get<std::uint64_t>(in);
  if (per_frame != store.grid.computational().size()) fail(ErrorCode::Io, "frame size mismatch");
  for (std::uint64_t i = 0; i < frames; ++i) store.times.push_back(get<double>(in));
  for (auto* set : {&store.psi, &store.dpsi_dt}) {
    set->assign(frames, std::vector<Complex>(per_frame));
    for (auto& frame : *set) {
      in.read(reinterpret_cast<char*>(frame.data()),
              static_cast<std::streamsize>(frame.size() * sizeof(Complex)));
      if (!in) fail(ErrorCode::Io, "truncated frame store");
    }
  }
  return store;
}

KineticAction kinetic_action(const SplitStepPropagator& propagator, const FrameStore& frames,
                             double T) {
  const auto& times = frames.times;
  if (times.size() < 2 || times.front() > 1e-12 || times.back() < T - 1e-9) {
    fail(ErrorCode::InsufficientFrames, "stored frames do not cover [0, T]");
  }
  KineticAction out;
  double prev_t = 0.0, prev_g = 0.0, prev_k = 0.0;
  for (std::size_t i = 0; i < times.size() && times[i] <= T + 1e-9; ++i) {
    const double g = propagator.gradient_norm2(frames.psi[i]);
    const double k = propagator.kinetic_energy(frames.psi[i]);
    out.energy.push_back(propagator.energy(frames.psi[i]));
    if (i > 0) {
      out.gradient_integral += 0.5 * (times[i] - prev_t) * (g + prev_g);
      out.kinetic_integral += 0.5 * (times[i] - prev_t) * (k + prev_k);
    }
    prev_t = times[i];
    prev_g = g;
    prev_k = k;
  }
  return out;
}

}  // namespace bohm
