#pragma once

#include <boost/container/static_vector.hpp>

#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>

namespace bohm {

/// Largest configuration dimension d = nu * N supported by the fixed-capacity vectors.
inline constexpr std::size_t kMaxDim = 9;

using Complex = std::complex<double>;
using RealVec = boost::container::static_vector<double, kMaxDim>;
using ComplexVec = boost::container::static_vector<Complex, kMaxDim>;

enum class ErrorCode {
  InvalidArgument,
  OutOfDomain,
  NodeEvaluation,
  EnvelopeFailure,
  UnstableStep,
  InsufficientFrames,
  StepSizeUnderflow,
  EmptyEnsemble,
  LevelOutOfRange,
  DegenerateWindow,
  QuadratureDivergence,
  NotApplicable,
  GridTooCoarse,
  TooFewAlive,
  MismatchedParameters,
  Validation,
  Io,
};

std::string_view to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] void fail(ErrorCode code, const std::string& message);

inline void require(bool condition, ErrorCode code, const char* message) {
  if (!condition) fail(code, message);
}

inline std::span<const double> view(const RealVec& v) { return {v.data(), v.size()}; }

inline RealVec to_vec(std::span<const double> q) { return RealVec(q.begin(), q.end()); }

inline double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double norm(std::span<const double> a) { return std::sqrt(dot(a, a)); }

}  // namespace bohm
