#include "lrmvdr/beamformer.hpp"

#include <cmath>

#include <fmt/format.h>

#include "lrmvdr/error.hpp"

namespace lrmvdr {

namespace {

constexpr double kMinDenominator = 1e-14;

BeamWeights normalize(ComplexVector numerator, const ComplexVector& a, double doa, Engine engine) {
  const Complex denom = a.dot(numerator);  // a^H Rinv a
  if (!(std::abs(denom) > kMinDenominator) || !std::isfinite(std::abs(denom))) {
    throw NumericalError(fmt::format(
        "MVDR denominator |a^H Rinv a| = {:.3e} is degenerate (steering orthogonal to the "
        "retained subspace?)",
        std::abs(denom)));
  }
  numerator /= denom;
  return BeamWeights{std::move(numerator), doa, engine};
}

}  // namespace

std::string_view to_string(Engine e) noexcept {
  return e == Engine::Exact ? "exact" : "lowrank";
}

BeamWeights mvdr_weights(const HermitianMatrix& rinv, const ComplexVector& a, double steer_doa_deg) {
  if (a.size() != rinv.size()) {
    throw InvalidArgument(fmt::format("steering length {} does not match {}x{} inverse", a.size(),
                                      rinv.size(), rinv.size()));
  }
  ComplexVector num = rinv.matrix() * a;
  return normalize(std::move(num), a, steer_doa_deg, Engine::Exact);
}

BeamWeights lowrank_weights(const LowRankState& state, const ComplexVector& a, double steer_doa_deg) {
  if (a.size() != state.dimension()) {
    throw InvalidArgument(fmt::format("steering length {} does not match dimension {}", a.size(),
                                      state.dimension()));
  }
  const ComplexVector projected = state.basis().adjoint() * a;
  const ComplexVector core_times = state.core_inverse() * projected;
  ComplexVector num = state.basis() * core_times;
  return normalize(std::move(num), a, steer_doa_deg, Engine::LowRank);
}

Complex apply(const BeamWeights& w, const Snapshot& x) {
  if (w.w.size() != x.data.size()) {
    throw InvalidArgument(
        fmt::format("weights length {} vs snapshot length {}", w.w.size(), x.data.size()));
  }
  return w.w.dot(x.data);
}

double distortionless_error(const BeamWeights& w, const ComplexVector& a) {
  return std::abs(w.w.dot(a) - Complex(1.0, 0.0));
}

}  // namespace lrmvdr
