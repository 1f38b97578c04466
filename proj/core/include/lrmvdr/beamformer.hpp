#pragma once

#include <limits>
#include <string_view>

#include "lrmvdr/linalg.hpp"
#include "lrmvdr/lowrank.hpp"
#include "lrmvdr/signal.hpp"

namespace lrmvdr {

enum class Engine { Exact, LowRank };

std::string_view to_string(Engine e) noexcept;

/// MVDR weight vector. Both constructors below normalize so that
/// w^H a(steer) = 1 up to round-off.
struct BeamWeights {
  ComplexVector w;
  double steer_doa_deg = std::numeric_limits<double>::quiet_NaN();
  Engine engine = Engine::Exact;
};

/// w = Rinv a / (a^H Rinv a). Throws NumericalError when the denominator
/// is <= 1e-14 in magnitude.
BeamWeights mvdr_weights(const HermitianMatrix& rinv, const ComplexVector& a,
                         double steer_doa_deg = std::numeric_limits<double>::quiet_NaN());

/// Same formula with Rinv = U_K C U_K^H, evaluated as U_K (C (U_K^H a)) so the
/// M x M surrogate is never formed.
BeamWeights lowrank_weights(const LowRankState& state, const ComplexVector& a,
                            double steer_doa_deg = std::numeric_limits<double>::quiet_NaN());

/// y = w^H x.
Complex apply(const BeamWeights& w, const Snapshot& x);

/// |w^H a - 1|.
double distortionless_error(const BeamWeights& w, const ComplexVector& a);

}  // namespace lrmvdr
