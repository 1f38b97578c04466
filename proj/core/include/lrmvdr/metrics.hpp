#pragma once

#include <span>
#include <vector>

#include "lrmvdr/array.hpp"
#include "lrmvdr/beamformer.hpp"
#include "lrmvdr/error.hpp"
#include "lrmvdr/signal.hpp"

namespace lrmvdr {

/// Floor used wherever a log of zero power would appear.
inline constexpr double kFloorDb = -120.0;
inline constexpr double kDefaultGridStepDeg = 0.05;

struct Beampattern {
  std::vector<double> angles_deg;  // strictly increasing, spans [-90, 90]
  std::vector<double> power_db;    // max over the grid is exactly 0
};

/// 20 log10 |w^H a(theta)| on a uniform grid over [-90, 90], normalized to
/// its maximum and floored at kFloorDb.
Beampattern beampattern(const BeamWeights& w, const ArrayGeometry& geom,
                        double grid_step_deg = kDefaultGridStepDeg);

enum class MainLobeRule { HalfPower, NullToNull };

struct MetricOptions {
  MainLobeRule mlw_rule = MainLobeRule::HalfPower;
  double peak_search_deg = 2.0;
};

struct BeamMetrics {
  double mlw_deg = 0.0;
  double sll_db = kFloorDb;
  std::vector<double> null_depths_db;
  double peak_doa_deg = 0.0;
};

/// The pattern has no local maximum near the target: the beamformer failed
/// to steer. Reported as a metric failure rather than a crash.
class MetricExtractionError : public Error {
 public:
  using Error::Error;
};

/// Main-lobe width, sidelobe level and null depths, all relative to the
/// main-lobe peak (the highest local maximum within peak_search_deg of the
/// target).
///
/// - MLW: -3 dB width with linear interpolation of the crossings, or the
///   null-to-null width under MainLobeRule::NullToNull.
/// - SLL: highest local maximum outside the main lobe, which extends to the
///   first local minimum on either side of the peak.
/// - Null depth: pattern value at the grid angle nearest each interferer DoA.
BeamMetrics extract_metrics(const Beampattern& p, double target_doa_deg,
                            std::span<const double> interferer_doas_deg,
                            const MetricOptions& options = {});

enum class SinrDenominator {
  TotalCovariance,        // w^H R w with the target term included
  InterferencePlusNoise,  // sensitivity-check variant
};

/// SINR_out = P_s |w^H a0|^2 / (w^H R w), in dB, floored at kFloorDb.
double output_sinr_db(const BeamWeights& w, const ComplexVector& target_steering,
                      double target_power, const HermitianMatrix& r);

double output_sinr_db(const BeamWeights& w, const ComplexVector& target_steering,
                      double target_power, const AnalyticCovariance& r,
                      SinrDenominator denominator = SinrDenominator::TotalCovariance);

inline double sinr_gain_db(double out_db, double in_db) { return out_db - in_db; }

}  // namespace lrmvdr
