#include "lrmvdr/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

namespace lrmvdr {

namespace {

double to_db_power(double p) {
  if (!(p > 0.0)) return kFloorDb;
  return std::max(kFloorDb, 10.0 * std::log10(p));
}

bool is_local_max(const std::vector<double>& p, std::size_t i) {
  const bool left = i == 0 || p[i] >= p[i - 1];
  const bool right = i + 1 == p.size() || p[i] >= p[i + 1];
  return left && right && p.size() > 1;
}

// Angle where the pattern crosses `level` between grid points lo and hi.
double crossing(const Beampattern& b, std::size_t inside, std::size_t outside, double level) {
  const double y0 = b.power_db[inside];
  const double y1 = b.power_db[outside];
  const double x0 = b.angles_deg[inside];
  const double x1 = b.angles_deg[outside];
  if (y0 == y1) return x1;
  return x0 + (level - y0) * (x1 - x0) / (y1 - y0);
}

}  // namespace

Beampattern beampattern(const BeamWeights& w, const ArrayGeometry& geom, double grid_step_deg) {
  if (!(grid_step_deg > 0.0) || grid_step_deg > 180.0) {
    throw InvalidArgument(fmt::format("grid step {} deg must be in (0, 180]", grid_step_deg));
  }
  if (w.w.size() != geom.num_elements()) {
    throw InvalidArgument("weights and geometry disagree on the element count");
  }
  Beampattern out;
  const auto n = static_cast<std::size_t>(std::floor(180.0 / grid_step_deg + 1e-9));
  for (std::size_t i = 0; i <= n; ++i) {
    out.angles_deg.push_back(-90.0 + static_cast<double>(i) * grid_step_deg);
  }
  if (out.angles_deg.back() < 90.0 - 1e-9) out.angles_deg.push_back(90.0);
  out.angles_deg.back() = std::min(out.angles_deg.back(), 90.0);

  out.power_db.reserve(out.angles_deg.size());
  for (double theta : out.angles_deg) {
    const Complex r = w.w.dot(steering_vector(geom, theta));
    const double mag2 = std::norm(r);
    out.power_db.push_back(mag2 > 0.0 ? 10.0 * std::log10(mag2)
                                      : -std::numeric_limits<double>::infinity());
  }
  const double peak = *std::max_element(out.power_db.begin(), out.power_db.end());
  if (!std::isfinite(peak)) throw InvalidArgument("beampattern is identically zero");
  for (double& v : out.power_db) v = std::max(kFloorDb, v - peak);
  return out;
}

BeamMetrics extract_metrics(const Beampattern& p, double target_doa_deg,
                            std::span<const double> interferer_doas_deg,
                            const MetricOptions& options) {
  const auto& ang = p.angles_deg;
  const auto& pw = p.power_db;
  if (ang.size() != pw.size() || ang.size() < 3) {
    throw InvalidArgument("beampattern needs at least 3 matching samples");
  }

  std::size_t peak = ang.size();
  for (std::size_t i = 0; i < ang.size(); ++i) {
    if (std::abs(ang[i] - target_doa_deg) > options.peak_search_deg) continue;
    if (!is_local_max(pw, i)) continue;
    if (peak == ang.size() || pw[i] > pw[peak]) peak = i;
  }
  if (peak == ang.size()) {
    throw MetricExtractionError(fmt::format("no local maximum within {} deg of target {} deg",
                                            options.peak_search_deg, target_doa_deg));
  }
  const double peak_db = pw[peak];

  // Main-lobe extent: descend to the first local minimum on each side.
  std::size_t left_min = peak;
  while (left_min > 0 && pw[left_min - 1] <= pw[left_min]) --left_min;
  std::size_t right_min = peak;
  while (right_min + 1 < pw.size() && pw[right_min + 1] <= pw[right_min]) ++right_min;

  BeamMetrics m;
  m.peak_doa_deg = ang[peak];

  if (options.mlw_rule == MainLobeRule::HalfPower) {
    const double level = peak_db - 3.0;
    std::size_t l = peak;
    while (l > 0 && pw[l - 1] >= level) --l;
    std::size_t r = peak;
    while (r + 1 < pw.size() && pw[r + 1] >= level) ++r;
    const double left = l > 0 ? crossing(p, l, l - 1, level) : ang.front();
    const double right = r + 1 < pw.size() ? crossing(p, r, r + 1, level) : ang.back();
    m.mlw_deg = right - left;
  } else {
    m.mlw_deg = ang[right_min] - ang[left_min];
  }

  double sll = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < pw.size(); ++i) {
    if (i >= left_min && i <= right_min) continue;
    if (is_local_max(pw, i)) sll = std::max(sll, pw[i]);
  }
  m.sll_db = std::isfinite(sll) ? std::max(kFloorDb, sll - peak_db) : kFloorDb;

  for (double doa : interferer_doas_deg) {
    const auto it = std::lower_bound(ang.begin(), ang.end(), doa);
    std::size_t idx = static_cast<std::size_t>(std::distance(ang.begin(), it));
    if (idx == ang.size()) {
      idx = ang.size() - 1;
    } else if (idx > 0 && std::abs(ang[idx - 1] - doa) <= std::abs(ang[idx] - doa)) {
      --idx;
    }
    m.null_depths_db.push_back(std::max(kFloorDb, pw[idx] - peak_db));
  }
  return m;
}

double output_sinr_db(const BeamWeights& w, const ComplexVector& target_steering,
                      double target_power, const HermitianMatrix& r) {
  const double num = target_power * std::norm(w.w.dot(target_steering));
  const double den = w.w.dot(r.matrix() * w.w).real();
  return to_db_power(num / den);
}

double output_sinr_db(const BeamWeights& w, const ComplexVector& target_steering,
                      double target_power, const AnalyticCovariance& r,
                      SinrDenominator denominator) {
  const double num = target_power * std::norm(w.w.dot(target_steering));
  const double den = denominator == SinrDenominator::TotalCovariance
                         ? r.quadratic(w.w)
                         : r.without_first_term().quadratic(w.w);
  return to_db_power(num / den);
}

}  // namespace lrmvdr
