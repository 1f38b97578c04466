#pragma once

#include "lrmvdr/linalg.hpp"

namespace lrmvdr {

/// Uniform linear array with half-wavelength element spacing.
class ArrayGeometry {
 public:
  static constexpr double kSpacingWavelengths = 0.5;

  explicit ArrayGeometry(int num_elements);

  int num_elements() const noexcept { return num_elements_; }

  friend bool operator==(const ArrayGeometry&, const ArrayGeometry&) = default;

 private:
  int num_elements_;
};

double deg_to_rad(double deg) noexcept;
double rad_to_deg(double rad) noexcept;

/// a(theta)[k] = exp(-j k pi sin(theta)), k = 0..M-1, theta in degrees from
/// boresight, -90 <= theta <= 90.
ComplexVector steering_vector(const ArrayGeometry& geom, double theta_deg);

}  // namespace lrmvdr
