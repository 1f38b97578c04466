#include "lrmvdr/array.hpp"

#include <cmath>
#include <numbers>

#include <fmt/format.h>

#include "lrmvdr/error.hpp"

namespace lrmvdr {

ArrayGeometry::ArrayGeometry(int num_elements) : num_elements_(num_elements) {
  if (num_elements < 2) {
    throw InvalidArgument(fmt::format("array needs at least 2 elements, got {}", num_elements));
  }
}

double deg_to_rad(double deg) noexcept { return deg * std::numbers::pi / 180.0; }
double rad_to_deg(double rad) noexcept { return rad * 180.0 / std::numbers::pi; }

ComplexVector steering_vector(const ArrayGeometry& geom, double theta_deg) {
  if (!(theta_deg >= -90.0 && theta_deg <= 90.0)) {
    throw InvalidArgument(fmt::format("steering angle {} deg outside [-90, 90]", theta_deg));
  }
  const int m = geom.num_elements();
  // Phase step between neighbours is 2*pi*spacing*sin(theta) = pi*sin(theta).
  const double step = 2.0 * std::numbers::pi * ArrayGeometry::kSpacingWavelengths *
                      std::sin(deg_to_rad(theta_deg));
  ComplexVector a(m);
  for (int k = 0; k < m; ++k) {
    a(k) = std::polar(1.0, -step * k);
  }
  return a;
}

}  // namespace lrmvdr
