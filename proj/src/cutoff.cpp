#include "tws/cutoff.hpp"

#include <algorithm>
#include <cmath>

namespace tws {

CutoffProfile CutoffProfile::smoothstep_pair() {
  return CutoffProfile{smooth_zeta, smooth_eta, true};
}

namespace {

// Primitives on the transition bands, from expanding the cubics:
//   zeta(v) = -16v^3 + 36v^2 - 24v + 5      on [1/2, 1]
//   eta(v)  =   2v^3 -  9v^2 + 12v - 4      on [1, 2]
double zeta_band_primitive(double v) {
  return v * (-16.0 / 3.0 * v * v + 18.0 * v - 24.0) + 5.0 * std::log(v);
}

double eta_band_primitive(double v) {
  return v * (2.0 / 3.0 * v * v - 4.5 * v + 12.0) - 4.0 * std::log(v);
}

}  // namespace

double zeta_over_v_integral(double v0, double v1) {
  if (!(v1 > v0)) return 0.0;
  double acc = 0.0;
  const double b0 = std::max(v0, 0.5), b1 = std::min(v1, 1.0);
  if (b1 > b0) acc += zeta_band_primitive(b1) - zeta_band_primitive(b0);
  const double p0 = std::max(v0, 1.0);
  if (v1 > p0) acc += std::log(v1 / p0);
  return acc;
}

double eta_tail_over_v_integral(double v0, double v1) {
  if (!(v1 > v0)) return 0.0;
  double acc = 0.0;
  const double b0 = std::max(v0, 1.0), b1 = std::min(v1, 2.0);
  // (1 - eta)/v = 1/v - eta/v on the band
  if (b1 > b0) acc += std::log(b1 / b0) - (eta_band_primitive(b1) - eta_band_primitive(b0));
  const double p0 = std::max(v0, 2.0);
  if (v1 > p0) acc += std::log(v1 / p0);
  return acc;
}

}  // namespace tws
