#pragma once

#include <functional>

namespace tws {

/// s(u) = 3u^2 - 2u^3 clamped to [0, 1].
inline double smoothstep(double u) {
  if (u <= 0.0) return 0.0;
  if (u >= 1.0) return 1.0;
  return u * u * (3.0 - 2.0 * u);
}

/// zeta: 0 on (-inf, 1/2], 1 on [1, inf), nondecreasing and C^1.
inline double smooth_zeta(double t) { return smoothstep(2.0 * t - 1.0); }

/// eta: 1 on (-inf, 1], 0 on [2, inf), nonincreasing and C^1.
inline double smooth_eta(double t) { return 1.0 - smoothstep(t - 1.0); }

/// A pair of cutoff profiles. The standard one is the smoothstep pair above;
/// closed forms in the operator layer are only used for the standard profile.
struct CutoffProfile {
  std::function<double(double)> zeta;
  std::function<double(double)> eta;
  bool standard = false;

  static CutoffProfile smoothstep_pair();
  double zeta_eps(double t, double eps) const { return zeta(t / eps); }
  double eta_R(double t, double R) const { return eta(t / R); }
};

/// Integral of zeta(v)/v over [v0, v1], 0 <= v0 <= v1 (closed form).
double zeta_over_v_integral(double v0, double v1);

/// Integral of (1 - eta(v))/v over [v0, v1], 0 <= v0 <= v1 (closed form).
double eta_tail_over_v_integral(double v0, double v1);

}  // namespace tws
