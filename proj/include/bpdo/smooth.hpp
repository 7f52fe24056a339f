#pragma once

#include "bpdo/common.hpp"

namespace bpdo {

// C-infinity bump: exp(1 - 1/(1-t^2)) on |t|<1, zero outside, peak value 1.
double bump_profile(double t);

// Monotone C-infinity ramp: 0 at s<=0, 1 at s>=1, all derivatives vanish at
// the ends.  Built by integrating bump_profile; exact 0/1 at the endpoints.
double transition01(double s);

// 1 for r <= r1, 0 for r >= r2, smooth monotone in between.  Requires r1 < r2.
double cutoff_one_zero(double r, double r1, double r2);

// Smooth ratio cutoff with the exact functional equation
// leibniz_phi(r) + leibniz_phi(1/r) == 1 for r > 0, enforced by odd symmetry
// in log r.  Equals 1 for r <= 1/2, 0 for r >= 2, 1/2 at r == 1.
double leibniz_phi(double r);

}  // namespace bpdo
