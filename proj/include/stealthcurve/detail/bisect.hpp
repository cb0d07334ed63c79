// Copyright 2026 The Stealthcurve Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cmath>
#include <string>

#include "stealthcurve/errors.hpp"

namespace stealthcurve {
namespace detail {

// Solves f(x) = target for f strictly increasing on (0, hi) with
// f(0+) = 0.  f may return +infinity near hi; infinity counts as
// "above target" and moves the upper bracket inward.  The iteration
// count is fixed so the bracket shrinks to the last representable ulp
// regardless of scale; callers check the residual against their own
// tolerance afterwards.
template <typename F>
double bisect_increasing(F&& f, double target, double hi,
                         const std::string& label, int iterations = 200) {
  if (!(target > 0.0) || !std::isfinite(target))
    throw std::invalid_argument(label + ": target must be positive and finite");
  if (!(hi > 0.0))
    throw SolverError(label + ": empty bracket");
  double f_hi = f(hi);
  if (std::isnan(f_hi) || f_hi < target)
    throw SolverError(label + ": target " + std::to_string(target) +
                      " not reachable inside the bracket (f(hi) = " +
                      std::to_string(f_hi) + ")");
  double lo = 0.0;
  double f_lo = 0.0;
  for (int it = 0; it < iterations; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    const double f_mid = f(mid);
    if (std::isnan(f_mid))
      throw SolverError(label + ": objective returned NaN at " +
                        std::to_string(mid));
    const double slack =
        1e-9 * (target + (std::isfinite(f_hi) ? std::fabs(f_hi) : 0.0));
    if (f_mid < f_lo - slack || f_mid > f_hi + slack)
      throw SolverError(label + ": objective is not monotone on the bracket");
    if (f_mid < target) {
      lo = mid;
      f_lo = f_mid;
    } else {
      hi = mid;
      f_hi = f_mid;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace detail
}  // namespace stealthcurve
