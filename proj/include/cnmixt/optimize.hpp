#ifndef CNMIXT_OPTIMIZE_HPP
#define CNMIXT_OPTIMIZE_HPP

#include <cmath>
#include <functional>

namespace cnmixt {

struct ScalarMaxResult {
  double x = 0.0;
  double value = 0.0;
};

// Bounded scalar maximization on [lo, hi] by golden-section search with
// successive parabolic interpolation (Brent's localmin, run on -f).
// `tol` is an absolute tolerance on x.
ScalarMaxResult maximize_scalar(const std::function<double(double)>& f,
                                double lo, double hi, double tol = 1e-6);

}  // namespace cnmixt

#endif
