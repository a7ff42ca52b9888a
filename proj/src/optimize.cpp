#include "cnmixt/optimize.hpp"

#include <limits>

namespace cnmixt {

ScalarMaxResult maximize_scalar(const std::function<double(double)>& f,
                                double lo, double hi, double tol) {
  const double gold = 0.5 * (3.0 - std::sqrt(5.0));
  const double eps = std::sqrt(std::numeric_limits<double>::epsilon());

  double a = lo, b = hi;
  double x = a + gold * (b - a);
  double w = x, v = x;
  double fx = -f(x), fw = fx, fv = fx;
  double d = 0.0, e = 0.0;

  for (int iter = 0; iter < 200; ++iter) {
    const double m = 0.5 * (a + b);
    const double tol1 = eps * std::abs(x) + tol / 3.0;
    if (std::abs(x - m) <= 2.0 * tol1 - 0.5 * (b - a)) break;

    bool parabolic = false;
    if (std::abs(e) > tol1) {
      // Trial parabolic fit through x, v, w.
      const double r = (x - w) * (fx - fv);
      double q = (x - v) * (fx - fw);
      double pnum = (x - v) * q - (x - w) * r;
      q = 2.0 * (q - r);
      if (q > 0.0) pnum = -pnum;
      q = std::abs(q);
      const double e_old = e;
      e = d;
      if (std::abs(pnum) < std::abs(0.5 * q * e_old) && pnum > q * (a - x) &&
          pnum < q * (b - x)) {
        d = pnum / q;
        const double u = x + d;
        if (u - a < 2.0 * tol1 || b - u < 2.0 * tol1)
          d = (x < m) ? tol1 : -tol1;
        parabolic = true;
      }
    }
    if (!parabolic) {
      e = (x < m) ? b - x : a - x;
      d = gold * e;
    }
    const double u =
        (std::abs(d) >= tol1) ? x + d : x + ((d > 0.0) ? tol1 : -tol1);
    const double fu = -f(u);
    if (fu <= fx) {
      if (u < x) b = x; else a = x;
      v = w; fv = fw;
      w = x; fw = fx;
      x = u; fx = fu;
    } else {
      if (u < x) a = u; else b = u;
      if (fu <= fw || w == x) {
        v = w; fv = fw;
        w = u; fw = fu;
      } else if (fu <= fv || v == x || v == w) {
        v = u; fv = fu;
      }
    }
  }
  return {x, -fx};
}

}  // namespace cnmixt
