#pragma once

// Closed-form constants transcribed straight from their printed definitions
// and evaluated in 50-digit decimal arithmetic.

#include <boost/multiprecision/cpp_dec_float.hpp>

namespace lrmr::oracle {

using Real = boost::multiprecision::cpp_dec_float_50;

struct Constants {
  Real threshold, beta1, beta2, c1, c2, c3, c4;
};

inline Constants evaluate(double t_in, int k_in, double delta_in, double lambda_in, double eps_in) {
  const Real t(t_in), d(delta_in), l(lambda_in), e(eps_in), k(k_in);
  const Real sk = sqrt(k);
  Constants c;
  c.threshold = sqrt((t - 1) / t);
  c.beta1 = Real(2) / ((1 - d) * sqrt(1 + d));
  c.beta2 = d / sqrt((1 - d * d) * (t - 1));
  const Real b1 = c.beta1, b2 = c.beta2;
  c.c1 = 2 * l / (sk * b1 * l + e);
  c.c2 = 2 * sk * b1 * l + 2 * e;
  c.c3 = (2 * sk * b1 * (2 * sk + 1 + b2) * l + 2 * (sk * b2 + 2 * b2 + sk) * e) /
         (k * b1 * (1 - b2) * l);
  const Real denom = sk * (1 - b2) * l * pow(sk * b1 * l + e, -1);
  c.c4 = (2 * (k + sk) * b1 * l + (b2 + 2 * sk - sk * b2) * e) / denom;
  return c;
}

}  // namespace lrmr::oracle
