#pragma once

// Hand-rolled generators for property tests. Every draw is a pure function
// of the seed passed in.

#include <cstdint>
#include <random>
#include <vector>

#include "lrmr/linalg.hpp"

namespace lrmr::testing {

class Gen {
 public:
  explicit Gen(std::uint64_t seed) : rng_(seed) {}

  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }
  double normal() { return std::normal_distribution<double>(0.0, 1.0)(rng_); }

  MatrixXd gaussian(Index rows, Index cols) {
    MatrixXd x(rows, cols);
    for (Index i = 0; i < x.size(); ++i) x.data()[i] = normal();
    return x;
  }
  VectorXd gaussian(Index n) {
    VectorXd v(n);
    for (Index i = 0; i < n; ++i) v(i) = normal();
    return v;
  }
  MatrixXd low_rank(Index rows, Index cols, Index r) { return gaussian(rows, r) * gaussian(cols, r).transpose(); }

  std::mt19937_64& engine() { return rng_; }

 private:
  std::mt19937_64 rng_;
};

inline double rel_diff(double a, double b) {
  const double s = std::max(std::abs(a), std::abs(b));
  return s == 0.0 ? 0.0 : std::abs(a - b) / s;
}

}  // namespace lrmr::testing
