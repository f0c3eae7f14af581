#ifndef LATALIGN_NUMERIC_HPP
#define LATALIGN_NUMERIC_HPP

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>

namespace latalign {

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();
inline constexpr double kPosInf = std::numeric_limits<double>::infinity();

// log(exp(a) + exp(b)) with the max shifted out; -inf inputs drop out.
inline double log_add(double a, double b) {
  if (a == kNegInf) return b;
  if (b == kNegInf) return a;
  const double hi = std::max(a, b);
  return hi + std::log1p(std::exp(std::min(a, b) - hi));
}

// log sum_i exp(args[i]); -inf over an empty or all--inf input.
inline double log_sum_exp(std::span<const double> args) {
  double hi = kNegInf;
  for (double a : args) hi = std::max(hi, a);
  if (hi == kNegInf) return kNegInf;
  double sum = 0.0;
  for (double a : args) {
    if (a != kNegInf) sum += std::exp(a - hi);
  }
  return hi + std::log(sum);
}

}  // namespace latalign

#endif
