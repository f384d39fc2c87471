#pragma once

#include <cstddef>

#include "qid/bitstring.hpp"

namespace qid {

struct EstimationParams {
  std::size_t s = 1000;  // retained subset size (2s transmitted)
  double eps_max = 0.07;
  double delta = 1e-10;

  std::size_t two_s() const { return 2 * s; }
  void validate() const;
};

// C(s,k) eps^k (1-eps)^(s-k), evaluated in log space.
double likelihood(std::size_t k, std::size_t s, double eps);
double log_likelihood(std::size_t k, std::size_t s, double eps);

// Regularized incomplete Beta I_x(a, b) by continued fraction; the log form
// keeps tails far below the double range usable.
double log_incomplete_beta(double a, double b, double x);
// log(1 - I_x(a, b)).
double log_incomplete_beta_complement(double a, double b, double x);

// Posterior probability that the true error rate exceeds eps_max, given an
// estimate eps_est from s retained bits and a uniform prior:
//   int_{eps_max}^1 f / int_0^1 f,  f(e) = (e^eps_est (1-e)^(1-eps_est))^s.
// Evaluated as the upper tail of Beta(s eps_est + 1, s (1 - eps_est) + 1).
double posterior_tail(double eps_est, double s, double eps_max);
double log_posterior_tail(double eps_est, double s, double eps_max);

// Same ratio by adaptive Gauss-Kronrod quadrature of the two integrals.
double log_posterior_tail_quadrature(double eps_est, double s, double eps_max);
double posterior_tail_quadrature(double eps_est, double s, double eps_max);

inline constexpr double kEpsLimResolution = 1e-5;

// Largest estimate whose posterior tail stays at or below delta.
double solve_eps_lim(const EstimationParams& params);
double solve_eps_lim(double s, double eps_max, double delta);

struct SubsetEstimate {
  std::size_t errors = 0;
  double eps_est = 0.0;
};

SubsetEstimate estimate_from_subset(const BitString& alice_bits, const BitString& bob_bits);

// Acceptance rule on the discrete grid k/s.
inline bool estimate_acceptable(std::size_t errors, std::size_t retained, double eps_lim) {
  return retained > 0 && static_cast<double>(errors) / static_cast<double>(retained) <= eps_lim;
}

}  // namespace qid
