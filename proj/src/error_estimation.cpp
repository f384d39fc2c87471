#include "qid/error_estimation.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <queue>
#include <vector>

#include "qid/errors.hpp"

namespace qid {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double log_beta(double a, double b) { return std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b); }

// Modified Lentz evaluation of the incomplete Beta continued fraction.
double beta_continued_fraction(double a, double b, double x) {
  constexpr int kMaxIter = 200000;
  constexpr double kEps = 1e-16;
  constexpr double kTiny = 1e-300;
  const double qab = a + b, qap = a + 1.0, qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double step = d * c;
    h *= step;
    if (std::fabs(step - 1.0) < kEps) return h;
  }
  throw Error(Errc::NumericalFailure, "incomplete Beta continued fraction did not converge");
}

// log I_x(a,b) on the side where the continued fraction converges fast.
double log_beta_direct(double a, double b, double x) {
  const double log_front = a * std::log(x) + b * std::log1p(-x) - log_beta(a, b);
  return log_front + std::log(beta_continued_fraction(a, b, x)) - std::log(a);
}

// 0 * log(0) is taken as 0.
double xlogy(double x, double y) { return x == 0.0 ? 0.0 : x * std::log(y); }

// 15-point Gauss-Kronrod with embedded 7-point Gauss rule.
constexpr std::array<double, 8> kXgk = {0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
                                        0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
                                        0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
                                        0.207784955007898467600689403773245, 0.0};
constexpr std::array<double, 8> kWgk = {0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
                                        0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
                                        0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
                                        0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr std::array<double, 4> kWg = {0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
                                       0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct LogIntegrand {
  double eps_est;
  double s;
  double shift;
  double operator()(double e) const {
    return std::exp(s * (xlogy(eps_est, e) + xlogy(1.0 - eps_est, 1.0 - e)) - shift);
  }
  double log_value(double e) const { return s * (xlogy(eps_est, e) + xlogy(1.0 - eps_est, 1.0 - e)); }
};

struct GkEstimate {
  double kronrod;
  double error;
};

GkEstimate gauss_kronrod(const LogIntegrand& f, double lo, double hi) {
  const double center = 0.5 * (lo + hi);
  const double half = 0.5 * (hi - lo);
  const double fc = f(center);
  double k = fc * kWgk[7];
  double g = fc * kWg[3];
  for (int j = 0; j < 7; ++j) {
    const double dx = half * kXgk[j];
    const double sum = f(center - dx) + f(center + dx);
    k += kWgk[j] * sum;
    if (j % 2 == 1) g += kWg[j / 2] * sum;
  }
  return {k * half, std::fabs((k - g) * half)};
}

struct Piece {
  double lo, hi;
  GkEstimate est;
  bool operator<(const Piece& o) const { return est.error < o.est.error; }
};

// Globally adaptive: keep bisecting the piece with the largest error
// estimate. Recursive local tolerances stall on round-off; this does not.
double integrate(const LogIntegrand& f, std::vector<double> points) {
  std::priority_queue<Piece> heap;
  double total = 0.0, error = 0.0;
  for (std::size_t i = 0; i + 1 < points.size(); ++i) {
    Piece p{points[i], points[i + 1], gauss_kronrod(f, points[i], points[i + 1])};
    total += p.est.kronrod;
    error += p.est.error;
    heap.push(p);
  }
  constexpr double kTarget = 1e-13, kRequired = 1e-9;
  constexpr int kMaxPieces = 20000;
  while (error > kTarget * std::fabs(total) && static_cast<int>(heap.size()) < kMaxPieces) {
    const Piece worst = heap.top();
    const double mid = 0.5 * (worst.lo + worst.hi);
    if (!(mid > worst.lo && mid < worst.hi)) break;  // cannot split further
    heap.pop();
    const Piece left{worst.lo, mid, gauss_kronrod(f, worst.lo, mid)};
    const Piece right{mid, worst.hi, gauss_kronrod(f, mid, worst.hi)};
    total += left.est.kronrod + right.est.kronrod - worst.est.kronrod;
    error += left.est.error + right.est.error - worst.est.error;
    heap.push(left);
    heap.push(right);
  }
  // Re-sum to shed the drift of the running totals.
  total = error = 0.0;
  for (; !heap.empty(); heap.pop()) {
    total += heap.top().est.kronrod;
    error += heap.top().est.error;
  }
  if (error > kRequired * std::fabs(total))
    throw Error(Errc::NumericalFailure, "posterior quadrature did not converge");
  return total;
}

// Integral of f over [lo, hi] split at the given interior points.
double piecewise_integral(const LogIntegrand& f, double lo, double hi, std::vector<double> points) {
  points.push_back(lo);
  points.push_back(hi);
  std::erase_if(points, [&](double x) { return !(x >= lo && x <= hi); });
  std::sort(points.begin(), points.end());
  points.erase(std::unique(points.begin(), points.end()), points.end());
  return integrate(f, std::move(points));
}

}  // namespace

void EstimationParams::validate() const {
  if (s < 1) throw Error(Errc::RangeError, "s must be at least 1");
  if (!(eps_max > 0.0 && eps_max < 1.0)) throw Error(Errc::RangeError, "eps_max must lie in (0, 1)");
  if (!(delta > 0.0 && delta < 1.0)) throw Error(Errc::RangeError, "delta must lie in (0, 1)");
}

double log_likelihood(std::size_t k, std::size_t s, double eps) {
  if (k > s) throw Error(Errc::InvalidArgument, "k exceeds s");
  if (!(eps >= 0.0 && eps <= 1.0)) throw Error(Errc::RangeError, "eps outside [0, 1]");
  const auto kd = static_cast<double>(k), sd = static_cast<double>(s);
  const double log_choose = std::lgamma(sd + 1) - std::lgamma(kd + 1) - std::lgamma(sd - kd + 1);
  return log_choose + xlogy(kd, eps) + xlogy(sd - kd, 1.0 - eps);
}

double likelihood(std::size_t k, std::size_t s, double eps) { return std::exp(log_likelihood(k, s, eps)); }

double log_incomplete_beta(double a, double b, double x) {
  if (!(a > 0.0 && b > 0.0)) throw Error(Errc::InvalidArgument, "Beta parameters must be positive");
  if (x <= 0.0) return kNegInf;
  if (x >= 1.0) return 0.0;
  if (x < (a + 1.0) / (a + b + 2.0)) return log_beta_direct(a, b, x);
  return std::log1p(-std::exp(log_beta_direct(b, a, 1.0 - x)));
}

double log_incomplete_beta_complement(double a, double b, double x) { return log_incomplete_beta(b, a, 1.0 - x); }

double log_posterior_tail(double eps_est, double s, double eps_max) {
  if (!(eps_est >= 0.0 && eps_est <= 1.0)) throw Error(Errc::RangeError, "eps_est outside [0, 1]");
  if (!(s > 0.0)) throw Error(Errc::RangeError, "s must be positive");
  if (eps_max <= 0.0) return 0.0;
  if (eps_max >= 1.0) return kNegInf;
  return log_incomplete_beta_complement(s * eps_est + 1.0, s * (1.0 - eps_est) + 1.0, eps_max);
}

double posterior_tail(double eps_est, double s, double eps_max) {
  return std::exp(log_posterior_tail(eps_est, s, eps_max));
}

double log_posterior_tail_quadrature(double eps_est, double s, double eps_max) {
  if (!(eps_est >= 0.0 && eps_est <= 1.0)) throw Error(Errc::RangeError, "eps_est outside [0, 1]");
  if (!(s > 0.0)) throw Error(Errc::RangeError, "s must be positive");
  if (eps_max <= 0.0) return 0.0;
  if (eps_max >= 1.0) return kNegInf;

  const double width = std::max(std::sqrt(eps_est * (1.0 - eps_est) / s), 1.0 / s);
  std::vector<double> points;
  for (const double j : {0.0, 1.0, 2.0, 4.0, 8.0, 16.0, 32.0, 64.0}) {
    points.push_back(eps_est + j * width);
    points.push_back(eps_est - j * width);
  }

  LogIntegrand full{eps_est, s, 0.0};
  full.shift = full.log_value(eps_est);
  const double den = piecewise_integral(full, 0.0, 1.0, points);

  LogIntegrand tail{eps_est, s, 0.0};
  const double peak = std::max(eps_max, eps_est);
  tail.shift = tail.log_value(peak);
  std::vector<double> tail_points = points;
  if (eps_est < eps_max) {
    // Decay length of the integrand just above eps_max.
    const double slope = s * (eps_est / eps_max - (1.0 - eps_est) / (1.0 - eps_max));
    const double scale = 1.0 / std::fabs(slope);
    for (const double j : {1.0, 2.0, 4.0, 8.0, 16.0, 32.0, 64.0, 128.0}) tail_points.push_back(eps_max + j * scale);
  }
  const double num = piecewise_integral(tail, eps_max, 1.0, tail_points);
  if (!(num > 0.0) || !(den > 0.0)) throw Error(Errc::NumericalFailure, "posterior quadrature underflow");
  return std::log(num) + tail.shift - std::log(den) - full.shift;
}

double posterior_tail_quadrature(double eps_est, double s, double eps_max) {
  return std::exp(log_posterior_tail_quadrature(eps_est, s, eps_max));
}

double solve_eps_lim(double s, double eps_max, double delta) {
  if (!(s > 0.0)) throw Error(Errc::RangeError, "s must be positive");
  if (!(eps_max > 0.0 && eps_max < 1.0)) throw Error(Errc::RangeError, "eps_max must lie in (0, 1)");
  if (!(delta > 0.0 && delta < 1.0)) throw Error(Errc::RangeError, "delta must lie in (0, 1)");
  const double log_delta = std::log(delta);
  if (!(log_posterior_tail(0.0, s, eps_max) < log_delta))
    throw Error(Errc::NoSolution, "even an error-free subset leaves the tail above delta");
  double lo = 0.0, hi = eps_max;
  if (log_posterior_tail(hi, s, eps_max) <= log_delta) return hi;
  // Bisect well below the reporting resolution.
  while (hi - lo > kEpsLimResolution * 1e-3) {
    const double mid = 0.5 * (lo + hi);
    if (log_posterior_tail(mid, s, eps_max) <= log_delta)
      lo = mid;
    else
      hi = mid;
  }
  return lo;
}

double solve_eps_lim(const EstimationParams& params) {
  params.validate();
  return solve_eps_lim(static_cast<double>(params.s), params.eps_max, params.delta);
}

SubsetEstimate estimate_from_subset(const BitString& alice_bits, const BitString& bob_bits) {
  SubsetEstimate out;
  out.errors = hamming_distance(alice_bits, bob_bits);
  out.eps_est = alice_bits.empty() ? 0.0 : static_cast<double>(out.errors) / static_cast<double>(alice_bits.size());
  return out;
}

}  // namespace qid
