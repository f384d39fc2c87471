#include "qid/budget.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numbers>
#include <vector>

#include "qid/channel.hpp"
#include "qid/errors.hpp"

namespace qid {

namespace {

constexpr double kLn2 = std::numbers::ln2;

double log_binomial(double n, double k) { return std::lgamma(n + 1) - std::lgamma(k + 1) - std::lgamma(n - k + 1); }

}  // namespace

std::int64_t bracket(double x) { return static_cast<std::int64_t>(std::floor(x)) + 1; }

std::size_t tolerated_errors(std::size_t n, double eps) {
  if (!(eps >= 0.0)) throw Error(Errc::RangeError, "error rate must be non-negative");
  return static_cast<std::size_t>(bracket(eps * static_cast<double>(n)));
}

double deception_probability_exact(std::span<const double> p, std::size_t k) {
  if (k >= p.size()) return 1.0;
  // dist[j] = Pr[exactly j wrong guesses so far], j <= k.
  std::vector<double> dist(k + 1, 0.0);
  dist[0] = 1.0;
  for (const double pi : p) {
    if (!(pi >= 0.0 && pi <= 1.0)) throw Error(Errc::RangeError, "guess probability outside [0, 1]");
    const double qi = 1.0 - pi;
    for (std::size_t j = k; j > 0; --j) dist[j] = dist[j] * pi + dist[j - 1] * qi;
    dist[0] *= pi;
  }
  double total = 0.0;
  for (const double v : dist) total += v;
  return total;
}

double deception_log_bound(std::size_t n, double eps, double p_bar) {
  if (!(p_bar >= 0.5 && p_bar <= 1.0)) throw Error(Errc::RangeError, "p_bar must lie in [1/2, 1]");
  const auto nd = static_cast<double>(n);
  const double k = std::min<double>(static_cast<double>(tolerated_errors(n, eps)), nd);
  return nd * std::log(p_bar) + k * kLn2 + log_binomial(nd, k);
}

double deception_probability_bound(std::size_t n, double eps, double p_bar) {
  return std::exp(deception_log_bound(n, eps, p_bar));
}

double deception_base(std::size_t n, double eps, double p_bar) {
  const auto nd = static_cast<double>(n);
  const double k = std::min<double>(static_cast<double>(tolerated_errors(n, eps)), nd);
  return std::exp((k * kLn2 + log_binomial(nd, k)) / nd) * p_bar;
}

double p_crit(double eps) {
  if (!(eps >= 0.0 && eps < 0.5)) throw Error(Errc::RangeError, "eps must lie in [0, 1/2)");
  return std::exp2(-(eps + binary_entropy(eps)));
}

double p_crit_finite(double eps, std::size_t n) {
  const auto nd = static_cast<double>(n);
  const double k = std::min<double>(static_cast<double>(tolerated_errors(n, eps)), nd);
  return std::exp(-(k * kLn2 + log_binomial(nd, k)) / nd);
}

double info_limit(double eps) { return 1.0 - binary_entropy(p_crit(eps)); }

double info_ab(double eps) { return 1.0 - binary_entropy(eps); }

double info_opt_default(double eps) {
  if (!(eps >= 0.0 && eps <= 0.5)) throw Error(Errc::RangeError, "eps must lie in [0, 1/2]");
  return 1.0 - binary_entropy(0.5 + std::sqrt(eps * (1.0 - eps)));
}

double p_bar_from_info(double info) {
  if (!(info >= 0.0 && info <= 1.0)) throw Error(Errc::RangeError, "information must lie in [0, 1]");
  double lo = 0.5, hi = 1.0;
  for (int i = 0; i < 200 && hi - lo > 1e-15; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (1.0 - binary_entropy(mid) < info)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

double eps_upper_bound(const InfoCurve& info_opt) {
  constexpr double left = 0.01, right = 0.15;
  auto gap = [&](double e) { return info_opt(e) - info_limit(e); };
  if (gap(left) >= 0.0) return left;
  if (gap(right) < 0.0) throw Error(Errc::NoRoot, "information curves do not cross on [0.01, 0.15]");
  double lo = left, hi = right;
  while (hi - lo > 1e-9) {
    const double mid = 0.5 * (lo + hi);
    if (gap(mid) < 0.0)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

BudgetParams BudgetParams::with_eta_tl(double new_eta_tl) const {
  BudgetParams out = *this;
  if (out.eta_overall) *out.eta_overall *= new_eta_tl / eta_tl;
  out.eta_tl = new_eta_tl;
  return out;
}

void BudgetParams::validate() const {
  ChannelParams ch;
  ch.mu = mu;
  ch.eta_tl = eta_tl;
  ch.eta_bob = eta_bob;
  ch.eta_det = eta_det;
  ch.eta_overall = eta_overall;
  ch.validate();
  if (!(eps >= 0.0 && eps < 1.0)) throw Error(Errc::RangeError, "eps out of range");
  if (!(eps_max > 0.0 && eps_max < 1.0)) throw Error(Errc::RangeError, "eps_max out of range");
  if (!(delta > 0.0 && delta < 1.0)) throw Error(Errc::RangeError, "delta out of range");
  if (!(n_pulses >= 2.0)) throw Error(Errc::RangeError, "n_pulses must be at least 2");
  if (static_cast<std::int64_t>(a) < bracket(std::log2(1.0 / delta)))
    throw Error(Errc::RangeError, "tag length a is below [log2(1/delta)]");
}

unsigned position_bits(double n_pulses) {
  if (!(n_pulses >= 1.0)) throw Error(Errc::RangeError, "n_pulses must be positive");
  if (n_pulses == std::floor(n_pulses) && n_pulses < 9.2e18)
    return static_cast<unsigned>(std::bit_width(static_cast<std::uint64_t>(n_pulses)));
  return static_cast<unsigned>(bracket(std::log2(n_pulses)));
}

std::uint64_t b_min(double n_pulses, std::size_t s, std::size_t a) {
  if (!(n_pulses >= 2.0)) throw Error(Errc::RangeError, "b_min needs N >= 2");
  return 2 * static_cast<std::uint64_t>(s) * (position_bits(n_pulses) + 2) + 32 + 3 * static_cast<std::uint64_t>(a);
}

double expected_sifted(double n_pulses, const BudgetParams& params) { return 0.5 * params.eta() * params.mu * n_pulses; }

double corrected_len(double n_sifted, double eps) {
  if (!(eps >= 0.0 && eps < 1.0)) throw Error(Errc::RangeError, "eps out of range");
  return std::max(0.0, (1.0 - 2.7 * std::pow(eps, 2.0 / 3.0)) * n_sifted);
}

DistilledBreakdown distilled_breakdown(const BudgetParams& params, double n_sifted, double n_corrected) {
  DistilledBreakdown out;
  const double n = params.n_pulses;
  const double leak = params.eta() * params.mu * params.mu / (8.0 * params.eta_tl);
  out.n_sifted = n_sifted;
  out.n_corrected = n_corrected;
  out.beamsplit = leak * n;
  out.fuchs = 2.0 * params.eps_max * n_sifted / kLn2;
  out.safeguard = 5.0 * std::sqrt(std::max(0.0, n * leak * (1.0 - leak)) +
                                  2.0 * (kLn2 + 1.0) * n_sifted * params.eps_max / (kLn2 * kLn2));
  out.pa_compression = -std::log(params.delta * kLn2) / kLn2;
  out.raw = n_corrected - out.beamsplit - out.fuchs - out.safeguard - out.pa_compression;
  out.distilled = std::max(0.0, out.raw);
  out.low_intensity_regime = params.mu <= 1.0;
  return out;
}

DistilledBreakdown distilled_breakdown(const BudgetParams& params) {
  const double ns = expected_sifted(params.n_pulses, params);
  return distilled_breakdown(params, ns, corrected_len(ns, params.eps));
}

double distilled_len(const BudgetParams& params) { return distilled_breakdown(params).distilled; }

std::vector<double> mu_grid(double step, double mu_max) {
  std::vector<double> grid;
  for (int i = 1;; ++i) {
    const double mu = step * i;
    if (mu > mu_max + 1e-12) break;
    grid.push_back(mu);
  }
  return grid;
}

MuOptimum optimize_mu(const BudgetParams& params, std::span<const double> grid) {
  MuOptimum best;
  bool any = false;
  for (const double mu : grid) {
    if (!(mu > 0.0 && mu <= 1.5)) throw Error(Errc::RangeError, "mu grid must lie in (0, 1.5]");
    BudgetParams p = params;
    p.mu = mu;
    const double ratio = distilled_len(p) / p.n_pulses;
    if (ratio > 0.0 && (!any || ratio > best.ratio)) {
      best = {mu, ratio};
      any = true;
    }
  }
  if (!any) throw Error(Errc::AllZero, "distilled length is zero across the mu grid");
  return best;
}

MuOptimum optimize_mu(const BudgetParams& params) {
  const auto grid = mu_grid();
  return optimize_mu(params, grid);
}

double break_even_n(const BudgetParams& params, const BreakEvenOptions& opts) {
  auto distilled_at = [&](double n) {
    BudgetParams p = params;
    p.n_pulses = n;
    if (opts.mode == MuMode::Fixed) return distilled_len(p);
    double best = 0.0;
    for (const double mu : opts.grid) {
      p.mu = mu;
      best = std::max(best, distilled_len(p));
    }
    return best;
  };
  auto b_min_at = [&](double n) {
    return opts.b_min_override ? opts.b_min_override(n) : static_cast<double>(b_min(n, params.s, params.a));
  };
  auto breaks_even = [&](double n) { return distilled_at(n) >= b_min_at(n); };

  double lo = std::ceil(opts.n_min);
  double hi = std::floor(opts.n_max);
  if (breaks_even(lo)) return lo;
  if (!breaks_even(hi)) throw Error(Errc::NeverBreaksEven, "distilled key never covers b_min below n_max");
  while (hi - lo > 1.0) {
    const double mid = std::floor(0.5 * (lo + hi));
    if (breaks_even(mid))
      hi = mid;
    else
      lo = mid;
  }
  return hi;
}

}  // namespace qid
