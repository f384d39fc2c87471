#include "qid/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

#include "qid/errors.hpp"

namespace qid {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::string fmt_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

// Value-level failures are reported by the caller with the line number.
struct BadValue {};

double to_double(const std::string& s) {
  double v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size() || !std::isfinite(v)) throw BadValue{};
  return v;
}

std::uint64_t to_u64(const std::string& s) {
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec == std::errc{} && ptr == s.data() + s.size()) return v;
  // Accept integral values written in floating notation, e.g. 6.25e6.
  const double d = to_double(s);
  if (d < 0 || d != std::floor(d) || d > 1.8e19) throw BadValue{};
  return static_cast<std::uint64_t>(d);
}

std::vector<double> to_list(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(to_double(trim(item)));
  if (out.empty()) throw BadValue{};
  return out;
}

std::string fmt_list(const std::vector<double>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + fmt_double(v[i]);
  return out;
}

struct Field {
  std::string name;
  std::function<void(RunConfig&, const std::string&)> set;
  std::function<std::string(const RunConfig&)> get;
  std::function<bool(const RunConfig&)> ok;
  std::string range;
};

template <class T>
Field real(std::string name, T RunConfig::*m, std::function<bool(double)> ok, std::string range) {
  return Field{std::move(name), [m](RunConfig& c, const std::string& v) { c.*m = to_double(v); },
               [m](const RunConfig& c) { return fmt_double(c.*m); }, [m, ok](const RunConfig& c) { return ok(c.*m); },
               std::move(range)};
}

template <class T>
Field integer(std::string name, T RunConfig::*m, std::function<bool(std::uint64_t)> ok, std::string range) {
  return Field{std::move(name), [m](RunConfig& c, const std::string& v) { c.*m = static_cast<T>(to_u64(v)); },
               [m](const RunConfig& c) { return std::to_string(c.*m); },
               [m, ok](const RunConfig& c) { return ok(static_cast<std::uint64_t>(c.*m)); }, std::move(range)};
}

Field list(std::string name, std::vector<double> RunConfig::*m, std::function<bool(double)> ok, std::string range) {
  return Field{std::move(name), [m](RunConfig& c, const std::string& v) { c.*m = to_list(v); },
               [m](const RunConfig& c) { return fmt_list(c.*m); },
               [m, ok](const RunConfig& c) {
                 for (const double x : c.*m)
                   if (!ok(x)) return false;
                 return !(c.*m).empty();
               },
               std::move(range)};
}

auto open_closed(double lo, double hi) {
  return [lo, hi](double x) { return x > lo && x <= hi; };
}
auto closed_open(double lo, double hi) {
  return [lo, hi](double x) { return x >= lo && x < hi; };
}
auto open_open(double lo, double hi) {
  return [lo, hi](double x) { return x > lo && x < hi; };
}
auto closed(double lo, double hi) {
  return [lo, hi](double x) { return x >= lo && x <= hi; };
}
auto at_least(std::uint64_t lo) {
  return [lo](std::uint64_t x) { return x >= lo; };
}

const std::vector<Field>& fields() {
  static const std::vector<Field> table = [] {
    std::vector<Field> f;
    f.push_back(real("mu", &RunConfig::mu, open_closed(0, 1.5), "(0, 1.5]"));
    f.push_back(real("eta_tl", &RunConfig::eta_tl, open_closed(0, 1), "(0, 1]"));
    f.push_back(real("eta_bob", &RunConfig::eta_bob, open_closed(0, 1), "(0, 1]"));
    f.push_back(real("eta_det", &RunConfig::eta_det, open_closed(0, 1), "(0, 1]"));
    f.push_back(Field{"eta_overall",
                      [](RunConfig& c, const std::string& v) {
                        if (v == "none")
                          c.eta_overall.reset();
                        else
                          c.eta_overall = to_double(v);
                      },
                      [](const RunConfig& c) { return c.eta_overall ? fmt_double(*c.eta_overall) : "none"; },
                      [](const RunConfig& c) { return !c.eta_overall || (*c.eta_overall > 0 && *c.eta_overall <= 1); },
                      "(0, 1] or none"});
    f.push_back(real("eps", &RunConfig::eps, closed_open(0, 0.5), "[0, 0.5)"));
    f.push_back(real("eps_max", &RunConfig::eps_max, open_open(0, 1), "(0, 1)"));
    f.push_back(real("delta", &RunConfig::delta, open_open(0, 1), "(0, 1)"));
    f.push_back(integer("s", &RunConfig::s, [](std::uint64_t x) { return x >= 1 && 2 * x <= kMaxVerdictCount; },
                        "[1, 16383]"));
    f.push_back(integer("a", &RunConfig::a, at_least(1), ">= [log2(1/delta)]"));
    f.push_back(real("n_pulses", &RunConfig::n_pulses, closed(2, 1e13), "[2, 1e13]"));
    f.push_back(integer("seed", &RunConfig::seed, at_least(0), "64-bit unsigned"));
    f.push_back(integer("trials", &RunConfig::trials, at_least(1), ">= 1"));
    f.push_back(integer("n_is", &RunConfig::n_is, at_least(1), ">= 1"));
    f.push_back(real("eps_tol", &RunConfig::eps_tol, closed_open(0, 1), "[0, 1)"));
    f.push_back(real("eps_chan", &RunConfig::eps_chan, closed(0, 0.5), "[0, 0.5]"));
    f.push_back(real("p_bar", &RunConfig::p_bar, closed(0.5, 1), "[0.5, 1]"));
    f.push_back(Field{"eve",
                      [](RunConfig& c, const std::string& v) {
                        if (v == "none")
                          c.eve = EveKindSetting::None;
                        else if (v == "intercept_resend")
                          c.eve = EveKindSetting::InterceptResend;
                        else if (v == "per_bit_guess")
                          c.eve = EveKindSetting::PerBitGuess;
                        else if (v == "beamsplit")
                          c.eve = EveKindSetting::Beamsplit;
                        else
                          throw BadValue{};
                      },
                      [](const RunConfig& c) -> std::string {
                        switch (c.eve) {
                          case EveKindSetting::None: return "none";
                          case EveKindSetting::InterceptResend: return "intercept_resend";
                          case EveKindSetting::PerBitGuess: return "per_bit_guess";
                          case EveKindSetting::Beamsplit: return "beamsplit";
                        }
                        return "none";
                      },
                      [](const RunConfig&) { return true; }, "none|intercept_resend|per_bit_guess|beamsplit"});
    f.push_back(real("eve_param", &RunConfig::eve_param, closed(0, 1), "[0, 1]"));
    f.push_back(Field{"attack",
                      [](RunConfig& c, const std::string& v) {
                        if (v == "none")
                          c.attack = AttackSetting::None;
                        else if (v == "three_party")
                          c.attack = AttackSetting::ThreeParty;
                        else
                          throw BadValue{};
                      },
                      [](const RunConfig& c) -> std::string {
                        return c.attack == AttackSetting::ThreeParty ? "three_party" : "none";
                      },
                      [](const RunConfig&) { return true; }, "none|three_party"});
    f.push_back(integer("sessions", &RunConfig::sessions, at_least(1), ">= 1"));
    f.push_back(integer("pool_bits", &RunConfig::pool_bits, at_least(0), ">= 0"));
    f.push_back(integer("vectors", &RunConfig::vectors, at_least(1), ">= 1"));
    f.push_back(integer("message_bits", &RunConfig::message_bits, at_least(0), "[0, 61 (auth_d - 1) - 1]"));
    f.push_back(integer("auth_d", &RunConfig::auth_d, at_least(2), ">= 2"));
    f.push_back(list("epslim_s", &RunConfig::epslim_s, [](double x) { return x >= 1 && x <= 1e7; }, "[1, 1e7]"));
    f.push_back(list("epslim_delta", &RunConfig::epslim_delta, open_open(0, 1), "(0, 1)"));
    f.push_back(list("epslim_eps_max", &RunConfig::epslim_eps_max, open_open(0, 1), "(0, 1)"));
    f.push_back(real("eps_grid_step", &RunConfig::eps_grid_step, open_closed(0, 0.5), "(0, 0.5]"));
    f.push_back(real("eps_grid_max", &RunConfig::eps_grid_max, open_open(0, 0.5), "(0, 0.5)"));
    f.push_back(real("mu_step", &RunConfig::mu_step, open_closed(0, 1.5), "(0, 1.5]"));
    f.push_back(list("eta_tl_list", &RunConfig::eta_tl_list, open_closed(0, 1), "(0, 1]"));
    return f;
  }();
  return table;
}

[[noreturn]] void range_error(const std::string& field, const std::string& detail) {
  throw Error(Errc::RangeError, "field '" + field + "' " + detail);
}

}  // namespace

void RunConfig::validate() const {
  for (const auto& f : fields())
    if (!f.ok(*this)) range_error(f.name, "= " + f.get(*this) + " outside " + f.range);
  if (static_cast<std::int64_t>(a) < bracket(std::log2(1.0 / delta)))
    range_error("a", "must be at least [log2(1/delta)] = " + std::to_string(bracket(std::log2(1.0 / delta))));
  if (n_is > 0 && protocol1().k >= n_is) range_error("eps_tol", "gives k >= n_is");
  if (message_bits > 61 * (auth_d - 1) - 1) range_error("message_bits", "exceeds the capacity of auth_d digits");
  if (eve == EveKindSetting::PerBitGuess && eve_param < 0.5) range_error("eve_param", "must be >= 0.5 for per_bit_guess");
}

ChannelParams RunConfig::channel() const {
  ChannelParams c;
  c.mu = mu;
  c.eta_tl = eta_tl;
  c.eta_bob = eta_bob;
  c.eta_det = eta_det;
  c.eta_overall = eta_overall;
  c.eps_intrinsic = eps;
  return c;
}

BudgetParams RunConfig::budget() const {
  BudgetParams b;
  b.mu = mu;
  b.eta_tl = eta_tl;
  b.eta_bob = eta_bob;
  b.eta_det = eta_det;
  b.eta_overall = eta_overall;
  b.eps = eps;
  b.eps_max = eps_max;
  b.delta = delta;
  b.s = s;
  b.a = a;
  b.n_pulses = n_pulses;
  return b;
}

EstimationParams RunConfig::estimation() const { return EstimationParams{s, eps_max, delta}; }

Protocol1Config RunConfig::protocol1() const {
  return Protocol1Config{n_is, eps_tol, tolerated_errors(n_is, eps_tol)};
}

Protocol2Params RunConfig::protocol2() const {
  Protocol2Params p;
  p.channel = channel();
  p.estimation = estimation();
  p.n_pulses = static_cast<std::size_t>(std::llround(n_pulses));
  return p;
}

EveStrategy RunConfig::eve_strategy() const {
  switch (eve) {
    case EveKindSetting::None: return NoEve{};
    case EveKindSetting::InterceptResend: return InterceptResend{eve_param};
    case EveKindSetting::PerBitGuess: return PerBitGuess{eve_param};
    case EveKindSetting::Beamsplit: return Beamsplit{eve_param};
  }
  return NoEve{};
}

RunConfig parse_config(std::string_view text) {
  RunConfig cfg;
  std::set<std::string> seen;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    start = end + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    const std::string body = trim(line);
    if (body.empty()) {
      if (end == text.size()) break;
      continue;
    }
    const auto where = "line " + std::to_string(line_no) + ": ";
    const auto eq = body.find('=');
    if (eq == std::string::npos) throw Error(Errc::ParseError, where + "expected key=value");
    const std::string key = trim(std::string_view(body).substr(0, eq));
    const std::string value = trim(std::string_view(body).substr(eq + 1));
    const auto& table = fields();
    const auto it = std::find_if(table.begin(), table.end(), [&](const Field& f) { return f.name == key; });
    if (it == table.end()) throw Error(Errc::ParseError, where + "unknown key '" + key + "'");
    if (!seen.insert(key).second) throw Error(Errc::ParseError, where + "duplicate key '" + key + "'");
    try {
      it->set(cfg, value);
    } catch (const BadValue&) {
      throw Error(Errc::ParseError, where + "bad value '" + value + "' for '" + key + "'");
    }
    if (end == text.size()) break;
  }
  cfg.validate();
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::ParseError, "cannot open config file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string serialize(const RunConfig& cfg) {
  std::string out;
  for (const auto& f : fields()) out += f.name + "=" + f.get(cfg) + "\n";
  return out;
}

std::uint64_t config_hash(const RunConfig& cfg) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const unsigned char c : serialize(cfg)) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace qid
