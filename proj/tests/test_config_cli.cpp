#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "qid/cli.hpp"
#include "qid/config.hpp"
#include "qid/errors.hpp"

using namespace qid;

namespace {

Errc code_of(std::string_view text) {
  try {
    parse_config(text);
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return Errc::InvalidArgument;
}

struct Run {
  int status;
  std::string out, err;
};

Run run(std::string_view sub, const RunConfig& cfg, const DispatchInputs& in = {}) {
  std::ostringstream out, err;
  const int status = dispatch(sub, cfg, out, err, in);
  return {status, out.str(), err.str()};
}

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / ("qid_test_" + name)).string();
}

}  // namespace

TEST_CASE("empty config gives the published parameters") {
  const auto cfg = parse_config("");
  CHECK(cfg.mu == 0.8);
  CHECK(cfg.eta_tl == 0.63);
  CHECK(cfg.eta_bob == 0.35);
  CHECK(cfg.eta_det == 0.55);
  CHECK(cfg.eps == 0.004);
  CHECK(cfg.eps_max == 0.07);
  CHECK(cfg.delta == 1e-10);
  CHECK(cfg.s == 1000);
  CHECK(cfg.a == 61);
  CHECK(parse_config("# only a comment\n\n   \n").mu == 0.8);
}

TEST_CASE("range and parse errors") {
  CHECK(code_of("mu=1.7") == Errc::RangeError);
  try {
    parse_config("mu=1.7");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("mu") != std::string::npos);
  }
  CHECK(code_of("s=10\nbogus=1") == Errc::ParseError);
  try {
    parse_config("s=10\n\nbogus=1");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("line 3") != std::string::npos);
  }
  CHECK(code_of("mu") == Errc::ParseError);
  CHECK(code_of("mu=abc") == Errc::ParseError);
  CHECK(code_of("mu=0.5\nmu=0.6") == Errc::ParseError);
  CHECK(code_of("a=20") == Errc::RangeError);  // below [log2 1e10] = 34
  CHECK(code_of("n_is=50\neps_tol=0.99") == Errc::RangeError);
  CHECK(code_of("eve=per_bit_guess\neve_param=0.3") == Errc::RangeError);
  CHECK(code_of("eve=telepathy") == Errc::ParseError);
}

TEST_CASE("serialize and parse are inverse") {
  auto cfg = parse_config("delta=1e-10\nmu=0.35\neta_overall=none\nepslim_s=1000,4000\neve=beamsplit\neve_param=0.2");
  const auto text = serialize(cfg);
  CHECK(text.find("delta=1e-10") != std::string::npos);
  const auto again = parse_config(text);
  CHECK(serialize(again) == text);
  CHECK(config_hash(again) == config_hash(cfg));
  CHECK(!again.eta_overall);
  CHECK(again.epslim_s.size() == 2);
  cfg.mu = 0.36;
  CHECK(config_hash(cfg) != config_hash(again));
}

TEST_CASE("conversions carry the fields") {
  const auto cfg = parse_config("mu=0.5\neps=0.01\nn_pulses=100000\ns=500");
  CHECK(cfg.channel().mu == 0.5);
  CHECK(cfg.channel().eps_intrinsic == 0.01);
  CHECK(cfg.budget().n_pulses == 100000);
  CHECK(cfg.estimation().s == 500);
  CHECK(cfg.protocol2().n_pulses == 100000);
  CHECK(cfg.protocol1().k == 1);
}

TEST_CASE("dispatch basics") {
  const auto cfg = parse_config("");
  const auto r = run("epslim", cfg);
  CHECK(r.status == kExitOk);
  CHECK(r.out.rfind("# seed=1, config_hash=", 0) == 0);
  std::istringstream lines(r.out);
  std::string comment, header, row, extra;
  std::getline(lines, comment);
  std::getline(lines, header);
  std::getline(lines, row);
  CHECK(header == "s,delta,eps_max,eps_lim");
  CHECK(!std::getline(lines, extra));
  const double eps_lim = std::stod(row.substr(row.rfind(',') + 1));
  CHECK(std::abs(eps_lim - 0.024) <= 0.001);

  const auto bad = run("teleport", cfg);
  CHECK(bad.status == kExitError);
  CHECK(bad.out.empty());
  CHECK(bad.err.find("UnknownSubcommand") != std::string::npos);
  CHECK(subcommands().size() == 9);
}

TEST_CASE("every subcommand is deterministic") {
  auto cfg = parse_config("n_pulses=100000\ntrials=2000\nmessage_bits=200\nauth_d=5\nvectors=3");
  for (const auto sub : subcommands()) {
    if (sub == "auth-verify") continue;
    const auto a = run(sub, cfg);
    const auto b = run(sub, cfg);
    CHECK_MESSAGE(a.status != kExitError, sub);
    CHECK_MESSAGE(a.out == b.out, sub);
  }
  cfg.seed = 2;
  CHECK(run("simulate-qkd", cfg).out != run("simulate-qkd", parse_config("n_pulses=100000")).out);
}

TEST_CASE("protocol2 exit status follows the outcome") {
  auto cfg = parse_config("n_pulses=100000\nsessions=3");
  CHECK(run("protocol2", cfg).status == kExitOk);
  cfg.eve = EveKindSetting::InterceptResend;
  cfg.eve_param = 1.0;
  const auto r = run("protocol2", cfg);
  CHECK(r.status == kExitAbort);
  CHECK(r.out.find(",1,0,") != std::string::npos);  // identified, not refuelled
}

TEST_CASE("auth vectors verify and tampering is detected") {
  const auto cfg = parse_config("message_bits=300\nauth_d=7\nvectors=4");
  const auto made = run("auth-tag", cfg);
  REQUIRE(made.status == kExitOk);
  const auto good_path = temp_path("good.csv");
  std::ofstream(good_path) << made.out;
  DispatchInputs in{good_path};
  const auto ok = run("auth-verify", cfg, in);
  CHECK(ok.status == kExitOk);
  CHECK(ok.out.find(",0\n") == std::string::npos);

  // Flip the last hex digit of the last tag.
  std::string tampered = made.out;
  const auto pos = tampered.find_last_not_of('\n');
  tampered[pos] = tampered[pos] == '0' ? '1' : '0';
  const auto bad_path = temp_path("bad.csv");
  std::ofstream(bad_path) << tampered;
  const auto bad = run("auth-verify", cfg, DispatchInputs{bad_path});
  CHECK(bad.status == kExitAbort);
  CHECK(bad.out.find(",0\n") != std::string::npos);

  CHECK(run("auth-verify", cfg, DispatchInputs{temp_path("missing.csv")}).status == kExitError);
  CHECK(run("auth-verify", cfg).status == kExitError);
  std::remove(good_path.c_str());
  std::remove(bad_path.c_str());
}

TEST_CASE("run_cli applies flag overrides and writes --out") {
  const auto cfg_path = temp_path("cfg.txt");
  std::ofstream(cfg_path) << "mu=0.5\n";
  const auto out_path = temp_path("out.csv");
  CliOptions opts;
  opts.config_path = cfg_path;
  opts.seed = 42;
  opts.out_path = out_path;
  std::ostringstream out, err;
  CHECK(run_cli("budget", opts, out, err) == kExitOk);
  CHECK(out.str().empty());
  std::ifstream in(out_path);
  std::string first;
  std::getline(in, first);
  CHECK(first.rfind("# seed=42,", 0) == 0);

  std::ofstream(cfg_path) << "mu=7\n";
  std::ostringstream out2, err2;
  CHECK(run_cli("budget", opts, out2, err2) == kExitError);
  CHECK(err2.str().find("RangeError") != std::string::npos);
  std::remove(cfg_path.c_str());
  std::remove(out_path.c_str());
}
