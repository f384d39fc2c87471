#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "qid/config.hpp"

namespace qid {

enum ExitStatus : int { kExitOk = 0, kExitAbort = 1, kExitError = 2 };

const std::vector<std::string_view>& subcommands();

struct DispatchInputs {
  std::optional<std::string> vectors_path;  // auth-verify
};

// Writes `# seed=..., config_hash=...`, then a CSV header and rows to `out`;
// diagnostics go to `err`. Returns an ExitStatus.
int dispatch(std::string_view subcommand, const RunConfig& cfg, std::ostream& out, std::ostream& err,
             const DispatchInputs& inputs = {});

struct CliOptions {
  std::optional<std::string> config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_path;
  std::optional<std::uint64_t> trials;
  std::optional<std::string> vectors_path;
};

// Loads the config, applies flag overrides, dispatches and writes to the
// --out file when given.
int run_cli(std::string_view subcommand, const CliOptions& opts, std::ostream& out, std::ostream& err);

}  // namespace qid
