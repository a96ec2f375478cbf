#pragma once

#include <filesystem>
#include <map>
#include <ostream>
#include <string>

#include <nlohmann/json.hpp>

#include "finelogic/cli/app.hpp"

namespace finelogic::cli {

/// State of one subcommand run: its output directory and the files it read
/// and wrote, for the run manifest.
struct Context {
  RunConfig cfg;
  std::string command;
  std::filesystem::path dir;
  std::ostream& out;
  std::ostream& err;
  std::map<std::string, std::string> inputs;
  std::vector<std::string> outputs;

  /// Records the digest of an input; throws ConfigError if it is missing.
  const std::filesystem::path& input(const std::filesystem::path& p);
  std::filesystem::path output(const std::string& name);
};

int cmd_eval_bench(Context& ctx);
int cmd_eval_steps(Context& ctx);
int cmd_probe(Context& ctx);
int cmd_gen_sft(Context& ctx);
int cmd_reward(Context& ctx);
int cmd_report(Context& ctx);

}  // namespace finelogic::cli
