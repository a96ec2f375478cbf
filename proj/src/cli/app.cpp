#include <omp.h>

#include <CLI11.hpp>
#include <fstream>
#include <functional>

#include "commands.hpp"
#include "finelogic/probe/dump.hpp"
#include "finelogic/probe/suite.hpp"
#include "finelogic/util/hash.hpp"

namespace finelogic::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Flags {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> jobs;
  bool dry_run = false;
};

void add_common(CLI::App* sub, Flags& f) {
  sub->add_option("--config,-c", f.config, "YAML run configuration")->required()->check(CLI::ExistingFile);
  sub->add_option("--out,-o", f.out, "output directory, overriding the config");
  sub->add_option("--seed", f.seed, "seed, overriding the config");
  sub->add_option("--jobs,-j", f.jobs, "bound on parallel workers")->check(CLI::PositiveNumber);
  sub->add_flag("--dry-run", f.dry_run, "print the resolved config and exit");
}

/// Exit code and error kind for an exception thrown by a subcommand.
std::pair<int, std::string> classify(std::exception_ptr ep) {
  try {
    std::rethrow_exception(ep);
  } catch (const ConfigError&) {
    return {kInvalid, "ConfigError"};
  } catch (const bench::ManifestMismatch&) {
    return {kInvalid, "ManifestMismatch"};
  } catch (const bench::SchemaError&) {
    return {kInvalid, "SchemaError"};
  } catch (const bench::MissingExemplar&) {
    return {kInvalid, "MissingExemplar"};
  } catch (const probe::DumpError&) {
    return {kInvalid, "DumpError"};
  } catch (const probe::SplitLeakage&) {
    return {kInvalid, "SplitLeakage"};
  } catch (const sft::ManifestShortfall&) {
    return {kInvalid, "ManifestShortfall"};
  } catch (const sft::GlossaryGap&) {
    return {kInvalid, "GlossaryGap"};
  } catch (const reward::AlignmentError&) {
    return {kInvalid, "AlignmentError"};
  } catch (const reward::OutOfRangeComponent&) {
    return {kInvalid, "OutOfRangeComponent"};
  } catch (const std::exception&) {
    return {kInternal, "InternalError"};
  }
}

std::string what_of(std::exception_ptr ep) {
  try {
    std::rethrow_exception(ep);
  } catch (const std::exception& e) {
    return e.what();
  } catch (...) {
    return "unknown error";
  }
}

void write_manifest(const Context& ctx, int code) {
  json inputs = json::object();
  for (const auto& [p, digest] : ctx.inputs) inputs[p] = digest;
  json outputs = json::object();
  for (const auto& name : ctx.outputs) {
    auto p = ctx.dir / name;
    if (fs::is_regular_file(p)) outputs[name] = util::sha256_file(p);
  }
  json config = config_to_json(ctx.cfg);
  json m = {{"toolkit", "finelogic"},
            {"version", kVersion},
            {"command", ctx.command},
            {"config_sha256", util::sha256_hex(config.dump())},
            {"config", config},
            {"seed", ctx.cfg.seed},
            {"jobs", ctx.cfg.jobs},
            {"inputs", inputs},
            {"outputs", outputs},
            {"exit_code", code}};
  std::ofstream(ctx.dir / "manifest.json") << m.dump(2) << '\n';
}

int execute(const std::string& command, const Flags& flags, const std::function<int(Context&)>& body, std::ostream& out,
            std::ostream& err) {
  std::optional<Context> ctx;
  try {
    RunConfig cfg = load_config(flags.config);
    if (!flags.out.empty()) cfg.out = fs::absolute(flags.out);
    if (flags.seed) cfg.seed = *flags.seed;
    if (flags.jobs) cfg.jobs = *flags.jobs;
    if (flags.dry_run) {
      out << config_to_json(cfg).dump(2) << '\n';
      return kOk;
    }
    omp_set_num_threads(static_cast<int>(cfg.jobs));
    fs::path dir = cfg.out / command;
    fs::create_directories(dir);
    fs::remove(dir / "error.json");
    ctx.emplace(Context{std::move(cfg), command, dir, out, err, {}, {}});
    int code = body(*ctx);
    write_manifest(*ctx, code);
    return code;
  } catch (...) {
    auto ep = std::current_exception();
    auto [code, kind] = classify(ep);
    json e = {{"error", kind}, {"message", what_of(ep)}, {"command", command}, {"exit_code", code}};
    err << e.dump() << '\n';
    if (ctx) {
      std::ofstream(ctx->dir / "error.json") << e.dump(2) << '\n';
      write_manifest(*ctx, code);
    }
    return code;
  }
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Stepwise logical-reasoning evaluation, probing and training-data toolkit", "finelogic"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);

  struct Sub {
    const char* name;
    const char* help;
    int (*body)(Context&);
  };
  const Sub subs[] = {
      {"eval-bench", "score a generator endpoint on benchmark datasets", cmd_eval_bench},
      {"eval-steps", "judge reasoning chains step by step", cmd_eval_steps},
      {"probe", "build probing instances and train linear probes on a representation dump", cmd_probe},
      {"gen-sft", "render gold proofs into supervision corpora", cmd_gen_sft},
      {"reward", "combine step verdicts into per-sample rewards", cmd_reward},
      {"report", "merge the JSON reports of a run into one summary", cmd_report},
  };
  Flags flags;
  std::vector<std::pair<CLI::App*, const Sub*>> apps;
  for (const auto& s : subs) {
    auto* sub = app.add_subcommand(s.name, s.help);
    add_common(sub, flags);
    apps.emplace_back(sub, &s);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e, out, err);
    return code == 0 ? kOk : kInvalid;
  }
  for (auto [sub, s] : apps) {
    if (sub->parsed()) return execute(s->name, flags, s->body, out, err);
  }
  return kInvalid;
}

}  // namespace finelogic::cli
