#include <cstdlib>
#include <fstream>
#include <regex>

#include <yaml-cpp/yaml.h>

#include "finelogic/cli/app.hpp"
#include "finelogic/probe/dump.hpp"

namespace finelogic::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

json scalar_to_json(const YAML::Node& n) {
  const std::string& s = n.Scalar();
  // quoted scalars stay strings
  if (n.Tag() == "!") return s;
  if (s == "~" || s == "null" || s.empty()) return nullptr;
  if (s == "true" || s == "True") return true;
  if (s == "false" || s == "False") return false;
  static const std::regex integer(R"([-+]?\d+)");
  static const std::regex real(R"([-+]?(\d+\.?\d*|\.\d+)([eE][-+]?\d+)?)");
  if (std::regex_match(s, integer)) return std::stoll(s);
  if (std::regex_match(s, real)) return std::stod(s);
  return s;
}

json yaml_to_json(const YAML::Node& n) {
  switch (n.Type()) {
    case YAML::NodeType::Null:
    case YAML::NodeType::Undefined:
      return nullptr;
    case YAML::NodeType::Scalar:
      return scalar_to_json(n);
    case YAML::NodeType::Sequence: {
      json a = json::array();
      for (const auto& e : n) a.push_back(yaml_to_json(e));
      return a;
    }
    case YAML::NodeType::Map: {
      json o = json::object();
      for (const auto& kv : n) o[kv.first.as<std::string>()] = yaml_to_json(kv.second);
      return o;
    }
  }
  return nullptr;
}

void interpolate_all(json& j) {
  if (j.is_string()) {
    j = interpolate_env(j.get<std::string>());
  } else if (j.is_structured()) {
    for (auto& e : j) interpolate_all(e);
  }
}

fs::path resolve(const fs::path& base, const json& v) {
  fs::path p = v.get<std::string>();
  return p.is_absolute() ? p : base / p;
}

std::optional<fs::path> opt_path(const json& j, const char* key, const fs::path& base) {
  if (!j.contains(key) || j[key].is_null()) return std::nullopt;
  return resolve(base, j[key]);
}

net::EndpointConfig endpoint_from_json(const json& j, const fs::path& base, const char* what) {
  if (j.contains("api_key") || j.contains("key") || j.contains("token")) {
    throw ConfigError(std::string(what) + ": credentials do not belong in the config file; name the variable holding "
                                          "them with api_key_env");
  }
  net::EndpointConfig e;
  e.url = j.value("url", "");
  e.model = j.value("model", "");
  if (e.url.empty()) throw ConfigError(std::string(what) + ".url is required");
  e.max_tokens = j.value("max_tokens", e.max_tokens);
  e.temperature = j.value("temperature", e.temperature);
  e.reply_path = j.value("reply_path", e.reply_path);
  e.api_key_env = j.value("api_key_env", "");
  e.attempts = j.value("attempts", e.attempts);
  e.backoff = std::chrono::milliseconds(j.value("backoff_ms", static_cast<long>(e.backoff.count())));
  e.timeout = std::chrono::seconds(j.value("timeout_s", static_cast<long>(e.timeout.count())));
  e.max_in_flight = j.value("max_in_flight", e.max_in_flight);
  if (auto c = opt_path(j, "cache_dir", base)) e.cache_dir = *c;
  return e;
}

json endpoint_to_json(const net::EndpointConfig& e) {
  return {{"url", e.url},
          {"model", e.model},
          {"max_tokens", e.max_tokens},
          {"temperature", e.temperature},
          {"reply_path", e.reply_path},
          {"api_key_env", e.api_key_env},
          {"attempts", e.attempts},
          {"backoff_ms", e.backoff.count()},
          {"timeout_s", e.timeout.count()},
          {"max_in_flight", e.max_in_flight},
          {"cache_dir", e.cache_dir.string()}};
}

template <class T>
T get_or(const json& j, const char* key, T fallback) {
  if (!j.contains(key) || j[key].is_null()) return fallback;
  try {
    return j[key].get<T>();
  } catch (const json::exception&) {
    throw ConfigError(std::string("bad value for ") + key + ": " + j[key].dump());
  }
}

const json& section(const json& j, const char* key) {
  static const json empty = json::object();
  if (!j.contains(key) || j[key].is_null()) return empty;
  if (!j[key].is_object()) throw ConfigError(std::string(key) + " must be a mapping");
  return j[key];
}

}  // namespace

std::string interpolate_env(const std::string& text) {
  static const std::regex var(R"(\$\{([A-Za-z_][A-Za-z0-9_]*)(:-([^}]*))?\})");
  std::string out;
  auto begin = std::sregex_iterator(text.begin(), text.end(), var);
  std::size_t last = 0;
  for (auto it = begin; it != std::sregex_iterator(); ++it) {
    const auto& m = *it;
    out.append(text, last, static_cast<std::size_t>(m.position()) - last);
    const char* v = std::getenv(m[1].str().c_str());
    if (v) {
      out += v;
    } else if (m[2].matched) {
      out += m[3].str();
    } else {
      throw ConfigError("environment variable " + m[1].str() + " is not set");
    }
    last = static_cast<std::size_t>(m.position() + m.length());
  }
  out.append(text, last);
  return out;
}

RunConfig config_from_json(const json& raw, const fs::path& base) {
  json j = raw;
  interpolate_all(j);
  RunConfig c;
  if (!j.is_object()) throw ConfigError("config must be a mapping");
  if (j.contains("out")) c.out = resolve(base, j["out"]);
  c.seed = get_or<std::uint64_t>(j, "seed", c.seed);
  c.jobs = get_or<std::size_t>(j, "jobs", c.jobs);
  if (c.jobs == 0) throw ConfigError("jobs must be positive");

  if (j.contains("datasets")) {
    for (const auto& d : j["datasets"]) {
      DatasetEntry e;
      auto kind = bench::dataset_from_name(d.value("kind", "custom"));
      if (!kind) throw ConfigError("unknown dataset kind " + d.value("kind", ""));
      e.kind = *kind;
      e.name = d.value("name", std::string(bench::dataset_name(e.kind)));
      if (!d.contains("path")) throw ConfigError("dataset " + e.name + " has no path");
      e.path = resolve(base, d["path"]);
      e.check_manifest = d.value("check_manifest", false);
      c.datasets.push_back(std::move(e));
    }
  }

  const json& b = section(j, "bench");
  if (b.contains("mode")) {
    auto m = bench::mode_from_name(b["mode"].get<std::string>());
    if (!m) throw ConfigError("unknown prompt mode " + b["mode"].dump());
    c.mode = *m;
  }
  if (b.contains("exemplars")) {
    for (const auto& p : b["exemplars"]) c.exemplars.push_back(resolve(base, p));
  }
  if (j.contains("generator") && !j["generator"].is_null()) c.generator = endpoint_from_json(j["generator"], base, "generator");
  if (j.contains("judge") && !j["judge"].is_null()) c.judge = endpoint_from_json(j["judge"], base, "judge");

  const json& bud = section(j, "budget");
  c.budget.max_depth = get_or(bud, "max_depth", c.budget.max_depth);
  c.budget.max_nodes = get_or(bud, "max_nodes", c.budget.max_nodes);
  c.budget.time_limit = std::chrono::milliseconds(get_or<long>(bud, "time_limit_ms", c.budget.time_limit.count()));
  c.budget.max_domain = get_or(bud, "max_domain", c.budget.max_domain);

  const json& st = section(j, "steps");
  c.steps_input = opt_path(st, "input", base);
  if (st.contains("dialect")) {
    auto d = st["dialect"].get<std::string>();
    if (d == "symbolic") {
      c.dialect = proof::Dialect::Symbolic;
    } else if (d == "natural") {
      c.dialect = proof::Dialect::Natural;
    } else {
      throw ConfigError("unknown dialect " + d);
    }
  }

  const json& pr = section(j, "probe");
  c.dump = opt_path(pr, "dump", base);
  c.split = opt_path(pr, "split", base);
  c.c_grid = get_or(pr, "c_grid", c.c_grid);
  c.folds = get_or(pr, "folds", c.folds);
  if (pr.contains("reading")) {
    auto r = pr["reading"].get<std::string>();
    if (r != "suffix" && r != "local") throw ConfigError("unknown CSS reading " + r);
    c.reading = r == "suffix" ? probe::CssReading::Suffix : probe::CssReading::Local;
  }
  const json& inst = section(pr, "instances");
  c.instance_source = opt_path(inst, "source", base);
  if (inst.contains("kind")) {
    auto k = bench::dataset_from_name(inst["kind"].get<std::string>());
    if (!k) throw ConfigError("unknown dataset kind " + inst["kind"].dump());
    c.instance_kind = *k;
  }
  c.instance_tasks = get_or(inst, "tasks", c.instance_tasks);
  for (const auto& t : c.instance_tasks) {
    if (!probe::task_from_name(t)) throw ConfigError("unknown probing task " + t);
  }

  const json& s = section(j, "sft");
  c.golds = opt_path(s, "golds", base);
  if (s.contains("styles")) {
    c.styles.clear();
    for (const auto& name : s["styles"]) {
      auto st = sft::style_from_name(name.get<std::string>());
      if (!st) throw ConfigError("unknown style " + name.dump());
      c.styles.push_back(*st);
    }
  }
  c.sft_manifest = get_or<std::string>(s, "manifest", c.sft_manifest);
  if (c.sft_manifest != "fld" && c.sft_manifest != "prontoqa" && c.sft_manifest != "all") {
    throw ConfigError("sft.manifest must be fld, prontoqa or all");
  }

  const json& r = section(j, "reward");
  c.reward_steps = opt_path(r, "steps", base);
  c.traces = opt_path(r, "traces", base);
  if (r.contains("mode")) {
    auto m = reward::reward_mode_from_name(r["mode"].get<std::string>());
    if (!m) throw ConfigError("unknown reward mode " + r["mode"].dump());
    c.reward_mode = *m;
  }
  const json& w = section(r, "weights");
  c.weights.w_v = get_or(w, "w_v", c.weights.w_v);
  c.weights.w_r = get_or(w, "w_r", c.weights.w_r);
  c.weights.w_a = get_or(w, "w_a", c.weights.w_a);
  c.weights.w_c = get_or(w, "w_c", c.weights.w_c);
  try {
    reward::check_weights(c.weights);
  } catch (const reward::OutOfRangeComponent& e) {
    throw ConfigError(e.what());
  }

  const json& rep = section(j, "report");
  if (rep.contains("inputs")) {
    for (const auto& p : rep["inputs"]) c.report_inputs.push_back(resolve(base, p));
  }
  return c;
}

RunConfig load_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config " + path.string());
  YAML::Node root;
  try {
    root = YAML::LoadFile(path.string());
  } catch (const YAML::Exception& e) {
    throw ConfigError("config " + path.string() + ": " + e.what());
  }
  return config_from_json(yaml_to_json(root), fs::absolute(path).parent_path());
}

json config_to_json(const RunConfig& c) {
  json datasets = json::array();
  for (const auto& d : c.datasets) {
    datasets.push_back({{"name", d.name},
                        {"kind", bench::dataset_name(d.kind)},
                        {"path", d.path.string()},
                        {"check_manifest", d.check_manifest}});
  }
  auto opt = [](const std::optional<fs::path>& p) { return p ? json(p->string()) : json(nullptr); };
  auto paths = [](const std::vector<fs::path>& v) {
    json a = json::array();
    for (const auto& p : v) a.push_back(p.string());
    return a;
  };
  json styles = json::array();
  for (auto s : c.styles) styles.push_back(sft::style_name(s));
  return {
      {"out", c.out.string()},
      {"seed", c.seed},
      {"jobs", c.jobs},
      {"datasets", datasets},
      {"bench", {{"mode", bench::mode_name(c.mode)}, {"exemplars", paths(c.exemplars)}}},
      {"generator", c.generator ? endpoint_to_json(*c.generator) : json(nullptr)},
      {"judge", c.judge ? endpoint_to_json(*c.judge) : json(nullptr)},
      {"budget",
       {{"max_depth", c.budget.max_depth},
        {"max_nodes", c.budget.max_nodes},
        {"time_limit_ms", c.budget.time_limit.count()},
        {"max_domain", c.budget.max_domain}}},
      {"steps", {{"input", opt(c.steps_input)}, {"dialect", proof::dialect_name(c.dialect)}}},
      {"probe",
       {{"dump", opt(c.dump)},
        {"split", opt(c.split)},
        {"c_grid", c.c_grid},
        {"folds", c.folds},
        {"reading", c.reading == probe::CssReading::Suffix ? "suffix" : "local"},
        {"instances",
         {{"source", opt(c.instance_source)},
          {"kind", bench::dataset_name(c.instance_kind)},
          {"tasks", c.instance_tasks}}}}},
      {"sft", {{"golds", opt(c.golds)}, {"styles", styles}, {"manifest", c.sft_manifest}}},
      {"reward",
       {{"steps", opt(c.reward_steps)},
        {"traces", opt(c.traces)},
        {"mode", reward::mode_name(c.reward_mode)},
        {"weights", {{"w_v", c.weights.w_v}, {"w_r", c.weights.w_r}, {"w_a", c.weights.w_a}, {"w_c", c.weights.w_c}}}}},
      {"report", {{"inputs", paths(c.report_inputs)}}},
  };
}

}  // namespace finelogic::cli
