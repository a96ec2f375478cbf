#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <set>

#include "finelogic/probe/dump.hpp"

namespace finelogic::probe {

static_assert(std::endian::native == std::endian::little, "sidecar I/O assumes a little-endian host");

namespace {

constexpr std::pair<Task, std::string_view> kTaskNames[] = {
    {Task::CSS, "CSS"},
    {Task::RFI, "RFI"},
    {Task::NSD, "NSD"},
};

std::filesystem::path sidecar_path(const std::filesystem::path& dump, const std::string& name) {
  return dump.parent_path() / name;
}

RepresentationRecord record_from_json(const nlohmann::json& j, const DumpHeader& h, std::ifstream* sidecar,
                                      std::size_t line) {
  auto need = [&](const char* key) -> const nlohmann::json& {
    if (!j.contains(key)) throw DumpError(line, std::string("missing field \"") + key + "\"");
    return j.at(key);
  };
  RepresentationRecord r;
  try {
    r.problem_id = need("problem_id").get<std::string>();
    auto task = task_from_name(need("task").get<std::string>());
    if (!task) throw DumpError(line, "unknown task " + j.at("task").dump());
    r.task = *task;
    if (!need("step_index").is_number_integer()) throw DumpError(line, "step_index must be an integer");
    r.step_index = j.at("step_index").get<int>();
    if (j.contains("candidate_id") && !j.at("candidate_id").is_null()) {
      const auto& c = j.at("candidate_id");
      r.candidate_id = c.is_string() ? c.get<std::string>() : c.dump();
    }
    r.label = need("label").get<std::string>();
    auto allowed = task_labels(r.task);
    if (std::find(allowed.begin(), allowed.end(), r.label) == allowed.end()) {
      throw DumpError(line, "label \"" + r.label + "\" not valid for " + std::string(task_name(r.task)));
    }
    if (j.contains("vector")) {
      const auto& v = j.at("vector");
      if (!v.is_array()) throw DumpError(line, "vector must be an array");
      r.vector.reserve(v.size());
      for (const auto& x : v) {
        if (!x.is_number()) throw DumpError(line, "vector entries must be numbers");
        r.vector.push_back(static_cast<float>(x.get<double>()));
      }
    } else if (j.contains("offset") && sidecar) {
      auto offset = j.at("offset").get<std::uint64_t>();
      r.vector.resize(h.dim);
      sidecar->clear();
      sidecar->seekg(static_cast<std::streamoff>(offset));
      sidecar->read(reinterpret_cast<char*>(r.vector.data()), static_cast<std::streamsize>(h.dim * sizeof(float)));
      if (!*sidecar) throw DumpError(line, "sidecar read past end at offset " + std::to_string(offset));
    } else {
      throw DumpError(line, "record has neither vector nor sidecar offset");
    }
  } catch (const DumpError&) {
    throw;
  } catch (const std::exception& e) {
    throw DumpError(line, e.what());
  }
  if (r.vector.size() != h.dim) {
    throw DumpError(line, "vector has " + std::to_string(r.vector.size()) + " entries, header declares " +
                              std::to_string(h.dim));
  }
  return r;
}

nlohmann::ordered_json ordered_instance(const InstanceSpec& s) {
  nlohmann::ordered_json j;
  j["problem_id"] = s.problem_id;
  j["task"] = task_name(s.task);
  j["step_index"] = s.step_index;
  if (s.candidate_id) j["candidate_id"] = *s.candidate_id;
  j["label"] = s.label;
  j["prefix_text"] = s.prefix_text;
  return j;
}

}  // namespace

std::string_view task_name(Task t) {
  for (auto [task, name] : kTaskNames) {
    if (task == t) return name;
  }
  return "CSS";
}

std::optional<Task> task_from_name(std::string_view s) {
  for (auto [task, name] : kTaskNames) {
    if (name == s) return task;
  }
  return std::nullopt;
}

std::vector<std::string> task_labels(Task t) {
  switch (t) {
    case Task::CSS:
      return {"T", "F"};
    case Task::RFI:
      return {"necessary", "redundant"};
    case Task::NSD:
      return {"derivable", "not-derivable"};
  }
  return {};
}

std::string_view positive_label(Task t) {
  switch (t) {
    case Task::CSS:
      return "T";
    case Task::RFI:
      return "necessary";
    case Task::NSD:
      return "derivable";
  }
  return "T";
}

nlohmann::json header_to_json(const DumpHeader& h) {
  nlohmann::json j = {{"format_version", h.format_version},
                      {"model_id", h.model_id},
                      {"layer", h.layer},
                      {"dim", h.dim},
                      {"dtype", h.dtype}};
  if (h.sidecar) j["sidecar"] = *h.sidecar;
  return j;
}

DumpHeader header_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw DumpError(1, "header is not a JSON object");
  DumpHeader h;
  try {
    if (!j.contains("format_version") || j.at("format_version") != 1) throw DumpError(1, "format_version must be 1");
    h.model_id = j.at("model_id").get<std::string>();
    h.layer = j.at("layer").get<std::string>();
    if (h.layer != "last") throw DumpError(1, "layer must be \"last\"");
    if (!j.at("dim").is_number_unsigned() || j.at("dim").get<std::size_t>() == 0) {
      throw DumpError(1, "dim must be a positive integer");
    }
    h.dim = j.at("dim").get<std::size_t>();
    h.dtype = j.at("dtype").get<std::string>();
    if (h.dtype != "f32") throw DumpError(1, "dtype must be \"f32\"");
    if (j.contains("sidecar") && j.at("sidecar").is_string()) h.sidecar = j.at("sidecar").get<std::string>();
  } catch (const DumpError&) {
    throw;
  } catch (const std::exception& e) {
    throw DumpError(1, std::string("bad header: ") + e.what());
  }
  return h;
}

void write_dump(const std::filesystem::path& path, DumpHeader header, const std::vector<RepresentationRecord>& records,
                bool binary) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  std::ofstream bin;
  if (binary) {
    header.sidecar = path.filename().string() + ".bin";
    bin.open(sidecar_path(path, *header.sidecar), std::ios::binary);
    if (!bin) throw std::runtime_error("cannot write sidecar for " + path.string());
  } else {
    header.sidecar.reset();
  }
  out << header_to_json(header).dump() << '\n';
  std::uint64_t offset = 0;
  for (const auto& r : records) {
    if (r.vector.size() != header.dim) {
      throw std::invalid_argument("record for " + r.problem_id + " has width " + std::to_string(r.vector.size()));
    }
    nlohmann::ordered_json j;
    j["problem_id"] = r.problem_id;
    j["task"] = task_name(r.task);
    j["step_index"] = r.step_index;
    if (r.candidate_id) j["candidate_id"] = *r.candidate_id;
    j["label"] = r.label;
    if (binary) {
      bin.write(reinterpret_cast<const char*>(r.vector.data()),
                static_cast<std::streamsize>(r.vector.size() * sizeof(float)));
      j["offset"] = offset;
      offset += r.vector.size() * sizeof(float);
    } else {
      // float → double is exact, and the shortest double text parses back to it
      auto& v = j["vector"] = nlohmann::ordered_json::array();
      for (float x : r.vector) v.push_back(static_cast<double>(x));
    }
    out << j.dump() << '\n';
  }
}

DumpReader::DumpReader(const std::filesystem::path& path) : path_(path), in_(path) {
  if (!in_) throw DumpError(0, "cannot open " + path.string());
  std::string text;
  if (!std::getline(in_, text)) throw DumpError(1, "missing header");
  line_ = 1;
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw DumpError(1, std::string("missing header: ") + e.what());
  }
  if (j.contains("problem_id")) throw DumpError(1, "missing header: first line is a record");
  header_ = header_from_json(j);
  if (header_.sidecar) {
    sidecar_.open(sidecar_path(path, *header_.sidecar), std::ios::binary);
    if (!sidecar_) throw DumpError(1, "cannot open sidecar " + *header_.sidecar);
  }
}

std::optional<RepresentationRecord> DumpReader::next() {
  std::string text;
  while (std::getline(in_, text)) {
    ++line_;
    if (text.find_first_not_of(" \t\r") == std::string::npos) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
      throw DumpError(line_, e.what());
    }
    return record_from_json(j, header_, header_.sidecar ? &sidecar_ : nullptr, line_);
  }
  return std::nullopt;
}

Dump read_dump(const std::filesystem::path& path) {
  DumpReader reader(path);
  Dump d;
  d.header = reader.header();
  while (auto r = reader.next()) d.records.push_back(std::move(*r));
  return d;
}

DumpReport validate_dump(const std::filesystem::path& path) {
  DumpReport rep;
  auto fail = [&](std::string msg) {
    rep.valid = false;
    rep.violations.push_back(std::move(msg));
  };
  std::optional<DumpReader> reader;
  try {
    reader.emplace(path);
  } catch (const DumpError& e) {
    fail(e.what());
    return rep;
  }
  rep.dim = reader->header().dim;

  struct Seen {
    std::vector<int> css_steps;
    std::size_t rfi_pos = 0, rfi_neg = 0;
    std::map<int, std::pair<std::size_t, std::size_t>> nsd;  // anchor → (derivable, not)
    std::set<std::string> rfi_ids;
    std::set<std::pair<int, std::string>> nsd_ids;
  };
  std::map<std::string, Seen> problems;
  while (true) {
    std::optional<RepresentationRecord> r;
    try {
      r = reader->next();
    } catch (const DumpError& e) {
      fail(e.what());
      continue;  // the reader already consumed the offending line
    }
    if (!r) break;
    ++rep.records;
    ++rep.per_task[std::string(task_name(r->task))];
    std::string where = "line " + std::to_string(reader->line()) + ": ";
    for (float x : r->vector) {
      if (!std::isfinite(x)) {
        fail(where + "non-finite vector entry");
        break;
      }
    }
    auto& s = problems[r->problem_id];
    switch (r->task) {
      case Task::CSS:
        if (r->step_index < 1) fail(where + "CSS step_index must be at least 1");
        s.css_steps.push_back(r->step_index);
        break;
      case Task::RFI:
        if (!r->candidate_id) fail(where + "RFI record without candidate_id");
        if (r->candidate_id && !s.rfi_ids.insert(*r->candidate_id).second) fail(where + "duplicate RFI candidate");
        (r->label == "necessary" ? s.rfi_pos : s.rfi_neg)++;
        break;
      case Task::NSD: {
        if (!r->candidate_id) fail(where + "NSD record without candidate_id");
        if (r->candidate_id && !s.nsd_ids.insert({r->step_index, *r->candidate_id}).second) {
          fail(where + "duplicate NSD candidate");
        }
        auto& a = s.nsd[r->step_index];
        (r->label == "derivable" ? a.first : a.second)++;
        break;
      }
    }
  }
  for (auto& [id, s] : problems) {
    if (!s.css_steps.empty()) {
      std::sort(s.css_steps.begin(), s.css_steps.end());
      for (std::size_t i = 0; i < s.css_steps.size(); ++i) {
        if (s.css_steps[i] != static_cast<int>(i + 1)) {
          fail("problem " + id + ": CSS steps are not 1.." + std::to_string(s.css_steps.size()));
          break;
        }
      }
    }
    if (s.rfi_pos + s.rfi_neg > 0 && (s.rfi_pos != 3 || s.rfi_neg != 3)) {
      fail("problem " + id + ": RFI has " + std::to_string(s.rfi_pos) + " necessary and " +
           std::to_string(s.rfi_neg) + " redundant records, expected 3 and 3");
    }
    if (!s.nsd.empty()) {
      if (s.nsd.size() != 6) fail("problem " + id + ": NSD has " + std::to_string(s.nsd.size()) + " anchors, expected 6");
      for (auto [anchor, c] : s.nsd) {
        if (c.first != 3 || c.second != 3) {
          fail("problem " + id + ": NSD anchor " + std::to_string(anchor) + " has " + std::to_string(c.first) +
               " derivable and " + std::to_string(c.second) + " not-derivable records, expected 3 and 3");
        }
      }
    }
  }
  return rep;
}

nlohmann::json instance_to_json(const InstanceSpec& s) { return nlohmann::json::parse(ordered_instance(s).dump()); }

InstanceSpec instance_from_json(const nlohmann::json& j) {
  InstanceSpec s;
  s.problem_id = j.at("problem_id").get<std::string>();
  auto t = task_from_name(j.at("task").get<std::string>());
  if (!t) throw std::invalid_argument("unknown task " + j.at("task").dump());
  s.task = *t;
  s.step_index = j.at("step_index").get<int>();
  if (j.contains("candidate_id") && j.at("candidate_id").is_string()) s.candidate_id = j.at("candidate_id");
  s.label = j.at("label").get<std::string>();
  s.prefix_text = j.at("prefix_text").get<std::string>();
  return s;
}

void write_instances(const std::filesystem::path& path, const std::vector<InstanceSpec>& specs) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  for (const auto& s : specs) out << ordered_instance(s).dump() << '\n';
}

std::vector<InstanceSpec> read_instances(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::vector<InstanceSpec> out;
  std::string text;
  while (std::getline(in, text)) {
    if (text.find_first_not_of(" \t\r") == std::string::npos) continue;
    out.push_back(instance_from_json(nlohmann::json::parse(text)));
  }
  return out;
}

}  // namespace finelogic::probe
