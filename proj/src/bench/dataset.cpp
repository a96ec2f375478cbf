#include <algorithm>
#include <fstream>
#include <regex>

#include "finelogic/bench/dataset.hpp"
#include "finelogic/logic/formula.hpp"

namespace finelogic::bench {

namespace {

constexpr std::pair<DatasetKind, std::string_view> kDatasetNames[] = {
    {DatasetKind::FLD, "FLD"},
    {DatasetKind::FOLIO, "FOLIO"},
    {DatasetKind::MultiLogiEval, "MultiLogiEval"},
    {DatasetKind::ProntoQA, "ProntoQA"},
    {DatasetKind::Custom, "custom"},
};

std::string trim(std::string_view s) {
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  return s;
}

/// "fact1: A fact2: B" → ["A", "B"]; text without fact labels is one sentence per line.
std::vector<std::string> split_labeled(const std::string& text) {
  static const std::regex label(R"((?:^|\s)fact\d+\s*:\s*)");
  std::vector<std::string> out;
  std::vector<std::pair<std::size_t, std::size_t>> marks;
  for (auto it = std::sregex_iterator(text.begin(), text.end(), label); it != std::sregex_iterator(); ++it) {
    marks.emplace_back(static_cast<std::size_t>(it->position()), static_cast<std::size_t>(it->length()));
  }
  if (marks.empty()) {
    std::size_t start = 0;
    while (start <= text.size()) {
      std::size_t nl = text.find('\n', start);
      if (nl == std::string::npos) nl = text.size();
      if (auto line = trim(std::string_view(text).substr(start, nl - start)); !line.empty()) out.push_back(line);
      start = nl + 1;
    }
    return out;
  }
  for (std::size_t i = 0; i < marks.size(); ++i) {
    std::size_t begin = marks[i].first + marks[i].second;
    std::size_t end = i + 1 < marks.size() ? marks[i + 1].first : text.size();
    out.push_back(trim(std::string_view(text).substr(begin, end - begin)));
  }
  return out;
}

/// Splits prose into sentences ending in '.', '!' or '?'.
std::vector<std::string> split_sentences(const std::string& text) {
  std::vector<std::string> out;
  std::string cur;
  for (std::size_t i = 0; i < text.size(); ++i) {
    cur += text[i];
    bool stop = (text[i] == '.' || text[i] == '!' || text[i] == '?') &&
                (i + 1 == text.size() || std::isspace(static_cast<unsigned char>(text[i + 1])));
    if (stop) {
      if (auto s = trim(cur); !s.empty()) out.push_back(s);
      cur.clear();
    }
  }
  if (auto s = trim(cur); !s.empty()) out.push_back(s);
  return out;
}

std::vector<std::string> string_or_list(const nlohmann::json& v, bool prose) {
  if (v.is_array()) return v.get<std::vector<std::string>>();
  std::string s = v.get<std::string>();
  return prose ? split_sentences(s) : split_labeled(s);
}

const nlohmann::json* first_of(const nlohmann::json& r, std::initializer_list<const char*> keys) {
  for (const char* k : keys) {
    if (r.contains(k) && !r.at(k).is_null()) return &r.at(k);
  }
  return nullptr;
}

std::string record_id(const nlohmann::json& r, DatasetKind kind, std::size_t index) {
  if (const auto* v = first_of(r, {"id", "example_id", "problem_id"})) {
    return v->is_string() ? v->get<std::string>() : v->dump();
  }
  return std::string(dataset_name(kind)) + "-" + std::to_string(index);
}

Label upstream_label(DatasetKind kind, const nlohmann::json& v, std::size_t index) {
  std::string s = lower(trim(v.is_string() ? v.get<std::string>() : v.dump()));
  if (s == "proved" || s == "true" || s == "t" || s == "yes") return Label::T;
  if (s == "disproved" || s == "false" || s == "f" || s == "no") return Label::F;
  if (s == "unknown" || s == "uncertain") return Label::Unknown;
  // multiple-choice answers: A) True, B) False
  if (kind == DatasetKind::ProntoQA && s == "a") return Label::T;
  if (kind == DatasetKind::ProntoQA && s == "b") return Label::F;
  throw LabelOutOfSchema(index + 1, "unrecognized label " + v.dump());
}

}  // namespace

std::string_view dataset_name(DatasetKind k) {
  for (auto [kind, name] : kDatasetNames) {
    if (kind == k) return name;
  }
  return "custom";
}

std::optional<DatasetKind> dataset_from_name(std::string_view s) {
  std::string l = lower(std::string(s));
  for (auto [kind, name] : kDatasetNames) {
    if (lower(std::string(name)) == l) return kind;
  }
  return std::nullopt;
}

std::string_view label_name(Label l) {
  switch (l) {
    case Label::T:
      return "T";
    case Label::F:
      return "F";
    case Label::Unknown:
      return "Unknown";
  }
  return "Unknown";
}

std::optional<Label> label_from_name(std::string_view s) {
  if (s == "T") return Label::T;
  if (s == "F") return Label::F;
  if (s == "Unknown") return Label::Unknown;
  return std::nullopt;
}

bool answer_matches(proof::Answer predicted, Label gold) {
  return predicted != proof::Answer::None && predicted == answer_for(gold);
}

proof::Answer answer_for(Label gold) {
  switch (gold) {
    case Label::T:
      return proof::Answer::Proved;
    case Label::F:
      return proof::Answer::Disproved;
    case Label::Unknown:
      return proof::Answer::Unknown;
  }
  return proof::Answer::None;
}

std::vector<proof::GivenFact> Problem::given_facts() const {
  std::vector<proof::GivenFact> out;
  logic::ArityTable arities;
  for (std::size_t i = 0; i < facts.size(); ++i) {
    proof::GivenFact f{"fact" + std::to_string(i + 1), facts[i], std::nullopt};
    if (i < facts_formula.size()) {
      try {
        f.formula = logic::parse_formula(facts_formula[i], arities);
      } catch (const std::exception&) {
      }
    }
    out.push_back(std::move(f));
  }
  return out;
}

DatasetManifest manifest_for(DatasetKind kind) {
  const std::vector<Label> tfu{Label::T, Label::F, Label::Unknown};
  const std::vector<Label> tf{Label::T, Label::F};
  switch (kind) {
    case DatasetKind::FLD:
      return {1100, std::pair{0, 19}, tfu, true};
    case DatasetKind::FOLIO:
      return {203, std::nullopt, tfu, false};
    case DatasetKind::MultiLogiEval:
      return {390, std::nullopt, tf, false};
    case DatasetKind::ProntoQA:
      return {500, std::nullopt, tf, false};
    case DatasetKind::Custom:
      break;
  }
  return {std::nullopt, std::nullopt, tfu, false};
}

Problem problem_from_json(const nlohmann::json& j, std::size_t line) {
  auto need = [&](const char* key) -> const nlohmann::json& {
    if (!j.contains(key)) throw SchemaError(line, std::string("missing field \"") + key + "\"");
    return j.at(key);
  };
  Problem p;
  try {
    p.id = need("id").is_string() ? need("id").get<std::string>() : need("id").dump();
    auto ds = dataset_from_name(need("dataset").get<std::string>());
    if (!ds) throw SchemaError(line, "unknown dataset " + j.at("dataset").dump());
    p.dataset = *ds;
    p.facts = need("facts").get<std::vector<std::string>>();
    if (j.contains("facts_formula") && !j.at("facts_formula").is_null()) {
      p.facts_formula = j.at("facts_formula").get<std::vector<std::string>>();
      if (p.facts_formula.size() != p.facts.size()) {
        throw SchemaError(line, "facts_formula and facts differ in length");
      }
    }
    p.hypothesis = need("hypothesis").get<std::string>();
    if (j.contains("hypothesis_formula") && j.at("hypothesis_formula").is_string()) {
      p.hypothesis_formula = j.at("hypothesis_formula").get<std::string>();
    }
    auto label = label_from_name(need("label").get<std::string>());
    if (!label) throw LabelOutOfSchema(line, "label " + j.at("label").dump() + " is not T, F or Unknown");
    p.label = *label;
    if (j.contains("depth") && !j.at("depth").is_null()) {
      const auto& d = j.at("depth");
      if (!d.is_number_integer() || d.get<long long>() < 0) throw SchemaError(line, "depth must be a nonnegative int");
      p.depth = d.get<int>();
    }
    if (j.contains("gold_proof") && !j.at("gold_proof").is_null()) {
      p.gold_proof = proof::chain_from_json(j.at("gold_proof"));
    }
  } catch (const SchemaError&) {
    throw;
  } catch (const std::exception& e) {
    throw SchemaError(line, e.what());
  }
  return p;
}

nlohmann::json problem_to_json(const Problem& p) {
  nlohmann::json j = {{"id", p.id},
                      {"dataset", dataset_name(p.dataset)},
                      {"facts", p.facts},
                      {"hypothesis", p.hypothesis},
                      {"label", label_name(p.label)}};
  if (!p.facts_formula.empty()) j["facts_formula"] = p.facts_formula;
  if (p.hypothesis_formula) j["hypothesis_formula"] = *p.hypothesis_formula;
  if (p.depth) j["depth"] = *p.depth;
  if (p.gold_proof) j["gold_proof"] = proof::chain_to_json(*p.gold_proof);
  return j;
}

namespace {

void check_record(const Problem& p, const DatasetManifest& m, std::size_t line) {
  if (std::find(m.labels.begin(), m.labels.end(), p.label) == m.labels.end()) {
    throw LabelOutOfSchema(line, "label " + std::string(label_name(p.label)) + " not in the dataset schema");
  }
  if (m.depth_required && !p.depth) throw SchemaError(line, "depth is required");
}

}  // namespace

std::vector<Problem> load_dataset(const std::filesystem::path& path, DatasetKind kind, bool check_manifest) {
  std::ifstream in(path);
  if (!in) throw SchemaError(0, "cannot open " + path.string());
  DatasetManifest m = manifest_for(kind);
  std::vector<Problem> out;
  std::string text;
  std::size_t line = 0;
  while (std::getline(in, text)) {
    ++line;
    if (trim(text).empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
      throw SchemaError(line, e.what());
    }
    if (!j.is_object()) throw SchemaError(line, "record is not an object");
    Problem p = problem_from_json(j, line);
    if (kind != DatasetKind::Custom && p.dataset != kind) {
      throw SchemaError(line, "record belongs to " + std::string(dataset_name(p.dataset)));
    }
    check_record(p, m, line);
    out.push_back(std::move(p));
  }
  if (out.empty()) throw SchemaError(line, "no records in " + path.string());
  if (check_manifest) check_against_manifest(out, kind);
  return out;
}

void check_against_manifest(const std::vector<Problem>& problems, DatasetKind kind) {
  DatasetManifest m = manifest_for(kind);
  std::string name(dataset_name(kind));
  if (m.count && problems.size() != *m.count) {
    throw ManifestMismatch(name + " expects " + std::to_string(*m.count) + " problems, found " +
                           std::to_string(problems.size()));
  }
  if (m.depth_range) {
    std::vector<bool> seen(static_cast<std::size_t>(m.depth_range->second - m.depth_range->first + 1));
    for (const auto& p : problems) {
      if (!p.depth || *p.depth < m.depth_range->first || *p.depth > m.depth_range->second) {
        throw ManifestMismatch(name + " problem " + p.id + " has depth outside " +
                               std::to_string(m.depth_range->first) + "-" + std::to_string(m.depth_range->second));
      }
      seen[static_cast<std::size_t>(*p.depth - m.depth_range->first)] = true;
    }
    for (std::size_t d = 0; d < seen.size(); ++d) {
      if (!seen[d]) throw ManifestMismatch(name + " has no problem at depth " + std::to_string(d + m.depth_range->first));
    }
  }
}

Problem adapt_upstream(DatasetKind kind, const nlohmann::json& r, std::size_t index) {
  Problem p;
  p.id = record_id(r, kind, index);
  p.dataset = kind;
  try {
    switch (kind) {
      case DatasetKind::FLD: {
        // facts arrive as "fact1: ... fact2: ..."
        const auto* facts = first_of(r, {"context", "facts"});
        const auto* hyp = first_of(r, {"hypothesis"});
        const auto* label = first_of(r, {"world_assump_label", "proof_label", "label"});
        if (!facts || !hyp || !label) throw SchemaError(index + 1, "FLD record needs facts, hypothesis and label");
        p.facts = string_or_list(*facts, false);
        if (const auto* ff = first_of(r, {"context_formula", "facts_formula"})) {
          p.facts_formula = string_or_list(*ff, false);
          if (p.facts_formula.size() != p.facts.size()) p.facts_formula.clear();
        }
        p.hypothesis = trim(hyp->get<std::string>());
        if (const auto* hf = first_of(r, {"hypothesis_formula"})) p.hypothesis_formula = trim(hf->get<std::string>());
        p.label = upstream_label(kind, *label, index);
        if (const auto* d = first_of(r, {"depth", "original_tree_depth"})) p.depth = d->get<int>();
        break;
      }
      case DatasetKind::FOLIO: {
        const auto* prem = first_of(r, {"premises"});
        const auto* concl = first_of(r, {"conclusion"});
        const auto* label = first_of(r, {"label"});
        if (!prem || !concl || !label) throw SchemaError(index + 1, "FOLIO record needs premises, conclusion and label");
        p.facts = string_or_list(*prem, false);
        if (const auto* ff = first_of(r, {"premises-FOL", "premises_fol"})) {
          p.facts_formula = string_or_list(*ff, false);
          if (p.facts_formula.size() != p.facts.size()) p.facts_formula.clear();
        }
        p.hypothesis = trim(concl->get<std::string>());
        if (const auto* cf = first_of(r, {"conclusion-FOL", "conclusion_fol"})) {
          p.hypothesis_formula = trim(cf->get<std::string>());
        }
        p.label = upstream_label(kind, *label, index);
        break;
      }
      case DatasetKind::MultiLogiEval: {
        // answers are yes/no: yes → T, no → F
        const auto* ctx = first_of(r, {"context"});
        const auto* q = first_of(r, {"question"});
        const auto* a = first_of(r, {"answer", "label"});
        if (!ctx || !q || !a) throw SchemaError(index + 1, "MultiLogiEval record needs context, question and answer");
        p.facts = string_or_list(*ctx, true);
        p.hypothesis = trim(q->get<std::string>());
        p.label = upstream_label(kind, *a, index);
        break;
      }
      case DatasetKind::ProntoQA: {
        const auto* ctx = first_of(r, {"context", "facts"});
        const auto* q = first_of(r, {"question", "query", "hypothesis"});
        const auto* a = first_of(r, {"answer", "label"});
        if (!ctx || !q || !a) throw SchemaError(index + 1, "ProntoQA record needs context, question and answer");
        p.facts = string_or_list(*ctx, true);
        std::string hyp = trim(q->get<std::string>());
        for (std::string_view prefix : {"Is the following statement true or false?", "True or false:"}) {
          if (hyp.starts_with(prefix)) hyp = trim(std::string_view(hyp).substr(prefix.size()));
        }
        p.hypothesis = hyp;
        p.label = upstream_label(kind, *a, index);
        break;
      }
      case DatasetKind::Custom:
        p = problem_from_json(r, index + 1);
        break;
    }
  } catch (const SchemaError&) {
    throw;
  } catch (const std::exception& e) {
    throw SchemaError(index + 1, e.what());
  }
  check_record(p, manifest_for(kind), index + 1);
  return p;
}

std::vector<Problem> load_upstream(const std::filesystem::path& path, DatasetKind kind) {
  std::ifstream in(path);
  if (!in) throw SchemaError(0, "cannot open " + path.string());
  std::vector<nlohmann::json> records;
  in >> std::ws;
  if (in.peek() == '[') {
    nlohmann::json all;
    try {
      all = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
      throw SchemaError(0, e.what());
    }
    for (auto& r : all) records.push_back(std::move(r));
  } else {
    std::string text;
    std::size_t line = 0;
    while (std::getline(in, text)) {
      ++line;
      if (trim(text).empty()) continue;
      try {
        records.push_back(nlohmann::json::parse(text));
      } catch (const nlohmann::json::parse_error& e) {
        throw SchemaError(line, e.what());
      }
    }
  }
  if (records.empty()) throw SchemaError(0, "no records in " + path.string());
  std::vector<Problem> out;
  for (std::size_t i = 0; i < records.size(); ++i) out.push_back(adapt_upstream(kind, records[i], i));
  return out;
}

std::string format_facts(const std::vector<std::string>& facts) {
  std::string out;
  for (std::size_t i = 0; i < facts.size(); ++i) {
    if (i) out += "\n";
    out += "fact" + std::to_string(i + 1) + ": " + facts[i];
  }
  return out;
}

}  // namespace finelogic::bench
