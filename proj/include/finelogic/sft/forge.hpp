#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "finelogic/bench/dataset.hpp"
#include "finelogic/logic/formula.hpp"

namespace finelogic::sft {

enum class Style { NL, SymbStruct, SymbFilter, SymbDirect };

std::string_view style_name(Style s);
std::optional<Style> style_from_name(std::string_view s);

/// Readings use the argument placeholders x, y, z in order, e.g. "x is a raised".
struct Glossary {
  std::map<std::string, std::string> predicates;
  std::map<std::string, std::string> constants;
};

struct GoldProblem {
  bench::Problem problem;  // gold_proof and facts_formula are required
  Glossary glossary;

  const proof::ProofChain& proof() const;
};

class GlossaryGap : public std::invalid_argument {
 public:
  explicit GlossaryGap(std::string symbol)
      : std::invalid_argument("no glossary reading for " + symbol), symbol_(std::move(symbol)) {}
  const std::string& symbol() const { return symbol_; }

 private:
  std::string symbol_;
};

class ManifestShortfall : public std::runtime_error {
 public:
  ManifestShortfall(std::optional<int> depth, std::size_t have, std::size_t need)
      : std::runtime_error((depth ? "depth " + std::to_string(*depth) : std::string("UNKNOWN")) + ": have " +
                           std::to_string(have) + ", need " + std::to_string(need)),
        depth_(depth),
        have_(have),
        need_(need) {}
  std::optional<int> depth() const { return depth_; }
  std::size_t have() const { return have_; }
  std::size_t need() const { return need_; }

 private:
  std::optional<int> depth_;
  std::size_t have_, need_;
};

struct SftSample {
  Style style = Style::NL;
  std::string prompt;
  std::string target;
  std::optional<int> depth;
  std::string source_id;
  bench::Label label = bench::Label::T;
};

inline constexpr std::string_view kStructPreamble =
    "Our problem-solving procedure begins by formalizing all given facts and the hypothesis into first-order logic "
    "using standardized predicate definitions.";
inline constexpr std::string_view kExhaustedMessage =
    "The search path has been exhausted without finding a way to either prove or disprove the hypothesis.";

/// Fact labels in the dependency closure of the final conclusion.
std::set<std::string> necessary_facts(const GoldProblem& gold);

/// Throws GlossaryGap for the first predicate or constant without a reading.
void check_glossary(const GoldProblem& gold);

/// Natural-language reading of a formula through the glossary; symbol free.
std::string read_formula(const logic::Formula& f, const Glossary& glossary);

/// The training prompt: the direct reasoning template over the problem.
std::string sft_prompt(const bench::Problem& problem);

SftSample gen_symb_struct(const GoldProblem& gold);
SftSample gen_symb_filter(const GoldProblem& gold);
SftSample gen_symb_direct(const GoldProblem& gold);
SftSample gen_nl(const GoldProblem& gold);
SftSample generate(const GoldProblem& gold, Style style);

/// Gold chain restricted to the dependency closure of its terminal step,
/// renumbered, with only the necessary facts.
proof::ProofChain filtered_chain(const GoldProblem& gold);

struct ManifestEntry {
  std::optional<int> depth;  // any depth when absent
  bool unknown = false;      // UNKNOWN-labeled problems instead of proved/disproved
  std::size_t need = 0;
};

struct CorpusManifest {
  bench::DatasetKind dataset = bench::DatasetKind::FLD;
  std::vector<ManifestEntry> entries;
  std::size_t total() const;
};

/// 500 per depth 0-15 plus 1500 UNKNOWN.
CorpusManifest fld_manifest();
/// 3200 proved/disproved problems.
CorpusManifest prontoqa_manifest();

struct CorpusReport {
  /// (style, depth or -1, label) → count
  std::map<std::tuple<std::string, int, std::string>, std::size_t> counts;
  std::size_t total = 0;
  nlohmann::json to_json() const;
};

struct Corpus {
  std::vector<SftSample> samples;
  CorpusReport report;
};

/// Draws each manifest entry's quota from the matching golds (sorted by id,
/// then a seeded sample) and renders them in `style`.
Corpus build_corpus(const std::vector<GoldProblem>& golds, Style style, const CorpusManifest& manifest,
                    std::uint64_t seed = 0);

nlohmann::json sample_to_json(const SftSample& s);
void write_corpus(const std::filesystem::path& path, const std::vector<SftSample>& samples);

nlohmann::json gold_to_json(const GoldProblem& g);
GoldProblem gold_from_json(const nlohmann::json& j);
std::vector<GoldProblem> load_gold_pool(const std::filesystem::path& path);

}  // namespace finelogic::sft
