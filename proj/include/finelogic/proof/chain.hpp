#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "finelogic/logic/formula.hpp"

namespace finelogic::proof {

enum class StepKind { GivenFact, Derivation, Assumption, Contradiction, ReductioDischarge, FinalConclusion };
enum class Dialect { Symbolic, Natural };
enum class Answer { Proved, Disproved, Unknown, None };

std::string_view kind_name(StepKind k);
std::optional<StepKind> kind_from_name(std::string_view s);
std::string_view answer_name(Answer a);  // "PROVED", ..., "NONE"
std::optional<Answer> answer_from_name(std::string_view s);
std::string_view dialect_name(Dialect d);

/// Label given to a bare "⊥" line.
inline constexpr std::string_view kFalsumLabel = "⊥";

struct MalformedStep {
  int ordinal = 0;  // 0 for chain-level problems
  std::string reason;
  bool operator==(const MalformedStep&) const = default;
};

struct GivenFact {
  std::string label;
  std::string text;
  std::optional<logic::Formula> formula;
};

struct ProofStep {
  int ordinal = 0;
  std::string label;
  StepKind kind = StepKind::Derivation;
  std::string explanation;
  std::vector<std::string> premises;
  /// Ordinal each premise resolved to; 0 means a given fact outside the steps.
  std::vector<int> premise_ordinals;
  std::string conclusion_text;
  std::optional<logic::Formula> formula;  // symbolic dialect only
};

struct ProofChain {
  std::string problem_id;
  Dialect dialect = Dialect::Symbolic;
  std::vector<GivenFact> facts;  // "factN: ..." lines before the first step
  std::optional<GivenFact> hypothesis;
  std::vector<ProofStep> steps;
  std::optional<Answer> final_label;
  std::string raw_text;
  std::vector<MalformedStep> malformed;

  bool is_malformed() const { return !malformed.empty(); }
  bool empty() const { return steps.empty(); }
  std::size_t size() const { return steps.size(); }
  /// Index of the step that concludes the chain: the final-conclusion step if
  /// present, otherwise the last step. Empty chains have none.
  std::optional<std::size_t> terminal_index() const;
  const GivenFact* find_fact(std::string_view label) const;
};

class CycleDetected : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

struct ParseOptions {
  Dialect dialect = Dialect::Symbolic;
  std::string problem_id;
  /// Facts supplied by the problem; preamble fact lines take precedence.
  std::vector<GivenFact> facts;
};

/// Substring after the last occurrence of `answer_tag`; the whole text if the
/// tag never occurs.
std::string strip_preamble(std::string_view text, std::string_view answer_tag = "</think>");

/// Last __PROVED__ / __DISPROVED__ / __UNKNOWN__ marker in the text.
Answer extract_answer(std::string_view text);

/// Total: never throws on any input. Problems are recorded in `malformed`.
ProofChain parse_proof(std::string_view text, const ParseOptions& opts = {});
ProofChain parse_proof(std::string_view text, Dialect dialect);

struct GraphNode {
  std::string label;
  int ordinal = 0;  // 0 for given facts
  bool operator==(const GraphNode&) const = default;
  auto operator<=>(const GraphNode&) const = default;
};

struct DependencyGraph {
  std::vector<GraphNode> nodes;
  /// (from, to) node indices; from is a premise of to.
  std::vector<std::pair<std::size_t, std::size_t>> edges;

  std::optional<std::size_t> index_of(const GraphNode& n) const;
  std::size_t out_degree(std::size_t node) const;
  std::size_t in_degree(std::size_t node) const;
};

/// Nodes are the given facts that are cited plus every step, in ordinal
/// order. Throws CycleDetected if an edge does not point forward.
DependencyGraph dependency_graph(const ProofChain& chain);

/// Ordinals of the steps the terminal step depends on, itself included, ascending.
std::vector<int> dependency_closure(const ProofChain& chain);
/// Given-fact labels cited anywhere in the dependency closure, in fact order
/// when the facts are known, otherwise in order of first citation.
std::vector<std::string> necessary_fact_labels(const ProofChain& chain);

/// Canonical text of a chain: fact lines, steps in the canonical grammar and
/// the final marker line.
std::string render_chain(const ProofChain& chain);
std::string render_step(const ProofChain& chain, const ProofStep& step);

/// Structural equality ignoring free-text explanations and the raw text.
bool same_structure(const ProofChain& a, const ProofChain& b);

nlohmann::json chain_to_json(const ProofChain& chain);
/// Inverse of chain_to_json. Symbolic conclusions are re-parsed.
ProofChain chain_from_json(const nlohmann::json& j);

}  // namespace finelogic::proof
