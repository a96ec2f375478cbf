#pragma once

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "finelogic/proof/chain.hpp"

namespace finelogic::bench {

enum class DatasetKind { FLD, FOLIO, MultiLogiEval, ProntoQA, Custom };
enum class Label { T, F, Unknown };

std::string_view dataset_name(DatasetKind k);
std::optional<DatasetKind> dataset_from_name(std::string_view s);
std::string_view label_name(Label l);  // "T", "F", "Unknown"
std::optional<Label> label_from_name(std::string_view s);

/// PROVED↔T, DISPROVED↔F, UNKNOWN↔Unknown; NONE matches nothing.
bool answer_matches(proof::Answer predicted, Label gold);
proof::Answer answer_for(Label gold);

struct Problem {
  std::string id;
  DatasetKind dataset = DatasetKind::Custom;
  std::vector<std::string> facts;
  std::vector<std::string> facts_formula;  // empty, or parallel to facts
  std::string hypothesis;
  std::optional<std::string> hypothesis_formula;
  Label label = Label::Unknown;
  std::optional<int> depth;
  std::optional<proof::ProofChain> gold_proof;

  /// Facts as labeled entries, with formulas when available.
  std::vector<proof::GivenFact> given_facts() const;
};

class SchemaError : public std::runtime_error {
 public:
  SchemaError(std::size_t line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

class LabelOutOfSchema : public SchemaError {
 public:
  using SchemaError::SchemaError;
};

class ManifestMismatch : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct DatasetManifest {
  std::optional<std::size_t> count;
  std::optional<std::pair<int, int>> depth_range;  // inclusive
  std::vector<Label> labels;
  bool depth_required = false;
};

DatasetManifest manifest_for(DatasetKind kind);

Problem problem_from_json(const nlohmann::json& j, std::size_t line = 0);
nlohmann::json problem_to_json(const Problem& p);

/// Reads the internal JSONL schema, validating each record's label against
/// the dataset schema; with `check_manifest`, also the count and depth range.
std::vector<Problem> load_dataset(const std::filesystem::path& path, DatasetKind kind, bool check_manifest = true);
void check_against_manifest(const std::vector<Problem>& problems, DatasetKind kind);

/// Converts one upstream record into the internal schema.
Problem adapt_upstream(DatasetKind kind, const nlohmann::json& record, std::size_t index);
std::vector<Problem> load_upstream(const std::filesystem::path& path, DatasetKind kind);

/// "fact1: s1\nfact2: s2"
std::string format_facts(const std::vector<std::string>& facts);

}  // namespace finelogic::bench
