#pragma once

#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "finelogic/bench/dataset.hpp"
#include "finelogic/net/completion_client.hpp"
#include "finelogic/util/errors.hpp"

namespace finelogic::bench {

enum class PromptMode { Direct, Cot, FewShot };

std::string_view mode_name(PromptMode m);
std::optional<PromptMode> mode_from_name(std::string_view s);

class MissingExemplar : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class DepthMissing : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Renders the reasoning template for `problem`. Few-shot exemplars share the
/// single example slot, separated by blank lines.
std::string build_prompt(const Problem& problem, PromptMode mode, const std::vector<std::string>& exemplars = {});

struct EvalRecord {
  std::string problem_id;
  std::string raw_output;
  proof::Answer predicted = proof::Answer::None;
  Label gold = Label::Unknown;
  bool correct = false;
  std::optional<std::string> error;
  double latency_ms = 0;
  std::size_t prompt_tokens = 0;  // whitespace-delimited
  std::size_t output_tokens = 0;
};

EvalRecord score_output(const Problem& problem, std::string raw_output);

/// One record per problem, in input order. At most `jobs` prompts are in
/// flight; endpoint failures become per-record errors.
std::vector<EvalRecord> run_eval(const std::vector<Problem>& problems, net::CompletionClient& client, PromptMode mode,
                                 const std::vector<std::string>& exemplars = {}, std::size_t jobs = 4);

double accuracy(const std::vector<EvalRecord>& records);
/// Fraction of records with no answer marker.
double abstention_rate(const std::vector<EvalRecord>& records);

struct DepthBin {
  int lo = 0;
  int hi = 0;  // inclusive
  std::string name() const { return std::to_string(lo) + "-" + std::to_string(hi); }
};

std::vector<DepthBin> default_depth_bins();

struct DepthRow {
  DepthBin bin;
  std::size_t count = 0;
  std::size_t correct = 0;
  std::optional<double> accuracy;  // absent when count is 0
};

/// Records are matched to problems by id. Depths outside every bin are dropped.
std::vector<DepthRow> accuracy_by_depth(const std::vector<EvalRecord>& records, const std::vector<Problem>& problems,
                                        const std::vector<DepthBin>& bins = default_depth_bins());

struct ReportRow {
  std::string dataset;
  std::string mode;
  std::size_t n = 0;
  double accuracy = 0;
  double abstention_rate = 0;
};

ReportRow summarize(const std::vector<EvalRecord>& records, DatasetKind dataset, PromptMode mode);

void write_report_csv(std::ostream& out, const std::vector<ReportRow>& rows);
nlohmann::json report_to_json(const std::vector<ReportRow>& rows);
void write_depth_csv(std::ostream& out, const ReportRow& summary, const std::vector<DepthRow>& rows);
nlohmann::json depth_to_json(const ReportRow& summary, const std::vector<DepthRow>& rows);

nlohmann::json record_to_json(const EvalRecord& r);
EvalRecord record_from_json(const nlohmann::json& j);

}  // namespace finelogic::bench
