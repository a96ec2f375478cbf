#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "finelogic/bench/dataset.hpp"
#include "finelogic/probe/dump.hpp"

namespace finelogic::probe {

class MissingGoldProof : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class InsufficientFacts : public std::invalid_argument {
 public:
  InsufficientFacts(std::string kind, std::size_t have, std::size_t need)
      : std::invalid_argument(kind + " facts: have " + std::to_string(have) + ", need " + std::to_string(need)),
        kind_(std::move(kind)),
        have_(have),
        need_(need) {}
  const std::string& kind() const { return kind_; }
  std::size_t have() const { return have_; }
  std::size_t need() const { return need_; }

 private:
  std::string kind_;
  std::size_t have_, need_;
};

class InsufficientCandidates : public std::invalid_argument {
 public:
  InsufficientCandidates(int anchor, const std::string& what)
      : std::invalid_argument("anchor " + std::to_string(anchor) + ": " + what), anchor_(anchor) {}
  int anchor() const { return anchor_; }

 private:
  int anchor_;
};

/// Fact lines followed by the hypothesis line.
std::string problem_statement(const bench::Problem& problem);

/// Prefix i holds the statement and gold steps 1..i; labeled with the problem's answer.
std::vector<InstanceSpec> build_css_prefixes(const bench::Problem& problem);

/// Necessary facts are those in the dependency closure of the final conclusion.
struct FactPools {
  std::vector<std::string> necessary;
  std::vector<std::string> redundant;
};
FactPools fact_pools(const bench::Problem& problem);

/// Three necessary and three redundant facts, each restated after the statement.
std::vector<InstanceSpec> build_rfi_instances(const bench::Problem& problem, std::uint64_t seed);

/// Derivability of later step `candidate` (ordinal) once steps 1..anchor are written.
bool derivable_at(const proof::ProofChain& chain, int candidate, int anchor);

/// Six anchors, each with three derivable and three not-yet-derivable later steps.
std::vector<InstanceSpec> build_nsd_instances(const bench::Problem& problem, std::uint64_t seed);

/// Deterministic draw of k items: a partial Fisher-Yates shuffle on a
/// 64-bit Mersenne twister seeded from `seed` and `salt`.
std::vector<std::size_t> sample_indices(std::size_t n, std::size_t k, std::uint64_t seed, std::string_view salt);

}  // namespace finelogic::probe
