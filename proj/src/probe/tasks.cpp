#include <algorithm>
#include <random>

#include "finelogic/probe/tasks.hpp"

namespace finelogic::probe {

namespace {

const proof::ProofChain& gold_of(const bench::Problem& p) {
  if (!p.gold_proof || p.gold_proof->empty()) throw MissingGoldProof("problem " + p.id + " has no gold proof");
  return *p.gold_proof;
}

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

/// Gold steps up to the last one before the final answer line.
std::string steps_text(const proof::ProofChain& chain, int upto) {
  std::string out;
  for (int i = 1; i <= upto; ++i) {
    out += proof::render_step(chain, chain.steps[static_cast<std::size_t>(i - 1)]);
    out += '\n';
  }
  return out;
}

std::string fact_text(const bench::Problem& p, const std::string& label) {
  for (std::size_t i = 0; i < p.facts.size(); ++i) {
    if (label == "fact" + std::to_string(i + 1)) return p.facts[i];
  }
  return {};
}

}  // namespace

std::vector<std::size_t> sample_indices(std::size_t n, std::size_t k, std::uint64_t seed, std::string_view salt) {
  std::vector<std::size_t> idx(n);
  for (std::size_t i = 0; i < n; ++i) idx[i] = i;
  std::mt19937_64 rng(seed ^ fnv1a(salt));
  k = std::min(k, n);
  for (std::size_t i = 0; i < k; ++i) {
    std::size_t j = i + static_cast<std::size_t>(rng() % (n - i));
    std::swap(idx[i], idx[j]);
  }
  idx.resize(k);
  return idx;
}

std::string problem_statement(const bench::Problem& problem) {
  std::string out = bench::format_facts(problem.facts);
  if (!out.empty()) out += '\n';
  out += "hypothesis: " + problem.hypothesis + '\n';
  return out;
}

std::vector<InstanceSpec> build_css_prefixes(const bench::Problem& problem) {
  const auto& chain = gold_of(problem);
  std::string statement = problem_statement(problem);
  std::vector<InstanceSpec> out;
  std::string body;
  for (std::size_t i = 0; i < chain.steps.size(); ++i) {
    body += proof::render_step(chain, chain.steps[i]);
    body += '\n';
    out.push_back({problem.id, Task::CSS, static_cast<int>(i + 1), std::nullopt,
                   std::string(bench::label_name(problem.label)), statement + body});
  }
  return out;
}

FactPools fact_pools(const bench::Problem& problem) {
  const auto& chain = gold_of(problem);
  auto needed = proof::necessary_fact_labels(chain);
  FactPools pools;
  for (std::size_t i = 0; i < problem.facts.size(); ++i) {
    std::string label = "fact" + std::to_string(i + 1);
    bool nec = std::find(needed.begin(), needed.end(), label) != needed.end();
    (nec ? pools.necessary : pools.redundant).push_back(label);
  }
  return pools;
}

std::vector<InstanceSpec> build_rfi_instances(const bench::Problem& problem, std::uint64_t seed) {
  FactPools pools = fact_pools(problem);
  if (pools.necessary.size() < 3) throw InsufficientFacts("necessary", pools.necessary.size(), 3);
  if (pools.redundant.size() < 3) throw InsufficientFacts("redundant", pools.redundant.size(), 3);
  std::string statement = problem_statement(problem);
  std::vector<InstanceSpec> out;
  auto emit = [&](const std::vector<std::string>& pool, const char* label, std::string_view salt) {
    for (std::size_t i : sample_indices(pool.size(), 3, seed, problem.id + std::string(salt))) {
      const std::string& f = pool[i];
      out.push_back({problem.id, Task::RFI, 0, f, label, statement + f + ": " + fact_text(problem, f) + '\n'});
    }
  };
  emit(pools.necessary, "necessary", "/rfi/necessary");
  emit(pools.redundant, "redundant", "/rfi/redundant");
  return out;
}

bool derivable_at(const proof::ProofChain& chain, int candidate, int anchor) {
  const auto& s = chain.steps.at(static_cast<std::size_t>(candidate - 1));
  return std::all_of(s.premise_ordinals.begin(), s.premise_ordinals.end(), [&](int o) { return o <= anchor; });
}

std::vector<InstanceSpec> build_nsd_instances(const bench::Problem& problem, std::uint64_t seed) {
  const auto& chain = gold_of(problem);
  int n = static_cast<int>(chain.steps.size());
  auto is_candidate = [&](int ord) {
    auto k = chain.steps[static_cast<std::size_t>(ord - 1)].kind;
    return k != proof::StepKind::GivenFact && k != proof::StepKind::Assumption;
  };
  struct Anchor {
    int t;
    std::vector<int> yes, no;
  };
  std::vector<Anchor> eligible;
  int last_short = 0;
  for (int t = 1; t < n; ++t) {
    Anchor a{t, {}, {}};
    for (int c = t + 1; c <= n; ++c) {
      if (is_candidate(c)) (derivable_at(chain, c, t) ? a.yes : a.no).push_back(c);
    }
    if (a.yes.size() >= 3 && a.no.size() >= 3) {
      eligible.push_back(std::move(a));
    } else {
      last_short = t;
    }
  }
  if (eligible.size() < 6) {
    throw InsufficientCandidates(last_short, "only " + std::to_string(eligible.size()) +
                                                 " anchors have 3 derivable and 3 non-derivable candidates");
  }
  auto picks = sample_indices(eligible.size(), 6, seed, problem.id + "/nsd/anchors");
  std::sort(picks.begin(), picks.end());
  std::string statement = problem_statement(problem);
  std::vector<InstanceSpec> out;
  for (std::size_t pi : picks) {
    const Anchor& a = eligible[pi];
    std::string prefix = statement + steps_text(chain, a.t);
    auto emit = [&](const std::vector<int>& pool, const char* label, const char* salt) {
      for (std::size_t i : sample_indices(pool.size(), 3, seed, problem.id + salt + std::to_string(a.t))) {
        proof::ProofStep cand = chain.steps[static_cast<std::size_t>(pool[i] - 1)];
        std::string text = proof::render_step(chain, cand);
        // present the candidate as the next step
        text.replace(0, text.find(':'), "Step " + std::to_string(a.t + 1));
        out.push_back({problem.id, Task::NSD, a.t, "step" + std::to_string(pool[i]), label, prefix + text + '\n'});
      }
    };
    emit(a.yes, "derivable", "/nsd/yes/");
    emit(a.no, "not-derivable", "/nsd/no/");
  }
  return out;
}

}  // namespace finelogic::probe
