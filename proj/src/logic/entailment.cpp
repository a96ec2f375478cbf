#include "finelogic/logic/entailment.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <string>
#include <unordered_map>

namespace finelogic::logic {

std::string_view status_name(EntailmentStatus s) {
  switch (s) {
    case EntailmentStatus::Valid:
      return "valid";
    case EntailmentStatus::Invalid:
      return "invalid";
    case EntailmentStatus::Unknown:
      return "unknown";
  }
  return "unknown";
}

namespace {

using Clock = std::chrono::steady_clock;

struct SharedBudget {
  std::size_t max_nodes;
  Clock::time_point deadline;
  std::size_t nodes = 0;
  bool exhausted = false;

  bool tick() {
    ++nodes;
    if (nodes > max_nodes) exhausted = true;
    if ((nodes & 0xFF) == 0 && Clock::now() > deadline) exhausted = true;
    return !exhausted;
  }
};

// Depth-bounded forward search for one (premises, goal) pair.
class ForwardSearch {
 public:
  ForwardSearch(std::vector<Formula> premises, Formula goal, SharedBudget& budget)
      : ctx_(make_generation_context(premises, goal)),
        goal_key_(ac_key(goal)),
        budget_(budget) {
    std::set<std::string> seen;
    for (auto& p : premises) {
      std::string k = ac_key(p);
      if (seen.insert(k).second) available_.push_back({std::move(p), std::move(k)});
    }
    base_size_ = available_.size();
  }

  bool goal_in_premises() const { return contains(goal_key_); }

  /// Looks for a derivation of at most `depth` rule applications.
  std::optional<std::vector<RuleApplication>> run(int depth) {
    path_.clear();
    if (dfs(depth)) return path_;
    return std::nullopt;
  }

 private:
  bool contains(const std::string& k) const {
    return std::any_of(available_.begin(), available_.end(),
                       [&](const KeyedFormula& e) { return e.ac == k; });
  }

  std::string state_key() const {
    std::vector<std::string> derived;
    for (std::size_t i = base_size_; i < available_.size(); ++i) derived.push_back(available_[i].ac);
    std::sort(derived.begin(), derived.end());
    std::string out;
    for (const auto& d : derived) {
      out += d;
      out += '\x1f';
    }
    return out;
  }

  bool dfs(int remaining) {
    if (contains(goal_key_)) return true;
    if (remaining == 0 || !budget_.tick()) return false;
    std::string sk = state_key();
    auto it = failed_.find(sk);
    if (it != failed_.end() && it->second >= remaining) return false;

    auto apps = forward_applications(available_, ctx_);
    for (auto& app : apps) {
      if (ac_key(app.conclusion) == goal_key_) {
        path_.push_back(std::move(app));
        return true;
      }
    }
    if (remaining > 1) {
      for (auto& app : apps) {
        available_.push_back({app.conclusion, ac_key(app.conclusion)});
        path_.push_back(app);
        if (dfs(remaining - 1)) return true;
        path_.pop_back();
        available_.pop_back();
        if (budget_.exhausted) return false;
      }
    }
    if (!budget_.exhausted) failed_[sk] = std::max(failed_[sk], remaining);
    return false;
  }

  GenerationContext ctx_;
  std::string goal_key_;
  SharedBudget& budget_;
  std::vector<KeyedFormula> available_;
  std::size_t base_size_ = 0;
  std::vector<RuleApplication> path_;
  std::unordered_map<std::string, int> failed_;
};

int default_domain_bound(std::span<const Formula> premises, const Formula& conclusion) {
  Signature sig;
  for (const auto& p : premises) collect_signature(p, sig);
  collect_signature(conclusion, sig);
  std::size_t k = std::max<std::size_t>(sig.predicates.size(), 1);
  if (k >= 2) return 4;
  return 2;  // 2^1
}

}  // namespace

EntailmentVerdict entails(std::span<const Formula> premises, const Formula& conclusion,
                          const SearchBudget& budget) {
  if (budget.max_depth <= 0 || budget.max_nodes == 0 || budget.time_limit.count() <= 0 ||
      budget.max_domain < 0) {
    throw InvalidBudget("search budget must be positive");
  }
  for (const auto& p : premises) {
    if (!is_closed(p)) throw std::invalid_argument("premise is not closed: " + print_formula(p));
  }
  if (!is_closed(conclusion)) throw std::invalid_argument("conclusion is not closed");

  EntailmentVerdict verdict;
  SharedBudget shared{budget.max_nodes, Clock::now() + budget.time_limit};
  std::vector<Formula> prem(premises.begin(), premises.end());

  ForwardSearch direct(prem, conclusion, shared);
  std::optional<ForwardSearch> refutation;
  std::optional<Formula> assumption;
  if (conclusion.is(Connective::Not) && !conclusion.lhs().is(Connective::Falsum)) {
    assumption = conclusion.lhs();
    std::vector<Formula> with_assumption = prem;
    with_assumption.push_back(*assumption);
    refutation.emplace(std::move(with_assumption), Formula::falsum(), shared);
  }

  if (direct.goal_in_premises()) {
    verdict.status = EntailmentStatus::Valid;
    verdict.min_rule_count = 0;
    return verdict;
  }
  for (int d = 1; d <= budget.max_depth && !shared.exhausted; ++d) {
    if (auto path = direct.run(d)) {
      verdict.status = EntailmentStatus::Valid;
      verdict.min_rule_count = static_cast<int>(path->size());
      verdict.derivation = std::move(*path);
      break;
    }
    // Reductio closes a refutation of the negated assumption with one more step.
    if (refutation && d >= 2 && !shared.exhausted) {
      if (auto path = refutation->run(d - 1)) {
        path->push_back({Rule::Reductio, {*assumption, Formula::falsum()}, conclusion, {}});
        verdict.status = EntailmentStatus::Valid;
        verdict.min_rule_count = static_cast<int>(path->size());
        verdict.derivation = std::move(*path);
        break;
      }
    }
  }
  verdict.nodes_expanded = shared.nodes;
  verdict.budget_exhausted = shared.exhausted;
  if (verdict.status == EntailmentStatus::Valid) return verdict;

  std::vector<Formula> all = prem;
  all.push_back(conclusion);
  if (monadic_or_ground(all)) {
    int bound = budget.max_domain > 0 ? budget.max_domain : default_domain_bound(prem, conclusion);
    if (auto model = find_countermodel(prem, conclusion, bound)) {
      verdict.status = EntailmentStatus::Invalid;
      verdict.countermodel = std::move(model);
    }
  }
  return verdict;
}

AtomicityResult check_atomic(std::span<const Formula> premises, const Formula& conclusion,
                             const SearchBudget& budget) {
  AtomicityResult result;
  std::string ck = ac_key(conclusion);
  for (const auto& p : premises) {
    if (ac_key(p) == ck) return result;  // restatement: zero rules applied
  }
  if (auto rule = identify_rule(premises, conclusion)) {
    result.atomic = true;
    result.rule = rule;
    return result;
  }
  auto verdict = entails(premises, conclusion, budget);
  result.unknown = verdict.status == EntailmentStatus::Unknown;
  return result;
}

bool validate_derivation(std::span<const Formula> premises,
                         std::span<const RuleApplication> derivation, const Formula& conclusion) {
  std::vector<std::string> available;
  for (const auto& p : premises) available.push_back(ac_key(p));
  auto has = [&](const std::string& k) {
    return std::find(available.begin(), available.end(), k) != available.end();
  };

  std::size_t block_start = available.size();
  for (std::size_t i = 0; i < derivation.size(); ++i) {
    const auto& app = derivation[i];
    if (app.rule == Rule::Reductio) {
      if (app.premises.size() != 2) return false;
      if (!has(ac_key(app.premises[1]))) return false;  // ⊥ must be derived
      if (!rule_instance_holds(Rule::Reductio, app.premises, app.conclusion)) {
        // rule_instance_holds treats premises as a set; keep the roles explicit.
        return false;
      }
      available.resize(block_start);
      available.push_back(ac_key(app.conclusion));
      block_start = available.size();
      continue;
    }
    // Assumptions of a later Reductio are open for this step.
    std::vector<std::string> open;
    for (std::size_t j = i + 1; j < derivation.size(); ++j) {
      if (derivation[j].rule == Rule::Reductio && !derivation[j].premises.empty()) {
        open.push_back(ac_key(derivation[j].premises[0]));
      }
    }
    for (const auto& p : app.premises) {
      std::string k = ac_key(p);
      if (!has(k) && std::find(open.begin(), open.end(), k) == open.end()) return false;
    }
    if (!rule_instance_holds(app.rule, app.premises, app.conclusion)) return false;
    available.push_back(ac_key(app.conclusion));
  }
  return has(ac_key(conclusion));
}

}  // namespace finelogic::logic
