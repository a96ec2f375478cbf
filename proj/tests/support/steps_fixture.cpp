#include "support/steps_fixture.hpp"

#include <fstream>

#include "support/bench_fixture.hpp"

namespace finelogic::testing {

std::vector<proof::ProofChain> StepsFixture::chains() const {
  std::vector<proof::ProofChain> out;
  for (const auto& e : entries) out.push_back(e.chain);
  return out;
}

StepsFixture load_steps_fixture() {
  StepsFixture fx;
  auto dir = fixture_dir() / "steps";
  std::ifstream in(dir / "chains.jsonl");
  std::string line;
  while (std::getline(in, line)) {
    auto j = nlohmann::json::parse(line);
    StepsFixture::Entry e{j.at("id"), j.at("text"), j.at("expect"), {}};
    proof::ParseOptions o;
    o.problem_id = e.id;
    e.chain = proof::parse_proof(e.text, o);
    fx.entries.push_back(std::move(e));
  }
  std::ifstream ex(dir / "expected.json");
  fx.expected = nlohmann::json::parse(ex);
  return fx;
}

}  // namespace finelogic::testing
