#pragma once

#include <random>

#include "finelogic/proof/chain.hpp"

namespace finelogic::testing {

/// Structurally well-formed symbolic chain with random citations, nested
/// assumption blocks and occasional re-used labels. Not necessarily valid.
proof::ProofChain random_chain(std::mt19937_64& rng, int max_steps = 12);

/// Random printable text sprinkled with proof-grammar fragments.
std::string random_noise(std::mt19937_64& rng, std::size_t length);

}  // namespace finelogic::testing
