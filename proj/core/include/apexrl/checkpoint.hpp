#pragma once

#include <string>

#include "apexrl/learner.hpp"

namespace apexrl {

// JSON snapshot of the full learner state: every net (targets included),
// optimizer moments, the entropy weight, and the dual variables. Doubles
// survive a save/load round-trip bit-exactly, so resumed training and
// re-evaluation are deterministic.
void save_checkpoint(const std::string& path, const LearnerNets& nets, const LagrangianState& lag);

struct Checkpoint {
  LearnerNets nets;
  LagrangianState lag;
};

// Throws ParseError on malformed files or an unknown schema version.
Checkpoint load_checkpoint(const std::string& path);

}  // namespace apexrl
