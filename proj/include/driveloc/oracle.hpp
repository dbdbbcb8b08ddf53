#pragma once

// Brute-force re-implementations of the localization stages. They evaluate every rule
// predicate directly from the raw probabilities (top-2 membership included) and share no
// code with the production stages, so equivalence tests compare two independent routes.

#include <string_view>
#include <vector>

#include "driveloc/localize.hpp"

namespace driveloc::oracle {

/// Class `c` ranks top-2 in `probs` (lower id wins ties) with non-zero probability.
bool in_top2(const std::vector<double>& probs, ClassId c);

/// Best contiguous clip run where `class_id` ranks top-2: highest cumulative probability,
/// then longer, then earlier. Throws NoCandidateRun if the class never ranks top-2.
Candidate best_run(const DecodedSequence& seq, ClassId class_id, const PostParams& params);

enum class Stage { Decode, Merge, Decision, Restore };
Stage parse_stage(std::string_view name);

struct StageOutput {
  std::vector<Candidate> candidates;  // Decode, Merge, Decision
  Localization localization;          // Restore
};

StageOutput stage_check(Stage stage, const DecodedSequence& seq,
                        const std::vector<Candidate>& input, const PostParams& params);

}  // namespace driveloc::oracle
