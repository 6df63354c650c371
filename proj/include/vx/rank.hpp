#pragma once

#include "vx/corpus.hpp"
#include "vx/matcher.hpp"

namespace vx {

struct RankedMatches {
    std::vector<Match> high; // untested code, review first
    std::vector<Match> low;  // already fuzz-covered
};

// Untested code ranks high: true iff the enclosing function is absent from
// the coverset.
bool is_high(const Match& match, const Coverset& coverset);

// Partition preserving MatchSet order within each list.
RankedMatches rank_matches(const MatchSet& matches, const Coverset& coverset);

} // namespace vx
