#include "vx/rank.hpp"

namespace vx {

bool is_high(const Match& match, const Coverset& coverset) {
    return !coverset.contains(match.enclosing_function);
}

RankedMatches rank_matches(const MatchSet& matches, const Coverset& coverset) {
    RankedMatches ranked;
    for (const Match& match : matches.matches) {
        (is_high(match, coverset) ? ranked.high : ranked.low).push_back(match);
    }
    return ranked;
}

} // namespace vx
