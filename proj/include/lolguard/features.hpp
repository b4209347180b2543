#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <vector>

#include "lolguard/token.hpp"
#include "lolguard/vocabulary.hpp"

namespace lolguard {

// Windowed additive one-hot vector for the token at `position`: 1 at the
// target's vocabulary index, 1/(d+1) added for each neighbor at distance
// d <= window. Components are exact rationals over lcm(1..window+1).
Eigen::VectorXd token_vector(const std::vector<Token>& tokens, std::size_t position,
                             const Vocabulary& vocab, int window = 2);

// One row per token, in command order; empty commands yield a 0-row matrix
// with vocabulary-sized columns.
Eigen::MatrixXd command_matrix(const TokenizedCommand& tc, const Vocabulary& vocab,
                               int window = 2);

} // namespace lolguard
