#include "lolguard/features.hpp"

#include <numeric>
#include <stdexcept>
#include <vector>

#include "lolguard/errors.hpp"

namespace lolguard {

namespace {

// Common denominator for the window weights 1, 1/2, ..., 1/(window+1).
// Accumulating integer numerators keeps every component an exact rational.
long long weight_denominator(int window) {
    long long l = 1;
    for (int d = 1; d <= window + 1; ++d) l = std::lcm(l, static_cast<long long>(d));
    return l;
}

} // namespace

Eigen::VectorXd token_vector(const std::vector<Token>& tokens, std::size_t position,
                             const Vocabulary& vocab, int window) {
    if (window < 1) throw std::invalid_argument("window must be >= 1");
    if (position >= tokens.size())
        throw PositionOutOfRangeError("token position " + std::to_string(position) +
                                      " out of range for " + std::to_string(tokens.size()) +
                                      " tokens");

    const long long denom = weight_denominator(window);
    std::vector<long long> numerators(vocab.size(), 0);

    numerators[encode_token(vocab, tokens[position])] += denom;
    for (int d = 1; d <= window; ++d) {
        const long long w = denom / (d + 1);
        if (position >= static_cast<std::size_t>(d))
            numerators[encode_token(vocab, tokens[position - d])] += w;
        if (position + d < tokens.size())
            numerators[encode_token(vocab, tokens[position + d])] += w;
    }

    Eigen::VectorXd values(static_cast<Eigen::Index>(vocab.size()));
    for (std::size_t i = 0; i < numerators.size(); ++i)
        values[static_cast<Eigen::Index>(i)] =
            static_cast<double>(numerators[i]) / static_cast<double>(denom);
    return values;
}

Eigen::MatrixXd command_matrix(const TokenizedCommand& tc, const Vocabulary& vocab, int window) {
    Eigen::MatrixXd rows(static_cast<Eigen::Index>(tc.tokens.size()),
                         static_cast<Eigen::Index>(vocab.size()));
    for (std::size_t i = 0; i < tc.tokens.size(); ++i)
        rows.row(static_cast<Eigen::Index>(i)) = token_vector(tc.tokens, i, vocab, window);
    return rows;
}

} // namespace lolguard
