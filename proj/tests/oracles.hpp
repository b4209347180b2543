// Independent brute-force oracles for property and acceptance tests. These
// re-derive expected results from the stated rules only; keep them free of
// the library's implementation paths.
#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "lolguard/classifier.hpp"
#include "lolguard/token.hpp"
#include "lolguard/vocabulary.hpp"

namespace oracles {

// Exact rational feature weights: numerators over lcm(1..window+1). Works on
// vocabulary indices directly; the index at `position` gets 1, a neighbor at
// distance d gets 1/(d+1), contributions add.
struct RationalVector {
    std::vector<long long> numerators;
    long long denominator = 1;

    Eigen::VectorXd to_doubles() const {
        Eigen::VectorXd v(static_cast<Eigen::Index>(numerators.size()));
        for (std::size_t i = 0; i < numerators.size(); ++i)
            v[static_cast<Eigen::Index>(i)] =
                static_cast<double>(numerators[i]) / static_cast<double>(denominator);
        return v;
    }
};

inline RationalVector token_vector_rational(const std::vector<std::size_t>& indices,
                                            std::size_t position, int window,
                                            std::size_t dim) {
    RationalVector out;
    out.denominator = 1;
    for (int d = 1; d <= window + 1; ++d)
        out.denominator = std::lcm(out.denominator, static_cast<long long>(d));
    out.numerators.assign(dim, 0);

    out.numerators[indices[position]] += out.denominator;
    for (int d = 1; d <= window; ++d) {
        const long long w = out.denominator / (d + 1);
        if (position >= static_cast<std::size_t>(d)) out.numerators[indices[position - d]] += w;
        if (position + static_cast<std::size_t>(d) < indices.size())
            out.numerators[indices[position + d]] += w;
    }
    return out;
}

// Corpus rule recount: any token of a malicious command is in; a benign-side
// token needs at least three distinct benign token sequences containing it.
inline std::vector<std::string>
vocabulary_entries_brute(const std::vector<std::pair<lolguard::TokenizedCommand,
                                                     lolguard::Label>>& samples) {
    std::set<std::string> included;
    for (const auto& [tc, label] : samples)
        if (label == lolguard::Label::Malicious)
            for (const auto& t : tc.tokens) included.insert(t.text);

    std::set<std::vector<std::string>> unique_benign;
    for (const auto& [tc, label] : samples) {
        if (label != lolguard::Label::Benign) continue;
        std::vector<std::string> seq;
        for (const auto& t : tc.tokens) seq.push_back(t.text);
        unique_benign.insert(std::move(seq));
    }
    std::map<std::string, int> counts;
    for (const auto& seq : unique_benign) {
        std::set<std::string> distinct(seq.begin(), seq.end());
        for (const auto& text : distinct) ++counts[text];
    }
    for (const auto& [text, count] : counts)
        if (count >= 3) included.insert(text);

    included.insert("<rare>");
    return {included.begin(), included.end()};
}

struct BruteConfusion {
    long tp = 0, fp = 0, tn = 0, fn = 0;
};

inline BruteConfusion confusion_brute(const std::vector<lolguard::Label>& predicted,
                                      const std::vector<lolguard::Label>& truth) {
    BruteConfusion c;
    for (std::size_t i = 0; i < predicted.size(); ++i) {
        const bool p = predicted[i] == lolguard::Label::Malicious;
        const bool t = truth[i] == lolguard::Label::Malicious;
        if (p && t) ++c.tp;
        if (p && !t) ++c.fp;
        if (!p && t) ++c.fn;
        if (!p && !t) ++c.tn;
    }
    return c;
}

// Recomputes each sample's k nearest neighbors (Euclidean, ties by index).
inline std::vector<std::vector<std::size_t>> knn_brute(const Eigen::MatrixXd& rows, int k) {
    const auto n = static_cast<std::size_t>(rows.rows());
    const int k_eff = std::min<int>(k, static_cast<int>(n) - 1);
    std::vector<std::vector<std::size_t>> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<std::pair<double, std::size_t>> dist;
        for (std::size_t j = 0; j < n; ++j) {
            if (j == i) continue;
            dist.emplace_back((rows.row(static_cast<Eigen::Index>(i)) -
                               rows.row(static_cast<Eigen::Index>(j)))
                                  .squaredNorm(),
                              j);
        }
        std::sort(dist.begin(), dist.end());
        for (int t = 0; t < k_eff; ++t) out[i].push_back(dist[static_cast<std::size_t>(t)].second);
    }
    return out;
}

// True when the synthetic row sits on a segment between some minority sample
// and one of its k nearest neighbors, with lambda in [0,1], all within tol.
inline bool smote_on_segment(const Eigen::MatrixXd& minority,
                             const std::vector<std::vector<std::size_t>>& neighbors,
                             const Eigen::RowVectorXd& synthetic, double tol = 1e-9) {
    const auto n = static_cast<std::size_t>(minority.rows());
    for (std::size_t x = 0; x < n; ++x) {
        const Eigen::RowVectorXd base = minority.row(static_cast<Eigen::Index>(x));
        for (std::size_t nb : neighbors[x]) {
            const Eigen::RowVectorXd dir =
                minority.row(static_cast<Eigen::Index>(nb)) - base;
            const double len2 = dir.squaredNorm();
            if (len2 == 0.0) {
                if ((synthetic - base).lpNorm<Eigen::Infinity>() <= tol) return true;
                continue;
            }
            const double lambda = (synthetic - base).dot(dir) / len2;
            if (lambda < -tol || lambda > 1.0 + tol) continue;
            if ((synthetic - (base + lambda * dir)).lpNorm<Eigen::Infinity>() <= tol)
                return true;
        }
    }
    return false;
}

} // namespace oracles
