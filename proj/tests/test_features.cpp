#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "lolguard/errors.hpp"
#include "lolguard/features.hpp"
#include "oracles.hpp"

using namespace lolguard;

namespace {

Vocabulary abc_vocab() {
    return Vocabulary("test", {"<rare>", "a", "b", "c"});
}

std::vector<Token> words(const std::vector<std::string>& texts) {
    std::vector<Token> out;
    for (const auto& t : texts) out.push_back(make_word(t));
    return out;
}

} // namespace

TEST_CASE("window weights are 1, 1/2, 1/3") {
    const Vocabulary v = abc_vocab();

    Eigen::VectorXd single = token_vector(words({"a"}), 0, v, 2);
    CHECK(single[v.index_of("a")] == 1.0);
    CHECK(single.sum() == 1.0);

    Eigen::VectorXd pair = token_vector(words({"a", "b"}), 0, v, 2);
    CHECK(pair[v.index_of("a")] == 1.0);
    CHECK(pair[v.index_of("b")] == 0.5);

    Eigen::VectorXd triple = token_vector(words({"a", "b", "c"}), 0, v, 2);
    CHECK(triple[v.index_of("a")] == 1.0);
    CHECK(triple[v.index_of("b")] == 0.5);
    CHECK(triple[v.index_of("c")] == 1.0 / 3.0);
}

TEST_CASE("repeated window tokens accumulate") {
    const Vocabulary v = abc_vocab();
    Eigen::VectorXd vec = token_vector(words({"a", "b", "a"}), 1, v, 2);
    CHECK(vec[v.index_of("b")] == 1.0);
    CHECK(vec[v.index_of("a")] == 1.0); // 1/2 from each side
}

TEST_CASE("position bounds are enforced") {
    const Vocabulary v = abc_vocab();
    CHECK_THROWS_AS(token_vector(words({"a"}), 1, v, 2), PositionOutOfRangeError);
    CHECK_THROWS_AS(token_vector({}, 0, v, 2), PositionOutOfRangeError);
    CHECK_THROWS_AS(token_vector(words({"a"}), 0, v, 0), std::invalid_argument);
}

TEST_CASE("window 1 uses only weights 1 and 1/2") {
    const Vocabulary v = abc_vocab();
    Eigen::VectorXd vec = token_vector(words({"a", "b", "c"}), 1, v, 1);
    CHECK(vec[v.index_of("a")] == 0.5);
    CHECK(vec[v.index_of("b")] == 1.0);
    CHECK(vec[v.index_of("c")] == 0.5);
}

TEST_CASE("unknown targets collapse onto the dust-bin index") {
    const Vocabulary v = abc_vocab();
    Eigen::VectorXd x = token_vector(words({"a", "mystery1", "b"}), 1, v, 2);
    Eigen::VectorXd y = token_vector(words({"a", "mystery2", "b"}), 1, v, 2);
    CHECK(x == y);
    CHECK(x[v.rare_index()] == 1.0);
}

TEST_CASE("command_matrix stacks token vectors in order") {
    const Vocabulary v = abc_vocab();
    TokenizedCommand tc;
    tc.binary = "test";
    tc.tokens = words({"a", "b", "c"});

    Eigen::MatrixXd m = command_matrix(tc, v, 2);
    REQUIRE(m.rows() == 3);
    REQUIRE(m.cols() == static_cast<Eigen::Index>(v.size()));
    for (std::size_t i = 0; i < 3; ++i)
        CHECK(m.row(static_cast<Eigen::Index>(i)) == token_vector(tc.tokens, i, v, 2).transpose());

    tc.tokens.clear();
    Eigen::MatrixXd empty = command_matrix(tc, v, 2);
    CHECK(empty.rows() == 0);
    CHECK(empty.cols() == static_cast<Eigen::Index>(v.size()));
}

TEST_CASE("vectors match the exact rational oracle on random commands") {
    const Vocabulary v = abc_vocab();
    static const std::vector<std::string> pool = {"a", "b", "c", "zz1", "zz2"};
    std::mt19937_64 rng(3);

    for (int trial = 0; trial < 300; ++trial) {
        const auto len = 1 + rng() % 8;
        std::vector<Token> tokens;
        std::vector<std::size_t> indices;
        for (std::uint64_t i = 0; i < len; ++i) {
            tokens.push_back(make_word(pool[rng() % pool.size()]));
            indices.push_back(v.index_of(tokens.back().text));
        }
        const int window = 1 + static_cast<int>(rng() % 3);
        for (std::size_t pos = 0; pos < tokens.size(); ++pos) {
            const Eigen::VectorXd got = token_vector(tokens, pos, v, window);
            const auto expect = oracles::token_vector_rational(indices, pos, window, v.size());
            CHECK(got == expect.to_doubles()); // bitwise: both sides are exact rationals
        }
    }
}

TEST_CASE("total mass never exceeds 8/3 for window 2") {
    const Vocabulary v = abc_vocab();
    std::mt19937_64 rng(5);
    static const std::vector<std::string> pool = {"a", "b", "c"};
    const double bound = 8.0 / 3.0;

    for (int trial = 0; trial < 200; ++trial) {
        const auto len = 1 + rng() % 8;
        std::vector<Token> tokens;
        for (std::uint64_t i = 0; i < len; ++i)
            tokens.push_back(make_word(pool[rng() % pool.size()]));
        for (std::size_t pos = 0; pos < tokens.size(); ++pos) {
            const double mass = token_vector(tokens, pos, v, 2).sum();
            CHECK(mass <= bound + 1e-12);
            const bool interior = pos >= 2 && pos + 2 < tokens.size();
            if (interior) CHECK(mass == doctest::Approx(bound).epsilon(1e-12));
        }
    }
}

TEST_CASE("tokens beyond the prefix window keep their vectors when shifted") {
    const Vocabulary v = abc_vocab();
    const std::vector<Token> base = words({"a", "b", "c", "a", "b", "c"});
    const std::vector<std::string> prefix_texts = {"c", "b"};

    std::vector<Token> shifted = words(prefix_texts);
    shifted.insert(shifted.end(), base.begin(), base.end());

    const int window = 2;
    for (std::size_t pos = window; pos < base.size(); ++pos)
        CHECK(token_vector(base, pos, v, window) ==
              token_vector(shifted, pos + prefix_texts.size(), v, window));
}
