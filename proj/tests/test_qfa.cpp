#include <doctest.h>

#include <fstream>
#include <sstream>

#include "oracles.hpp"
#include "qcut/qfa.hpp"

using namespace qcut;
using namespace qcut::oracles;

namespace {

QuantumAutomaton rot_qfa() {
    QuantumAutomaton q;
    q.dim = 2;
    q.alphabet = {"a", "b"};
    q.start = QVector(std::vector<Rat>{Rat(1), Rat(0)});
    q.phi.emplace("a", rot35());
    q.phi.emplace("b", rot35().transpose());
    QMatrix p(2);
    p.at(0, 0) = 1;
    q.projection = p;
    q.lambda = rat_of(1, 2);
    return q;
}

}  // namespace

TEST_CASE("validate accepts the rotation automaton") {
    CHECK(validate(rot_qfa()).empty());
}

TEST_CASE("validate reports each violated condition") {
    QuantumAutomaton q = rot_qfa();
    q.start = QVector(std::vector<Rat>{Rat(1), Rat(1)});
    auto v = validate(q);
    REQUIRE(v.size() == 1);
    CHECK(v[0] == "start vector norm^2 = 2 != 1");

    q = rot_qfa();
    QMatrix p(2);
    p.at(0, 0) = 1;
    p.at(0, 1) = 1;
    q.projection = p;
    v = validate(q);
    REQUIRE(v.size() == 1);
    CHECK(v[0] == "P not idempotent-symmetric");

    q = rot_qfa();
    QMatrix bad(2);
    bad.at(0, 0) = 1;
    bad.at(0, 1) = 1;
    bad.at(1, 1) = 1;
    q.phi.at("a") = bad;
    v = validate(q);
    REQUIRE(v.size() == 1);
    CHECK(v[0] == "phi(a) is not orthogonal");
}

TEST_CASE("phi_of_word is the morphism") {
    QuantumAutomaton q = rot_qfa();
    CHECK(phi_of_word(q, {}) == QMatrix::identity(2));
    CHECK(phi_of_word(q, W("a")) == rot35());
    QMatrix rr = phi_of_word(q, W("aa"));
    CHECK(rr.at(0, 0) == rat_of(-7, 25));
    CHECK(rr.at(0, 1) == rat_of(24, 25));
    CHECK_THROWS_AS(phi_of_word(q, W("z")), std::invalid_argument);

    // morphism property on concatenation
    CHECK(phi_of_word(q, W("abab")) ==
          mat_mul(phi_of_word(q, W("ab")), phi_of_word(q, W("ab"))));
}

TEST_CASE("accept_prob examples") {
    QuantumAutomaton q = rot_qfa();
    CHECK(accept_prob(q, {}) == 1);            // s P = s
    CHECK(accept_prob(q, W("a")) == rat_of(9, 25));  // project (3/5, 4/5) then norm^2
    QuantumAutomaton qz = rot_qfa();
    qz.projection = QMatrix::zero(2);
    CHECK(accept_prob(qz, W("ab")) == 0);
}

TEST_CASE("acceptance values stay within [0, 1] and preserve norm") {
    QuantumAutomaton q = rot_qfa();
    for (const auto& text : {"", "a", "b", "ab", "ba", "aab", "abba", "bbbb"}) {
        Word w = W(text);
        Rat p = accept_prob(q, w);
        CHECK(p >= 0);
        CHECK(p <= 1);
        QVector moved = vec_mat_mul(q.start, phi_of_word(q, w));
        CHECK(moved.norm_sq() == 1);  // orthogonal invariance
    }
}

TEST_CASE("in_cutpoint boundary behaviour") {
    QuantumAutomaton q = rot_qfa();
    CHECK(!in_cutpoint(q, W("a"), CutpointMode::Strict));  // 9/25 < 1/2
    q.lambda = Rat(1);
    CHECK(!in_cutpoint(q, {}, CutpointMode::Strict));     // prob 1, not > 1
    CHECK(in_cutpoint(q, {}, CutpointMode::Nonstrict));   // prob 1 >= 1
    q.lambda = Rat(-1);
    CHECK(in_cutpoint(q, W("ab"), CutpointMode::Strict));  // probabilities >= 0
}

TEST_CASE("file round-trip") {
    auto loaded = load_qfa_file(fixture("qfa/rot2.json"));
    REQUIRE(loaded.ok);
    CHECK(loaded.qfa.dim == 2);
    CHECK(loaded.qfa.letter("a") == rot35());
    std::string text = qfa_to_json(loaded.qfa);
    auto again = load_qfa(text);
    REQUIRE(again.ok);
    CHECK(again.qfa.phi == loaded.qfa.phi);
    CHECK(again.qfa.start == loaded.qfa.start);
    CHECK(again.qfa.lambda == loaded.qfa.lambda);
    CHECK(qfa_to_json(again.qfa) == text);
}

TEST_CASE("load rejects malformed input with diagnostics") {
    auto r = load_qfa("{\"dim\": 2}");
    CHECK(!r.ok);
    CHECK(!r.diagnostics.empty());
    auto r2 = load_qfa("{\"dim\": 2, \"alphabet\": [\"a\"], \"s\": [\"1\", \"1\"], "
                       "\"phi\": {\"a\": [[\"1\",\"0\"],[\"0\",\"1\"]]}, "
                       "\"P\": [[\"1\",\"0\"],[\"0\",\"0\"]], \"lambda\": \"1/2\"}");
    CHECK(!r2.ok);  // non-unit start vector
    bool found = false;
    for (const auto& d : r2.diagnostics) found = found || d.find("norm") != std::string::npos;
    CHECK(found);
    // floating point entries are rejected
    auto r3 = load_qfa("{\"dim\": 1, \"alphabet\": [], \"s\": [1.0], \"phi\": {}, "
                       "\"P\": [[1]], \"lambda\": 0}");
    CHECK(!r3.ok);
}

TEST_CASE("word parsing follows the alphabet") {
    QuantumAutomaton q = rot_qfa();
    CHECK(parse_word(q, "aab") == W("aab"));
    CHECK(parse_word(q, "a b a") == W("aba"));
    CHECK_THROWS_AS(parse_word(q, "ax"), std::invalid_argument);
    CHECK(word_to_string(W("ab")) == "ab");
}
