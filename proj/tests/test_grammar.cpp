#include <doctest.h>

#include "oracles.hpp"
#include "qcut/grammar.hpp"

using namespace qcut;
using namespace qcut::oracles;

namespace {

std::set<Word> words_of(const GrammarSpec& g, int max_len) {
    EnumLimits limits;
    limits.max_len = max_len;
    auto res = enumerate_words(g, limits);
    REQUIRE(res.ok);
    return res.words;
}

}  // namespace

TEST_CASE("parse linear grammar from fixture") {
    auto r = parse_grammar_file(fixture("grammar/anbn.json"));
    REQUIRE(r.ok);
    CHECK(grammar_kind(*r.grammar) == "linear");
    CHECK(words_of(*r.grammar, 4) == std::set<Word>{{}, W("ab"), W("aabb")});
}

TEST_CASE("parse errors carry messages") {
    auto r = parse_grammar("{\"kind\": \"linear\", \"variables\": [\"S\"], \"terminals\": "
                           "[\"a\"], \"axiom\": \"S\", \"productions\": [\"S -> a S a S\"]}");
    CHECK(!r.ok);
    bool two_vars = false;
    for (const auto& d : r.diagnostics)
        two_vars = two_vars || d.find("more than one variable") != std::string::npos;
    CHECK(two_vars);

    auto r2 = parse_grammar("not json at all {");
    CHECK(!r2.ok);
    REQUIRE(!r2.diagnostics.empty());
    CHECK(r2.diagnostics[0].find("parse error") != std::string::npos);
}

TEST_CASE("restricted matrix grammar: fixture and cross-block validation") {
    auto r = parse_grammar_file(fixture("grammar/ex2_matrix.json"));
    REQUIRE(r.ok);
    const auto& g = std::get<RestrictedMatrixGrammar>(*r.grammar);
    CHECK(g.index_k == 3);
    CHECK(g.matrices.size() == 3);
    // the language is { a^n b^n c^n }
    CHECK(words_of(*r.grammar, 6) == std::set<Word>{{}, W("abc"), W("aabbcc")});

    // a matrix with a variable from the wrong block is rejected
    auto bad = parse_grammar(
        "{\"kind\": \"restricted-matrix\", \"index\": 2, \"blocks\": [[\"A\"], [\"B\"]], "
        "\"terminals\": [\"a\"], \"axiom\": \"S\", "
        "\"matrices\": [[\"S -> A B\"], [\"A -> a B\", \"B -> a B\"], [\"A ->\", \"B ->\"]]}");
    CHECK(!bad.ok);
    bool cross = false;
    for (const auto& d : bad.diagnostics)
        cross = cross || d.find("cross-block") != std::string::npos;
    CHECK(cross);
}

TEST_CASE("enumerate_words respects max_len 0") {
    auto anbn = parse_grammar_file(fixture("grammar/anbn.json"));
    REQUIRE(anbn.ok);
    CHECK(words_of(*anbn.grammar, 0) == std::set<Word>{{}});  // epsilon is in the language

    auto meta = parse_grammar_file(fixture("grammar/meta_ab.json"));
    REQUIRE(meta.ok);
    CHECK(words_of(*meta.grammar, 0).empty());  // {ab} has no short words
    CHECK(words_of(*meta.grammar, 2) == std::set<Word>{W("ab")});
}

TEST_CASE("enumeration budget errors are reported") {
    auto r = parse_grammar_file(fixture("grammar/ex1_monoidal.json"));
    REQUIRE(r.ok);
    EnumLimits limits;
    limits.max_len = 8;
    limits.node_cap = 3;
    auto res = enumerate_words(*r.grammar, limits);
    CHECK(!res.ok);
    CHECK(res.error.find("budget") != std::string::npos);
}

TEST_CASE("agreement with the naive derivation-tree enumerator") {
    auto anbn = parse_grammar_file(fixture("grammar/anbn.json"));
    REQUIRE(anbn.ok);
    const auto& lin = std::get<LinearGrammar>(*anbn.grammar);
    CHECK(words_of(*anbn.grammar, 6) == naive_linear_words(lin, 6, 16));

    // a two-variable linear grammar with dead branches
    LinearGrammar g2;
    g2.variables = {"S", "T"};
    g2.terminals = {"a", "b", "c"};
    g2.axiom = "S";
    g2.productions = {*parse_production("S -> a T b"), *parse_production("T -> c S d"),
                      *parse_production("S -> c"), *parse_production("T ->")};
    g2.terminals = {"a", "b", "c", "d"};
    GrammarSpec spec2(g2);
    CHECK(words_of(spec2, 6) == naive_linear_words(g2, 6, 16));

    auto ex2 = parse_grammar_file(fixture("grammar/ex2_matrix.json"));
    REQUIRE(ex2.ok);
    const auto& mg = std::get<RestrictedMatrixGrammar>(*ex2.grammar);
    CHECK(words_of(*ex2.grammar, 6) == naive_matrix_words(mg, 6));

    auto l2 = parse_grammar_file(fixture("grammar/l2_matrix.json"));
    REQUIRE(l2.ok);
    const auto& mg2 = std::get<RestrictedMatrixGrammar>(*l2.grammar);
    CHECK(words_of(*l2.grammar, 6) == naive_matrix_words(mg2, 6));
}

TEST_CASE("composition: Example 1 gives {a^n b^n}*") {
    auto r = parse_grammar_file(fixture("grammar/ex1_monoidal.json"));
    REQUIRE(r.ok);
    const auto& mono = std::get<MonoidalGrammar>(*r.grammar);
    CFGrammar composed = compose_monoidal(mono);
    CHECK(composed.axiom == "S");
    CHECK(words_of(*r.grammar, 4) == std::set<Word>{{}, W("ab"), W("abab"), W("aabb")});

    // oracle agreement on the composed grammar
    CHECK(words_of(*r.grammar, 6) == naive_cfg_words(composed, 6, 14));

    // composing a top level that generates only epsilon
    MonoidalGrammar trivial = mono;
    trivial.top.productions = {*parse_production("S ->")};
    CHECK(words_of(GrammarSpec(trivial), 4) == std::set<Word>{{}});
}

TEST_CASE("L_2 = { u u } up to length 6") {
    auto r = parse_grammar_file(fixture("grammar/l2_matrix.json"));
    REQUIRE(r.ok);
    std::set<Word> expected;
    for (const auto& u : {"", "a", "b", "aa", "ab", "ba", "bb", "aaa", "aab", "aba", "abb",
                          "baa", "bab", "bba", "bbb"}) {
        Word w = W(u);
        Word ww = w;
        ww.insert(ww.end(), w.begin(), w.end());
        expected.insert(ww);
    }
    CHECK(words_of(*r.grammar, 6) == expected);
}

TEST_CASE("bounded semilinear encoding") {
    // u = (a, b), v0 = 0, period (1,1): { a^n b^n }
    auto g = semilinear_to_restricted({W("a"), W("b")}, {0, 0}, {{1, 1}});
    CHECK(validate_grammar(GrammarSpec(g)).empty());
    CHECK(words_of(GrammarSpec(g), 10) ==
          std::set<Word>{{}, W("ab"), W("aabb"), W("aaabbb"), W("aaaabbbb"), W("aaaaabbbbb")});

    // no periods, offset (2,1): the single word aab
    auto g2 = semilinear_to_restricted({W("a"), W("b")}, {2, 1}, {});
    CHECK(words_of(GrammarSpec(g2), 10) == std::set<Word>{W("aab")});

    // Example 2 language from the encoder
    auto g3 = semilinear_to_restricted({W("a"), W("b"), W("c")}, {0, 0, 0}, {{1, 1, 1}});
    CHECK(words_of(GrammarSpec(g3), 6) == std::set<Word>{{}, W("abc"), W("aabbcc")});

    CHECK_THROWS_AS(semilinear_to_restricted({}, {}, {}), std::invalid_argument);

    // fixture file goes through the same encoder
    auto r = parse_grammar_file(fixture("grammar/bsl_anbn.json"));
    REQUIRE(r.ok);
    CHECK(grammar_kind(*r.grammar) == "restricted-matrix");
    CHECK(words_of(*r.grammar, 6) == std::set<Word>{{}, W("ab"), W("aabb"), W("aaabbb")});
}

TEST_CASE("grammar JSON round-trip") {
    for (const auto& name :
         {"grammar/anbn.json", "grammar/ex1_monoidal.json", "grammar/ex2_matrix.json",
          "grammar/l2_matrix.json", "grammar/meta_ab.json"}) {
        auto r = parse_grammar_file(fixture(name));
        REQUIRE(r.ok);
        std::string text = grammar_to_json(*r.grammar);
        auto again = parse_grammar(text);
        REQUIRE(again.ok);
        CHECK(*again.grammar == *r.grammar);
        CHECK(grammar_to_json(*again.grammar) == text);
    }
}

TEST_CASE("monoidal validation rejects non-erasing lowest-level exits") {
    auto bad = parse_grammar(
        "{\"kind\": \"monoidal\", \"levels\": [{\"alphabet\": [\"a\", \"b\"], "
        "\"grammar\": {\"variable\": \"S\", \"productions\": [\"S -> a S b\", \"S -> a\"]}}]}");
    CHECK(!bad.ok);
    bool msg = false;
    for (const auto& d : bad.diagnostics)
        msg = msg || d.find("erasing") != std::string::npos;
    CHECK(msg);
}

TEST_CASE("derivation trees rebuild from recorded steps") {
    auto r = parse_grammar_file(fixture("grammar/ex1_monoidal.json"));
    REQUIRE(r.ok);
    CFGrammar cfg = compose_monoidal(std::get<MonoidalGrammar>(*r.grammar));
    EnumLimits limits;
    limits.max_len = 4;
    limits.var_bound = 6;
    auto en = enumerate_cfg(cfg, limits);
    REQUIRE(en.ok);
    REQUIRE(en.derivations.count(W("abab")));
    DerivTree t = derivation_tree(cfg, en.derivations.at(W("abab")));
    CHECK(t.production_index >= 0);
}
