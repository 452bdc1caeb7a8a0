#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <fstream>

#include "oracles.hpp"
#include "qcut/decide.hpp"

using namespace qcut;
using namespace qcut::oracles;

namespace {

QuantumAutomaton load_q(const std::string& rel) {
    auto r = load_qfa_file(fixture(rel));
    REQUIRE(r.ok);
    return r.qfa;
}

GrammarSpec load_g(const std::string& rel) {
    auto r = parse_grammar_file(fixture(rel));
    REQUIRE(r.ok);
    return *r.grammar;
}

std::string write_stub(const std::string& name, const std::string& body) {
    std::string path = "/tmp/qcut-test-" + name + ".sh";
    std::ofstream out(path);
    out << "#!/bin/sh\n" << body << "\n";
    out.close();
    std::system(("chmod +x " + path).c_str());
    return path;
}

}  // namespace

TEST_CASE("decision query acceptance polynomial") {
    auto q = load_q("qfa/rot2.json");
    NameGen names;
    SemiAlg closure = sa_point(QMatrix::identity(2), names);
    DecisionQuery query = build_decision_query(closure, q);
    // acceptance at X = I is ||s P||^2 = 1
    std::vector<Rat> point(static_cast<std::size_t>(closure->var_count()), Rat(0));
    point[0] = 1;
    point[3] = 1;
    CHECK(query.acceptance.eval(point) == 1);
    // at X = R it is 9/25
    QMatrix r = rot35();
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) point[static_cast<std::size_t>(i * 2 + j)] = r.at(i, j);
    CHECK(query.acceptance.eval(point) == rat_of(9, 25));
}

TEST_CASE("smtlib emission structure and determinism") {
    auto q = load_q("qfa/rot2.json");
    NameGen names;
    SemiAlg pt = sa_point(QMatrix::identity(2), names);
    DecisionQuery query = build_decision_query(pt, q);
    std::string text = emit_smtlib(query);
    CHECK(text.find("(set-logic QF_NRA)") == 0);
    // 4 point equations inside one and, one acceptance inequality
    CHECK(text.find("(assert (and") != std::string::npos);
    CHECK(text.find("(assert (>") != std::string::npos);
    CHECK(text.find("(check-sat)") != std::string::npos);
    CHECK(emit_smtlib(query) == text);  // byte-identical

    // negative rationals render as (- p) or (- (/ p q))
    Budget b;
    GeneratorSet e;
    e.dim = 2;
    e.generators = {rot35()};
    auto so2 = group_closure(e, 4, b);
    NameGen names2;
    DecisionQuery q2 = build_decision_query(sa_from_variety(so2.ideal, 2, names2), q);
    std::string t2 = emit_smtlib(q2);
    CHECK(t2.find("(- 1)") != std::string::npos);
}

TEST_CASE("run_solver outcomes") {
    std::string sat = write_stub("sat", "echo sat");
    std::string unsat = write_stub("unsat", "echo unsat");
    std::string garbage = write_stub("garbage", "echo flurble");
    std::string slow = write_stub("slow", "sleep 30; echo sat");
    CHECK(run_solver("(check-sat)", sat, 5).outcome == SolverOutcome::Sat);
    CHECK(run_solver("(check-sat)", unsat, 5).outcome == SolverOutcome::Unsat);
    CHECK(run_solver("(check-sat)", garbage, 5).outcome == SolverOutcome::Unknown);
    CHECK(run_solver("(check-sat)", slow, 1).outcome == SolverOutcome::Timeout);
    CHECK(run_solver("(check-sat)", "/nonexistent/solver-binary", 5).outcome ==
          SolverOutcome::NotRun);
    CHECK(run_solver("(check-sat)", "", 5).outcome == SolverOutcome::NotRun);
}

TEST_CASE("model parsing") {
    std::string model =
        "((define-fun X0_1_1 () Real (/ 3 5))\n"
        " (define-fun X0_1_2 () Real (- (/ 4 5)))\n"
        " (define-fun X0_2_1 () Real 0.5)\n"
        " (define-fun X0_2_2 () Real (- 2)))";
    auto parsed = parse_model_rationals(model);
    REQUIRE(parsed.has_value());
    CHECK(parsed->at("X0_1_1") == rat_of(3, 5));
    CHECK(parsed->at("X0_1_2") == rat_of(-4, 5));
    CHECK(parsed->at("X0_2_1") == rat_of(1, 2));
    CHECK(parsed->at("X0_2_2") == -2);

    CHECK(!parse_model_rationals("sat").has_value());
    CHECK(!parse_model_rationals("(define-fun x () Real (root-obj (+ (^ x 2) (- 2)) 1))")
               .has_value());
}

TEST_CASE("brute_force finds the shortlex witness") {
    auto q = load_q("qfa/rot2.json");
    auto g = load_g("grammar/anbn.json");
    auto res = brute_force(g, q, 8, 100000);
    REQUIRE(res.witness.has_value());
    CHECK(res.witness->empty());  // epsilon has probability 1 > 1/2
    CHECK(*res.prob == 1);

    q.lambda = Rat(1);
    auto none = brute_force(g, q, 8, 100000);
    CHECK(!none.witness.has_value());
    CHECK(none.exhausted);

    q.lambda = Rat(-1);
    auto eps = brute_force(g, q, 8, 100000);
    REQUIRE(eps.witness.has_value());
    CHECK(eps.witness->empty());
}

TEST_CASE("brute_force monotonicity in the bound") {
    auto q = load_q("qfa/rot2_free.json");
    auto g = load_g("grammar/anbn.json");
    auto r4 = brute_force(g, q, 4, 100000);
    auto r8 = brute_force(g, q, 8, 100000);
    if (r4.witness) {
        REQUIRE(r8.witness.has_value());
        CHECK(*r4.witness == *r8.witness);  // the shortlex-first witness is stable
    }
}

TEST_CASE("decide short-circuits") {
    RunConfig cfg;
    cfg.mode = DecideMode::Both;

    auto q = load_q("qfa/rot2.json");
    auto g = load_g("grammar/anbn.json");
    q.lambda = Rat(1);
    auto r = decide(q, g, cfg);
    CHECK(r.verdict == Verdict::Empty);
    CHECK(r.certified);
    CHECK(report_exit_code(r) == 0);

    auto qz = load_q("qfa/zero_p.json");
    auto g2 = load_g("grammar/ex2_matrix.json");
    auto r2 = decide(qz, g2, cfg);
    CHECK(r2.verdict == Verdict::Empty);
    CHECK(r2.certified);
}

TEST_CASE("decide finds witnesses through the brute branch") {
    RunConfig cfg;
    cfg.mode = DecideMode::Both;
    auto q = load_q("qfa/rot2.json");
    auto g = load_g("grammar/anbn.json");
    auto r = decide(q, g, cfg);
    CHECK(r.verdict == Verdict::Nonempty);
    REQUIRE(r.witness_word.has_value());
    CHECK(r.witness_word->empty());
    CHECK(*r.witness_prob == 1);
    CHECK(report_exit_code(r) == 1);
    CHECK(accept_prob(q, *r.witness_word) > q.lambda);  // witness re-checks exactly
}

TEST_CASE("decide symbolic ground path on finite member sets") {
    RunConfig cfg;
    cfg.mode = DecideMode::Symbolic;
    auto q = load_q("qfa/id2.json");  // every letter maps to I
    auto g = load_g("grammar/ex2_matrix.json");
    auto r = decide(q, g, cfg);
    CHECK(r.verdict == Verdict::Nonempty);  // member set {I}, value 1 > 1/2
    CHECK(r.certified);
    CHECK(r.cross_check == "symbolic-only");

    q.lambda = Rat(2);  // nothing exceeds 2: short-circuit
    auto r2 = decide(q, g, cfg);
    CHECK(r2.verdict == Verdict::Empty);
}

TEST_CASE("decide symbolic without a solver stays inconclusive") {
    RunConfig cfg;
    cfg.mode = DecideMode::Symbolic;
    cfg.smt_command = "";
    auto q = load_q("qfa/rot2_free.json");
    auto g = load_g("grammar/anbn.json");
    ::unsetenv("QCUT_SMT_CMD");
    auto r = decide(q, g, cfg);
    CHECK(r.verdict == Verdict::Inconclusive);
    CHECK(report_exit_code(r) == 2);
}

TEST_CASE("decide uses the external solver when configured") {
    RunConfig cfg;
    cfg.mode = DecideMode::Symbolic;
    cfg.smt_command = write_stub("always-unsat", "echo unsat");
    auto q = load_q("qfa/rot2_free.json");
    auto g = load_g("grammar/anbn.json");
    auto r = decide(q, g, cfg);
    CHECK(r.solver_outcome == SolverOutcome::Unsat);
    CHECK(r.verdict == Verdict::Empty);
    CHECK(r.certified);

    // a sat claim without an exactly checkable model stays inconclusive
    cfg.smt_command = write_stub("always-sat", "echo sat");
    auto r2 = decide(q, g, cfg);
    CHECK(r2.solver_outcome == SolverOutcome::Sat);
    CHECK(r2.verdict == Verdict::Inconclusive);
}

TEST_CASE("conflicting branches are reported and exit nonzero") {
    // a lying solver claims unsat while the brute branch holds an exact witness
    RunConfig cfg;
    cfg.mode = DecideMode::Both;
    cfg.smt_command = write_stub("liar", "echo unsat");
    auto q = load_q("qfa/rot2.json");
    auto g = load_g("grammar/anbn.json");
    auto r = decide(q, g, cfg);
    CHECK(r.conflict);
    CHECK(r.cross_check == "conflict");
    CHECK(report_exit_code(r) == 4);
    // the exact witness still stands
    CHECK(r.verdict == Verdict::Nonempty);
}

TEST_CASE("decide validates inputs") {
    RunConfig cfg;
    auto q = load_q("qfa/rot2.json");           // alphabet {a, b}
    auto g = load_g("grammar/ex2_matrix.json");  // needs c
    CHECK_THROWS_AS(decide(q, g, cfg), std::invalid_argument);
}

TEST_CASE("decision report JSON mirrors the report") {
    RunConfig cfg;
    cfg.mode = DecideMode::Brute;
    auto q = load_q("qfa/rot2.json");
    auto g = load_g("grammar/anbn.json");
    auto r = decide(q, g, cfg);
    std::string json = decision_report_json(r);
    CHECK(json.find("\"verdict\": \"NONEMPTY\"") != std::string::npos);
    CHECK(json.find("\"word\": \"\"") != std::string::npos);
    CHECK(json.find("\"probability\": \"1\"") != std::string::npos);
    CHECK(json.find("\"solver_outcome\": \"not-run\"") != std::string::npos);
    CHECK(json.find("\"cross_check\": \"brute-only\"") != std::string::npos);
    // deterministic
    CHECK(decision_report_json(decide(q, g, cfg)) == json);
}
