#include <benchmark/benchmark.h>

#include "qcut/closure.hpp"
#include "qcut/pipeline.hpp"

using namespace qcut;

namespace {

QMatrix rot() {
    QMatrix m(2);
    m.at(0, 0) = rat_of(3, 5);
    m.at(0, 1) = rat_of(4, 5);
    m.at(1, 0) = rat_of(-4, 5);
    m.at(1, 1) = rat_of(3, 5);
    return m;
}

void BM_mat_mul(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    QMatrix a = QMatrix::identity(n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) a.at(i, j) = rat_of((i * 7 + j * 3) % 11 - 5, 1 + ((i + j) % 4));
    QMatrix b = a.transpose();
    for (auto _ : state) benchmark::DoNotOptimize(mat_mul(a, b));
}
BENCHMARK(BM_mat_mul)->Arg(4)->Arg(8)->Arg(12);

void BM_groebner_so2(benchmark::State& state) {
    const int nv = 4;
    Poly x11 = Poly::variable(nv, 0), x12 = Poly::variable(nv, 1);
    Poly x21 = Poly::variable(nv, 2), x22 = Poly::variable(nv, 3);
    std::vector<Poly> gens{x11 * x11 + x21 * x21 - Poly::constant(nv, Rat(1)),
                           x12 * x12 + x22 * x22 - Poly::constant(nv, Rat(1)),
                           x11 * x12 + x21 * x22,
                           x11 * x22 - x12 * x21 - Poly::constant(nv, Rat(1))};
    for (auto _ : state) {
        Budget b;
        benchmark::DoNotOptimize(groebner_basis(gens, MonomialOrder::grevlex(), b));
    }
}
BENCHMARK(BM_groebner_so2);

void BM_group_closure_rotation(benchmark::State& state) {
    GeneratorSet e;
    e.dim = 2;
    e.generators = {rot()};
    for (auto _ : state) {
        Budget b;
        benchmark::DoNotOptimize(group_closure(e, 4, b));
    }
}
BENCHMARK(BM_group_closure_rotation);

void BM_closure_linear_anbn(benchmark::State& state) {
    LinearGrammar g;
    g.variables = {"S"};
    g.terminals = {"a", "b"};
    g.axiom = "S";
    g.productions = {*parse_production("S -> a S b"), *parse_production("S ->")};
    QuantumAutomaton q;
    q.dim = 2;
    q.alphabet = {"a", "b"};
    q.start = QVector(std::vector<Rat>{Rat(1), Rat(0)});
    q.phi.emplace("a", rot());
    q.phi.emplace("b", rot().transpose());
    QMatrix p(2);
    p.at(0, 0) = 1;
    q.projection = p;
    q.lambda = rat_of(1, 2);
    RunConfig cfg;
    for (auto _ : state) {
        Budget b;
        benchmark::DoNotOptimize(closure_linear(g, q, cfg, b));
    }
}
BENCHMARK(BM_closure_linear_anbn);

}  // namespace

BENCHMARK_MAIN();
