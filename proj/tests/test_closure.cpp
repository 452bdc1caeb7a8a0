#include <doctest.h>

#include "oracles.hpp"
#include "qcut/closure.hpp"

using namespace qcut;
using namespace qcut::oracles;

namespace {

Budget budget() { return Budget{}; }

GeneratorSet gens_of(std::vector<QMatrix> ms) {
    GeneratorSet e;
    e.dim = ms.empty() ? 0 : ms[0].dim();
    e.generators = std::move(ms);
    return e;
}

// the expected closure of { R^n }: x11 - x22, x12 + x21, x11^2 + x12^2 - 1
PolyIdeal so2_ideal() {
    const int nv = 4;
    Poly x11 = Poly::variable(nv, 0), x12 = Poly::variable(nv, 1);
    Poly x21 = Poly::variable(nv, 2), x22 = Poly::variable(nv, 3);
    return PolyIdeal(nv, {x11 - x22, x12 + x21, x11 * x11 + x12 * x12 - Poly::constant(nv, Rat(1))});
}

}  // namespace

TEST_CASE("closure of the empty generating set is the identity point") {
    GeneratorSet e;
    e.dim = 2;
    Budget b = budget();
    auto res = group_closure(e, 3, b);
    CHECK(res.certified);
    const int nv = 4;
    PolyIdeal expected(nv, {Poly::variable(nv, 0) - Poly::constant(nv, Rat(1)),
                            Poly::variable(nv, 1), Poly::variable(nv, 2),
                            Poly::variable(nv, 3) - Poly::constant(nv, Rat(1))});
    CHECK(ideal_equal(res.ideal, expected, b));
    REQUIRE(res.finite_group.has_value());
    CHECK(res.finite_group->size() == 1);
}

TEST_CASE("closure of an infinite rotation group is SO(2)") {
    // R = [[3/5,4/5],[-4/5,3/5]] has infinite order: (3+4i)/5 is not a root
    // of unity, so the generated group is dense in SO(2)
    Budget b = budget();
    auto res = group_closure(gens_of({rot35()}), 4, b);
    CHECK(res.certified);
    CHECK(ideal_equal(res.ideal, so2_ideal(), b));
    CHECK(!res.finite_group.has_value());

    // membership: R yes, swap no (x12 + x21 evaluates to 2)
    CHECK(contains_point(res.ideal, rot35()));
    CHECK(contains_point(res.ideal, mat_mul(rot35(), rot35())));
    CHECK(!contains_point(res.ideal, swap2()));
    // the closure of a group of orthogonal matrices is transpose-closed
    CHECK(contains_point(res.ideal, rot35().transpose()));
}

TEST_CASE("closure of the swap group is the vanishing ideal of two points") {
    Budget b = budget();
    auto res = group_closure(gens_of({swap2()}), 4, b);
    CHECK(res.certified);
    REQUIRE(res.finite_group.has_value());
    CHECK(res.finite_group->size() == 2);

    const int nv = 4;
    Poly x11 = Poly::variable(nv, 0), x12 = Poly::variable(nv, 1);
    Poly x21 = Poly::variable(nv, 2), x22 = Poly::variable(nv, 3);
    Poly one = Poly::constant(nv, Rat(1));
    CHECK(res.ideal.contains(x11 - x22, b));
    CHECK(res.ideal.contains(x12 - x21, b));
    CHECK(res.ideal.contains(x11 + x12 - one, b));
    CHECK(res.ideal.contains(x11 * x12, b));

    // oracle: interpolated vanishing ideal of the two points
    PolyIdeal oracle = matrix_set_ideal({QMatrix::identity(2), swap2()}, b);
    CHECK(ideal_equal(res.ideal, oracle, b));
}

TEST_CASE("finite permutation group closure equals the interpolated ideal") {
    Budget b = budget();
    auto res = group_closure(gens_of({cyc3(), swap12_3()}), 4, b);
    REQUIRE(res.finite_group.has_value());
    CHECK(res.finite_group->size() == 6);  // the full symmetric group on 3 points
    PolyIdeal oracle = matrix_set_ideal(*res.finite_group, b);
    CHECK(ideal_equal(res.ideal, oracle, b));
}

TEST_CASE("block-diagonal generators are detected and closed blockwise") {
    Budget b = budget();
    QMatrix g = direct_sum({rot35(), QMatrix::identity(2)});
    auto res = group_closure(gens_of({g}), 4, b);
    CHECK(res.certified);
    // finest partition: the identity block splits further
    CHECK(res.shape.dims == std::vector<int>{2, 1, 1});
    // members: SO(2) (+) I
    CHECK(contains_point(res.ideal, direct_sum({mat_mul(rot35(), rot35()), QMatrix::identity(2)})));
    CHECK(!contains_point(res.ideal, direct_sum({rot35(), rot35()})));
    CHECK(!contains_point(res.ideal, direct_sum({swap2(), QMatrix::identity(2)})));
}

TEST_CASE("enumerate_group caps and closes") {
    auto fin = enumerate_group({swap2()}, 10);
    REQUIRE(fin.has_value());
    CHECK(fin->size() == 2);
    CHECK(!enumerate_group({rot35()}, 10000).has_value());
    auto s3 = enumerate_group({cyc3(), swap12_3()}, 10);
    REQUIRE(s3.has_value());
    CHECK(s3->size() == 6);
}

TEST_CASE("image_closure of points is the image point") {
    Budget b = budget();
    // identity map on a point
    PolyIdeal pt = matrix_set_ideal({rot35()}, b);
    std::vector<Poly> id_map;
    for (int v = 0; v < 4; ++v) id_map.push_back(Poly::variable(4, v));
    PolyIdeal img = image_closure(pt, id_map, 4, b);
    CHECK(ideal_equal(img, pt, b));

    // psi(X (+) Y) = X Y^T on the point {R (+) swap}
    BlockShape pair{{2, 2}};
    const int nv = pair.var_count();
    std::vector<Poly> gens;
    QMatrix rr = rot35(), sw = swap2();
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) {
            gens.push_back(Poly::variable(nv, pair.var(0, i, j)) - Poly::constant(nv, rr.at(i, j)));
            gens.push_back(Poly::variable(nv, pair.var(1, i, j)) - Poly::constant(nv, sw.at(i, j)));
        }
    PolyIdeal src(nv, std::move(gens));
    std::vector<Poly> psi;
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) {
            Poly acc = Poly::zero(nv);
            for (int t = 0; t < 2; ++t)
                acc = acc + Poly::variable(nv, pair.var(0, i, t)) *
                                Poly::variable(nv, pair.var(1, j, t));  // (Y^T)_{t,j} = Y_{j,t}
            psi.push_back(acc);
        }
    PolyIdeal img2 = image_closure(src, psi, 4, b);
    PolyIdeal expected = matrix_set_ideal({mat_mul(rr, sw.transpose())}, b);
    CHECK(ideal_equal(img2, expected, b));
}

TEST_CASE("image_closure: SO(2) x SO(2) under X Y^T maps onto SO(2)") {
    Budget b = budget();
    auto so2 = group_closure(gens_of({rot35()}), 4, b);
    // source: two independent SO(2) blocks
    BlockShape pair{{2, 2}};
    const int nv = pair.var_count();
    std::vector<Poly> gens;
    std::vector<int> map0{pair.var(0, 0, 0), pair.var(0, 0, 1), pair.var(0, 1, 0),
                          pair.var(0, 1, 1)};
    std::vector<int> map1{pair.var(1, 0, 0), pair.var(1, 0, 1), pair.var(1, 1, 0),
                          pair.var(1, 1, 1)};
    for (const auto& g : so2.ideal.generators()) {
        gens.push_back(g.remap(nv, map0));
        gens.push_back(g.remap(nv, map1));
    }
    PolyIdeal src(nv, std::move(gens));
    std::vector<Poly> psi;
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) {
            Poly acc = Poly::zero(nv);
            for (int t = 0; t < 2; ++t)
                acc = acc + Poly::variable(nv, pair.var(0, i, t)) *
                                Poly::variable(nv, pair.var(1, j, t));
            psi.push_back(acc);
        }
    PolyIdeal img = image_closure(src, psi, 4, b);
    CHECK(ideal_equal(img, so2.ideal, b));
    CHECK(contains_point(img, rot35()));
    CHECK(!contains_point(img, swap2()));
}

TEST_CASE("product_chain stabilizes on groups and points") {
    Budget b = budget();
    BlockShape single{{2}};

    // the identity point stabilizes at the first step
    PolyIdeal idpt = matrix_set_ideal({QMatrix::identity(2)}, b);
    VarietyChain c1 = product_chain(idpt, single, 4, b);
    CHECK(c1.stabilized);
    CHECK(c1.ideals.size() == 1);

    // SO(2) is a group: one step
    auto so2 = group_closure(gens_of({rot35()}), 4, b);
    VarietyChain c2 = product_chain(so2.ideal, single, 4, b);
    CHECK(c2.stabilized);
    CHECK(c2.ideals.size() == 1);

    // a point without the identity alternates; the recurrence repeat is caught
    PolyIdeal swpt = matrix_set_ideal({swap2()}, b);
    VarietyChain c3 = product_chain(swpt, single, 6, b);
    CHECK(c3.stabilized);
    CHECK(c3.ideals.size() == 2);  // {swap}, {I}, then the cycle repeats
    CHECK(contains_point(c3.ideals[0], swap2()));
    CHECK(contains_point(c3.ideals[1], QMatrix::identity(2)));
}

TEST_CASE("product_chain varieties ascend through recorded samples") {
    Budget b = budget();
    BlockShape single{{2}};
    PolyIdeal two = matrix_set_ideal({QMatrix::identity(2), swap2()}, b);
    two.add_sample(QMatrix::identity(2).entries());
    two.add_sample(swap2().entries());
    VarietyChain c = product_chain(two, single, 6, b);
    CHECK(c.stabilized);
    for (std::size_t i = 0; i + 1 < c.ideals.size(); ++i)
        for (const auto& s : c.ideals[i].samples())
            CHECK(contains_point(c.ideals[i + 1], s));
}
