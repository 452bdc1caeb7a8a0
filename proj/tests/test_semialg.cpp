#include <doctest.h>

#include "oracles.hpp"
#include "qcut/semialg.hpp"

using namespace qcut;
using namespace qcut::oracles;

namespace {

Budget budget() { return Budget{}; }

PolyIdeal so2() {
    const int nv = 4;
    Poly x11 = Poly::variable(nv, 0), x12 = Poly::variable(nv, 1);
    Poly x21 = Poly::variable(nv, 2), x22 = Poly::variable(nv, 3);
    return PolyIdeal(nv, {x11 - x22, x12 + x21, x11 * x11 + x12 * x12 - Poly::constant(nv, Rat(1))});
}

}  // namespace

TEST_CASE("from_variety of a point ideal") {
    Budget b = budget();
    NameGen names;
    PolyIdeal pt = matrix_set_ideal({QMatrix::identity(2)}, b);
    SemiAlg s = sa_from_variety(pt, 2, names);
    CHECK(s->bound_blocks.empty());
    CHECK(sa_probe(s, QMatrix::identity(2)) == Tri::True);
    CHECK(sa_probe(s, rot35()) == Tri::False);
}

TEST_CASE("from_variety of the zero ideal is the whole space") {
    NameGen names;
    SemiAlg s = sa_from_variety(PolyIdeal(4), 2, names);
    CHECK(sa_probe(s, swap2()) == Tri::True);
    CHECK(sa_probe(s, rot35()) == Tri::True);
}

TEST_CASE("SO(2) formula membership") {
    NameGen names;
    SemiAlg s = sa_from_variety(so2(), 2, names);
    CHECK(s->atoms.size() == 3);
    CHECK(sa_probe(s, rot35()) == Tri::True);
    CHECK(sa_probe(s, swap2()) == Tri::False);  // x12 + x21 evaluates to 2
}

TEST_CASE("union") {
    NameGen names;
    SemiAlg u = sa_union(sa_point(QMatrix::identity(2), names), sa_point(rot35(), names), names);
    CHECK(sa_probe(u, rot35()) == Tri::True);
    CHECK(sa_probe(u, QMatrix::identity(2)) == Tri::True);
    CHECK(sa_probe(u, swap2()) == Tri::False);
    auto members = sa_exact_members(u);
    REQUIRE(members.has_value());
    CHECK(members->size() == 2);
}

TEST_CASE("product of points") {
    NameGen names;
    SemiAlg p = sa_product(sa_point(rot35(), names), sa_point(rot35().transpose(), names), names);
    CHECK(sa_probe(p, QMatrix::identity(2)) == Tri::True);  // R R^T = I
    CHECK(sa_probe(p, rot35()) == Tri::False);
    // with explicit witnesses
    WitnessMap w;
    w[p->bound_blocks[0].name] = rot35();
    w[p->bound_blocks[1].name] = rot35().transpose();
    CHECK(sa_probe(p, std::vector<QMatrix>{QMatrix::identity(2)}, &w) == Tri::True);

    // product with the identity point preserves members
    SemiAlg q = sa_product(sa_point(swap2(), names), sa_point(QMatrix::identity(2), names), names);
    CHECK(sa_probe(q, swap2()) == Tri::True);
}

TEST_CASE("product is associative on member sets") {
    NameGen names;
    auto A = sa_point(rot35(), names);
    auto B = sa_point(swap2(), names);
    auto C = sa_point(rot35().transpose(), names);
    SemiAlg left = sa_product(sa_product(A, B, names), C, names);
    SemiAlg right = sa_product(A, sa_product(B, C, names), names);
    auto lm = sa_exact_members(left);
    auto rm = sa_exact_members(right);
    REQUIRE(lm.has_value());
    REQUIRE(rm.has_value());
    CHECK(*lm == *rm);
}

TEST_CASE("sandwich") {
    NameGen names;
    // pairs = {(R, R^T)}, B = {I}: the member set is {R I R^T} = {I}
    SemiAlg pairs = sa_point_tuple({rot35(), rot35().transpose()}, names);
    SemiAlg s = sa_sandwich(pairs, sa_point(QMatrix::identity(2), names), names);
    CHECK(sa_probe(s, QMatrix::identity(2)) == Tri::True);
    CHECK(sa_probe(s, rot35()) == Tri::False);

    // pairs = {(R, I)}, B = {R}: member {R^2}
    SemiAlg s2 = sa_sandwich(sa_point_tuple({rot35(), QMatrix::identity(2)}, names),
                             sa_point(rot35(), names), names);
    CHECK(sa_probe(s2, mat_mul(rot35(), rot35())) == Tri::True);

    // pairs = {(I, I)}: the member set of B
    SemiAlg s3 = sa_sandwich(sa_point_tuple({QMatrix::identity(2), QMatrix::identity(2)}, names),
                             sa_point(swap2(), names), names);
    CHECK(sa_probe(s3, swap2()) == Tri::True);
    CHECK(sa_probe(s3, QMatrix::identity(2)) == Tri::False);
}

TEST_CASE("dsum and blocks_product") {
    NameGen names;
    SemiAlg d = sa_dsum({sa_point(QMatrix::identity(2), names), sa_point(QMatrix::identity(2), names)},
                        names);
    CHECK(sa_probe(d, QMatrix::identity(4)) == Tri::True);
    QMatrix off = QMatrix::identity(4);
    off.at(0, 2) = 1;
    CHECK(sa_probe(d, off) == Tri::False);

    // blocks_product of the point {R (+) R^T} is {R R^T} = {I}
    SemiAlg pt = sa_point(direct_sum({rot35(), rot35().transpose()}), names);
    SemiAlg bp = sa_blocks_product(pt, {2, 2}, names);
    CHECK(sa_probe(bp, QMatrix::identity(2)) == Tri::True);
    CHECK(sa_probe(bp, rot35()) == Tri::False);

    // blocks_product after dsum on points multiplies the points
    SemiAlg d2 = sa_dsum({sa_point(rot35(), names), sa_point(swap2(), names)}, names);
    SemiAlg bp2 = sa_blocks_product(d2, {2, 2}, names);
    CHECK(sa_probe(bp2, mat_mul(rot35(), swap2())) == Tri::True);
}

TEST_CASE("rename") {
    NameGen names;
    SemiAlg pt = sa_point(rot35(), names);
    SemiAlg same = sa_rename(IndexPerm::identity(2), pt, names);
    CHECK(sa_probe(same, rot35()) == Tri::True);

    SemiAlg t = sa_rename(IndexPerm::transpose(2), pt, names);
    CHECK(sa_probe(t, rot35().transpose()) == Tri::True);
    CHECK(sa_probe(t, rot35()) == Tri::False);

    SemiAlg tt = sa_rename(IndexPerm::transpose(2), t, names);
    CHECK(sa_probe(tt, rot35()) == Tri::True);
}

TEST_CASE("prenex shape is preserved and bound blocks grow only when due") {
    NameGen names;
    SemiAlg a = sa_point(rot35(), names);
    SemiAlg b = sa_point(swap2(), names);
    CHECK(sa_union(a, b, names)->bound_blocks.empty());
    CHECK(sa_rename(IndexPerm::transpose(2), a, names)->bound_blocks.empty());
    CHECK(sa_product(a, b, names)->bound_blocks.size() == 2);
    SemiAlg pairs = sa_point_tuple({rot35(), swap2()}, names);
    CHECK(sa_sandwich(pairs, b, names)->bound_blocks.size() == 3);
}

TEST_CASE("formula size stays linear under unions") {
    NameGen names;
    SemiAlg acc = sa_point(QMatrix::identity(2), names);
    std::size_t prev = acc->atoms.size();
    for (int i = 0; i < 6; ++i) {
        acc = sa_union(acc, sa_point(rot35(), names), names);
        // each union adds the operand's atoms once, no duplication blow-up
        CHECK(acc->atoms.size() == prev + 4);
        prev = acc->atoms.size();
    }
}

TEST_CASE("tuple operations used by the matrix pipeline") {
    NameGen names;
    // tuples (A1, A2) * (B1, B2) per block
    SemiAlg a = sa_point_tuple({rot35(), swap2()}, names);
    SemiAlg b = sa_point_tuple({rot35().transpose(), swap2()}, names);
    SemiAlg m = sa_tuple_mul(a, b, names);
    CHECK(sa_probe(m, std::vector<QMatrix>{QMatrix::identity(2), QMatrix::identity(2)}) ==
          Tri::True);

    SemiAlg t = sa_tuple_transpose(a, {0, 1}, names);
    CHECK(sa_probe(t, std::vector<QMatrix>{rot35(), swap2().transpose()}) == Tri::True);

    SemiAlg bp = sa_tuple_blocks_product(a, names);
    CHECK(sa_probe(bp, mat_mul(rot35(), swap2())) == Tri::True);
}

TEST_CASE("point-set calculus agrees with exact matrix arithmetic") {
    NameGen names;
    std::vector<QMatrix> pool{QMatrix::identity(2), rot35(), swap2(), rot35().transpose()};
    for (const auto& x : pool)
        for (const auto& y : pool) {
            SemiAlg p = sa_product(sa_point(x, names), sa_point(y, names), names);
            WitnessMap w;
            w[p->bound_blocks[0].name] = x;
            w[p->bound_blocks[1].name] = y;
            CHECK(sa_probe(p, std::vector<QMatrix>{mat_mul(x, y)}, &w) == Tri::True);
        }
}
