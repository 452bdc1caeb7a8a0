#include "qcut/groebner.hpp"

#include <algorithm>
#include <set>
#include <sstream>

namespace qcut {

Poly normal_form(const Poly& p, const std::vector<Poly>& basis, Budget& budget) {
    Poly rem = Poly::zero(p.nvars(), p.order());
    Poly cur = p;
    while (!cur.is_zero()) {
        budget.check();
        bool reduced = false;
        const Term& lt = cur.leading();
        for (const auto& g : basis) {
            if (g.is_zero()) continue;
            if (!g.leading().mono.divides(lt.mono)) continue;
            Term q{lt.mono.divide(g.leading().mono), lt.coeff / g.leading().coeff};
            cur = cur - g.times_term(q);
            reduced = true;
            break;
        }
        if (!reduced) {
            // move the leading term into the remainder
            Poly lt_poly = Poly::from_terms(cur.nvars(), {lt}, cur.order());
            rem = rem + lt_poly;
            cur = cur - lt_poly;
        }
    }
    return rem;
}

namespace {

struct Pair {
    int i, j;
    Monomial lcm;
    std::uint32_t sugar;
};

Poly s_poly(const Poly& f, const Poly& g, const Monomial& lcm) {
    Term tf{lcm.divide(f.leading().mono), Rat(1) / f.leading().coeff};
    Term tg{lcm.divide(g.leading().mono), Rat(1) / g.leading().coeff};
    return f.times_term(tf) - g.times_term(tg);
}

}  // namespace

std::vector<Poly> groebner_basis(std::vector<Poly> gens, MonomialOrder order, Budget& budget) {
    std::vector<Poly> basis;
    for (auto& g : gens) {
        Poly p = g.resorted(order);
        if (!p.is_zero()) basis.push_back(p.primitive_part());
    }
    // deterministic seed order: by leading monomial, then term count
    std::sort(basis.begin(), basis.end(), [&](const Poly& a, const Poly& b) {
        int c = order.compare(a.leading().mono, b.leading().mono);
        if (c != 0) return c < 0;
        return a.terms().size() < b.terms().size();
    });

    std::vector<Pair> pairs;
    auto push_pairs_for = [&](int j) {
        for (int i = 0; i < j; ++i) {
            if (basis[static_cast<std::size_t>(i)].is_zero()) continue;
            Monomial l = Monomial::lcm(basis[static_cast<std::size_t>(i)].leading().mono,
                                       basis[static_cast<std::size_t>(j)].leading().mono);
            pairs.push_back(Pair{i, j, std::move(l), 0});
        }
    };
    for (int j = 1; j < static_cast<int>(basis.size()); ++j) push_pairs_for(j);

    auto pair_less = [&](const Pair& a, const Pair& b) {
        if (a.lcm.degree != b.lcm.degree) return a.lcm.degree < b.lcm.degree;
        int c = order.compare(a.lcm, b.lcm);
        if (c != 0) return c < 0;
        if (a.j != b.j) return a.j < b.j;
        return a.i < b.i;
    };

    std::set<std::pair<int, int>> done;
    auto was_done = [&](int i, int j) {
        return done.count({std::min(i, j), std::max(i, j)}) != 0;
    };

    while (!pairs.empty()) {
        budget.check();
        auto it = std::min_element(pairs.begin(), pairs.end(), pair_less);
        Pair pr = *it;
        pairs.erase(it);
        done.emplace(std::min(pr.i, pr.j), std::max(pr.i, pr.j));

        const Poly& f = basis[static_cast<std::size_t>(pr.i)];
        const Poly& g = basis[static_cast<std::size_t>(pr.j)];
        if (f.is_zero() || g.is_zero()) continue;
        // first Buchberger criterion
        if (f.leading().mono.coprime(g.leading().mono)) continue;
        // chain criterion
        bool skip = false;
        for (int k = 0; k < static_cast<int>(basis.size()); ++k) {
            if (k == pr.i || k == pr.j || basis[static_cast<std::size_t>(k)].is_zero()) continue;
            if (!basis[static_cast<std::size_t>(k)].leading().mono.divides(pr.lcm)) continue;
            if (was_done(pr.i, k) && was_done(pr.j, k)) {
                skip = true;
                break;
            }
        }
        if (skip) continue;

        budget.check_degree(static_cast<int>(pr.lcm.degree));
        Poly s = s_poly(f, g, pr.lcm);
        Poly r = normal_form(s, basis, budget);
        if (r.is_zero()) continue;
        basis.push_back(r.primitive_part());
        push_pairs_for(static_cast<int>(basis.size()) - 1);
    }

    // minimalize: drop polys whose leading monomial is divisible by another's
    std::vector<Poly> minimal;
    for (std::size_t i = 0; i < basis.size(); ++i) {
        if (basis[i].is_zero()) continue;
        bool redundant = false;
        for (std::size_t j = 0; j < basis.size(); ++j) {
            if (i == j || basis[j].is_zero()) continue;
            if (!basis[j].leading().mono.divides(basis[i].leading().mono)) continue;
            bool equal_lm = basis[i].leading().mono == basis[j].leading().mono;
            if (!equal_lm || j < i) {  // for equal leading monomials keep the first
                redundant = true;
                break;
            }
        }
        if (!redundant) minimal.push_back(basis[i]);
    }
    // inter-reduce
    std::vector<Poly> reduced;
    for (std::size_t i = 0; i < minimal.size(); ++i) {
        std::vector<Poly> others;
        for (std::size_t j = 0; j < minimal.size(); ++j)
            if (j != i) others.push_back(minimal[j]);
        Poly r = normal_form(minimal[i], others, budget);
        if (!r.is_zero()) reduced.push_back(r.monic());
    }
    std::sort(reduced.begin(), reduced.end(), [&](const Poly& a, const Poly& b) {
        return order.compare(a.leading().mono, b.leading().mono) > 0;
    });
    return reduced;
}

PolyIdeal::PolyIdeal(int nvars, std::vector<Poly> gens) : nvars_(nvars) {
    for (auto& g : gens)
        if (!g.is_zero()) gens_.push_back(std::move(g));
}

const std::vector<Poly>& PolyIdeal::basis(Budget& budget) const {
    if (!gb_) gb_ = std::make_shared<const std::vector<Poly>>(
            groebner_basis(gens_, MonomialOrder::grevlex(), budget));
    return *gb_;
}

bool PolyIdeal::contains(const Poly& p, Budget& budget) const {
    if (p.is_zero()) return true;
    return normal_form(p.resorted(MonomialOrder::grevlex()), basis(budget), budget).is_zero();
}

bool ideal_equal(const PolyIdeal& a, const PolyIdeal& b, Budget& budget) {
    if (a.nvars() != b.nvars())
        throw std::invalid_argument("ideal_equal needs a common variable space");
    return a.basis(budget) == b.basis(budget);
}

bool contains_point(const PolyIdeal& ideal, const std::vector<Rat>& point) {
    for (const auto& g : ideal.generators())
        if (g.eval(point) != 0) return false;
    return true;
}

bool contains_point(const PolyIdeal& ideal, const QMatrix& m) {
    if (ideal.nvars() != m.dim() * m.dim())
        throw std::invalid_argument("contains_point: variable count != dim^2");
    return contains_point(ideal, m.entries());
}

std::string ideal_dump(const PolyIdeal& ideal, const std::vector<std::string>& var_names,
                       Budget& budget) {
    std::ostringstream os;
    for (const auto& p : ideal.basis(budget)) os << p.to_string(var_names) << "\n";
    return os.str();
}

}  // namespace qcut
