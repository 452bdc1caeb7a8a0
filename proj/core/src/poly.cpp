#include "qcut/poly.hpp"

#include <algorithm>
#include <sstream>
#include <stdexcept>

namespace qcut {

Monomial Monomial::var(int nvars, int i) {
    Monomial m = one(nvars);
    m.exps[static_cast<std::size_t>(i)] = 1;
    m.degree = 1;
    return m;
}

bool Monomial::divides(const Monomial& m) const {
    if (degree > m.degree) return false;
    for (std::size_t i = 0; i < exps.size(); ++i)
        if (exps[i] > m.exps[i]) return false;
    return true;
}

Monomial Monomial::operator*(const Monomial& o) const {
    Monomial r = *this;
    for (std::size_t i = 0; i < exps.size(); ++i) r.exps[i] += o.exps[i];
    r.degree += o.degree;
    return r;
}

Monomial Monomial::divide(const Monomial& o) const {
    Monomial r = *this;
    for (std::size_t i = 0; i < exps.size(); ++i) r.exps[i] -= o.exps[i];
    r.degree -= o.degree;
    return r;
}

Monomial Monomial::lcm(const Monomial& a, const Monomial& b) {
    Monomial r = a;
    r.degree = 0;
    for (std::size_t i = 0; i < a.exps.size(); ++i) {
        r.exps[i] = std::max(a.exps[i], b.exps[i]);
        r.degree += r.exps[i];
    }
    return r;
}

bool Monomial::coprime(const Monomial& o) const {
    for (std::size_t i = 0; i < exps.size(); ++i)
        if (exps[i] && o.exps[i]) return false;
    return true;
}

namespace {

int cmp_grevlex_range(const Monomial& a, const Monomial& b, std::size_t lo, std::size_t hi) {
    std::uint32_t da = 0, db = 0;
    for (std::size_t i = lo; i < hi; ++i) {
        da += a.exps[i];
        db += b.exps[i];
    }
    if (da != db) return da < db ? -1 : 1;
    // reverse-lex tie break: larger is the one with SMALLER exponent on the
    // last variable where they differ
    for (std::size_t i = hi; i-- > lo;) {
        if (a.exps[i] != b.exps[i]) return a.exps[i] > b.exps[i] ? -1 : 1;
    }
    return 0;
}

int cmp_lex_range(const Monomial& a, const Monomial& b, std::size_t lo, std::size_t hi) {
    for (std::size_t i = lo; i < hi; ++i)
        if (a.exps[i] != b.exps[i]) return a.exps[i] < b.exps[i] ? -1 : 1;
    return 0;
}

}  // namespace

int MonomialOrder::compare(const Monomial& a, const Monomial& b) const {
    const std::size_t n = a.exps.size();
    switch (kind) {
        case Kind::Grevlex:
            return cmp_grevlex_range(a, b, 0, n);
        case Kind::Lex:
            return cmp_lex_range(a, b, 0, n);
        case Kind::BlockElim: {
            int c = cmp_grevlex_range(a, b, 0, static_cast<std::size_t>(split));
            if (c) return c;
            return cmp_grevlex_range(a, b, static_cast<std::size_t>(split), n);
        }
    }
    return 0;
}

Poly Poly::zero(int nvars, MonomialOrder order) { return Poly(nvars, order); }

Poly Poly::constant(int nvars, const Rat& c, MonomialOrder order) {
    Poly p(nvars, order);
    if (c != 0) p.terms_.push_back(Term{Monomial::one(nvars), c});
    return p;
}

Poly Poly::variable(int nvars, int i, MonomialOrder order) {
    Poly p(nvars, order);
    p.terms_.push_back(Term{Monomial::var(nvars, i), Rat(1)});
    return p;
}

Poly Poly::from_terms(int nvars, std::vector<Term> terms, MonomialOrder order) {
    Poly p(nvars, order);
    std::sort(terms.begin(), terms.end(), [&](const Term& a, const Term& b) {
        return order.compare(a.mono, b.mono) > 0;
    });
    for (auto& t : terms) {
        if (t.coeff == 0) continue;
        if (!p.terms_.empty() && p.terms_.back().mono == t.mono)
            p.terms_.back().coeff += t.coeff;
        else
            p.terms_.push_back(std::move(t));
    }
    std::erase_if(p.terms_, [](const Term& t) { return t.coeff == 0; });
    return p;
}

int Poly::degree() const {
    if (terms_.empty()) return -1;
    std::uint32_t d = 0;
    for (const auto& t : terms_) d = std::max(d, t.mono.degree);
    return static_cast<int>(d);
}

Poly Poly::resorted(MonomialOrder order) const {
    if (order == order_) return *this;
    return from_terms(nvars_, terms_, order);
}

Poly Poly::operator-() const {
    Poly r = *this;
    for (auto& t : r.terms_) t.coeff = -t.coeff;
    return r;
}

Poly operator+(const Poly& a, const Poly& b) {
    if (a.nvars_ != b.nvars_ || !(a.order_ == b.order_))
        throw std::invalid_argument("polynomial context mismatch");
    Poly r(a.nvars_, a.order_);
    r.terms_.reserve(a.terms_.size() + b.terms_.size());
    std::size_t i = 0, j = 0;
    while (i < a.terms_.size() && j < b.terms_.size()) {
        int c = a.order_.compare(a.terms_[i].mono, b.terms_[j].mono);
        if (c > 0)
            r.terms_.push_back(a.terms_[i++]);
        else if (c < 0)
            r.terms_.push_back(b.terms_[j++]);
        else {
            Rat s = a.terms_[i].coeff + b.terms_[j].coeff;
            if (s != 0) r.terms_.push_back(Term{a.terms_[i].mono, s});
            ++i, ++j;
        }
    }
    while (i < a.terms_.size()) r.terms_.push_back(a.terms_[i++]);
    while (j < b.terms_.size()) r.terms_.push_back(b.terms_[j++]);
    return r;
}

Poly operator-(const Poly& a, const Poly& b) { return a + (-b); }

Poly Poly::times_term(const Term& t) const {
    Poly r(nvars_, order_);
    if (t.coeff == 0) return r;
    r.terms_.reserve(terms_.size());
    for (const auto& own : terms_) r.terms_.push_back(Term{own.mono * t.mono, own.coeff * t.coeff});
    return r;  // multiplying by a monomial preserves the sort order
}

Poly operator*(const Poly& a, const Poly& b) {
    if (a.nvars_ != b.nvars_ || !(a.order_ == b.order_))
        throw std::invalid_argument("polynomial context mismatch");
    std::vector<Term> acc;
    acc.reserve(a.terms_.size() * b.terms_.size());
    for (const auto& ta : a.terms_)
        for (const auto& tb : b.terms_) acc.push_back(Term{ta.mono * tb.mono, ta.coeff * tb.coeff});
    return Poly::from_terms(a.nvars_, std::move(acc), a.order_);
}

Poly Poly::scaled(const Rat& c) const {
    Poly r(nvars_, order_);
    if (c == 0) return r;
    r.terms_ = terms_;
    for (auto& t : r.terms_) t.coeff *= c;
    return r;
}

Rat Poly::eval(const std::vector<Rat>& point) const {
    Rat acc(0);
    for (const auto& t : terms_) {
        Rat v = t.coeff;
        for (int i = 0; i < nvars_; ++i)
            for (std::uint32_t e = 0; e < t.mono.exps[static_cast<std::size_t>(i)]; ++e)
                v *= point[static_cast<std::size_t>(i)];
        acc += v;
    }
    return acc;
}

Poly Poly::substitute(const std::vector<Poly>& images) const {
    if (images.size() != static_cast<std::size_t>(nvars_))
        throw std::invalid_argument("substitute needs one image per variable");
    const int out_vars = images.empty() ? 0 : images[0].nvars();
    const MonomialOrder out_order = images.empty() ? MonomialOrder::grevlex() : images[0].order();
    Poly acc = Poly::zero(out_vars, out_order);
    // cache powers per variable as needed
    std::vector<std::vector<Poly>> powers(images.size());
    auto power = [&](int var, std::uint32_t e) -> const Poly& {
        auto& tbl = powers[static_cast<std::size_t>(var)];
        if (tbl.empty()) tbl.push_back(Poly::constant(out_vars, Rat(1), out_order));
        while (tbl.size() <= e) tbl.push_back(tbl.back() * images[static_cast<std::size_t>(var)]);
        return tbl[e];
    };
    for (const auto& t : terms_) {
        Poly term_val = Poly::constant(out_vars, t.coeff, out_order);
        for (int i = 0; i < nvars_; ++i) {
            std::uint32_t e = t.mono.exps[static_cast<std::size_t>(i)];
            if (e) term_val = term_val * power(i, e);
        }
        acc = acc + term_val;
    }
    return acc;
}

Poly Poly::remap(int new_nvars, const std::vector<int>& var_map, MonomialOrder order) const {
    std::vector<Term> acc;
    acc.reserve(terms_.size());
    for (const auto& t : terms_) {
        Monomial m = Monomial::one(new_nvars);
        for (int i = 0; i < nvars_; ++i) {
            std::uint32_t e = t.mono.exps[static_cast<std::size_t>(i)];
            if (!e) continue;
            int tgt = var_map[static_cast<std::size_t>(i)];
            if (tgt < 0 || tgt >= new_nvars)
                throw std::invalid_argument("remap target out of range");
            m.exps[static_cast<std::size_t>(tgt)] += e;
            m.degree += e;
        }
        acc.push_back(Term{std::move(m), t.coeff});
    }
    return from_terms(new_nvars, std::move(acc), order);
}

Poly Poly::primitive_part() const {
    if (terms_.empty()) return *this;
    mpz_class den_lcm(1);
    for (const auto& t : terms_) {
        mpz_class d = t.coeff.get_den();
        den_lcm = den_lcm / gcd(den_lcm, d) * d;
    }
    mpz_class num_gcd(0);
    for (const auto& t : terms_) {
        mpz_class scaled = t.coeff.get_num() * (den_lcm / t.coeff.get_den());
        num_gcd = gcd(num_gcd, scaled);
    }
    Rat factor(den_lcm, num_gcd);
    factor.canonicalize();
    Poly r = scaled(factor);
    if (r.terms_.front().coeff < 0) r = r.scaled(Rat(-1));
    return r;
}

Poly Poly::monic() const {
    if (terms_.empty()) return *this;
    return scaled(Rat(1) / terms_.front().coeff);
}

std::string Poly::to_string(const std::vector<std::string>& var_names) const {
    if (terms_.empty()) return "0";
    std::ostringstream os;
    bool first = true;
    for (const auto& t : terms_) {
        Rat c = t.coeff;
        if (first) {
            if (c < 0) {
                os << "-";
                c = -c;
            }
        } else {
            os << (c < 0 ? " - " : " + ");
            if (c < 0) c = -c;
        }
        first = false;
        bool printed_coeff = false;
        if (c != 1 || t.mono.is_one()) {
            os << rat_to_string(c);
            printed_coeff = true;
        }
        bool any_var = false;
        for (int i = 0; i < nvars_; ++i) {
            std::uint32_t e = t.mono.exps[static_cast<std::size_t>(i)];
            if (!e) continue;
            if (printed_coeff || any_var) os << "*";
            os << var_names[static_cast<std::size_t>(i)];
            if (e > 1) os << "^" << e;
            any_var = true;
        }
    }
    return os.str();
}

std::vector<std::string> matrix_var_names(int n, const std::string& tag) {
    std::vector<std::string> names;
    names.reserve(static_cast<std::size_t>(n) * n);
    for (int i = 1; i <= n; ++i)
        for (int j = 1; j <= n; ++j)
            names.push_back(tag + "_" + std::to_string(i) + "_" + std::to_string(j));
    return names;
}

}  // namespace qcut
