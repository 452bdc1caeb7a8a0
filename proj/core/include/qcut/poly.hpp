#ifndef QCUT_POLY_HPP
#define QCUT_POLY_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "qcut/matrix.hpp"
#include "qcut/rational.hpp"

namespace qcut {

/// Exponent vector over a fixed variable count, with cached total degree.
struct Monomial {
    std::vector<std::uint32_t> exps;
    std::uint32_t degree = 0;

    static Monomial one(int nvars) { return Monomial{std::vector<std::uint32_t>(nvars, 0), 0}; }
    static Monomial var(int nvars, int i);

    int nvars() const { return static_cast<int>(exps.size()); }
    bool is_one() const { return degree == 0; }
    bool divides(const Monomial& m) const;
    Monomial operator*(const Monomial& o) const;
    Monomial divide(const Monomial& o) const;  // requires o | *this
    static Monomial lcm(const Monomial& a, const Monomial& b);
    bool coprime(const Monomial& o) const;
    bool operator==(const Monomial&) const = default;
};

/// Term orders. BlockElim compares the first `split` variables grevlex-first,
/// which makes it an elimination order for that block.
struct MonomialOrder {
    enum class Kind { Grevlex, Lex, BlockElim };
    Kind kind = Kind::Grevlex;
    int split = 0;

    static MonomialOrder grevlex() { return {Kind::Grevlex, 0}; }
    static MonomialOrder lex() { return {Kind::Lex, 0}; }
    static MonomialOrder block_elim(int split) { return {Kind::BlockElim, split}; }

    // negative / zero / positive as a < b, a == b, a > b
    int compare(const Monomial& a, const Monomial& b) const;
    bool less(const Monomial& a, const Monomial& b) const { return compare(a, b) < 0; }
    bool operator==(const MonomialOrder&) const = default;
};

struct Term {
    Monomial mono;
    Rat coeff;
    bool operator==(const Term&) const = default;
};

/// Multivariate polynomial over Q. Terms are kept sorted descending in the
/// polynomial's own order; all binary operations require matching orders.
class Poly {
public:
    Poly() : nvars_(0), order_(MonomialOrder::grevlex()) {}
    Poly(int nvars, MonomialOrder order) : nvars_(nvars), order_(order) {}

    static Poly zero(int nvars, MonomialOrder order = MonomialOrder::grevlex());
    static Poly constant(int nvars, const Rat& c, MonomialOrder order = MonomialOrder::grevlex());
    static Poly variable(int nvars, int i, MonomialOrder order = MonomialOrder::grevlex());
    static Poly from_terms(int nvars, std::vector<Term> terms,
                           MonomialOrder order = MonomialOrder::grevlex());

    int nvars() const { return nvars_; }
    const MonomialOrder& order() const { return order_; }
    const std::vector<Term>& terms() const { return terms_; }
    bool is_zero() const { return terms_.empty(); }
    int degree() const;  // -1 for the zero polynomial

    const Term& leading() const { return terms_.front(); }

    Poly resorted(MonomialOrder order) const;

    Poly operator-() const;
    friend Poly operator+(const Poly& a, const Poly& b);
    friend Poly operator-(const Poly& a, const Poly& b);
    friend Poly operator*(const Poly& a, const Poly& b);
    Poly scaled(const Rat& c) const;
    Poly times_term(const Term& t) const;

    bool operator==(const Poly& o) const { return nvars_ == o.nvars_ && terms_ == o.terms_; }

    Rat eval(const std::vector<Rat>& point) const;

    /// Substitutes images[i] for variable i. Image polynomials share one
    /// variable space and order, which the result adopts.
    Poly substitute(const std::vector<Poly>& images) const;

    /// Reinterprets the polynomial in a space with `new_nvars` variables,
    /// variable i becoming var_map[i].
    Poly remap(int new_nvars, const std::vector<int>& var_map,
               MonomialOrder order = MonomialOrder::grevlex()) const;

    /// Divides by the gcd of the integer-scaled coefficients; first
    /// coefficient positive. Canonical up to sign conventions.
    Poly primitive_part() const;
    Poly monic() const;

    std::string to_string(const std::vector<std::string>& var_names) const;

private:
    int nvars_;
    MonomialOrder order_;
    std::vector<Term> terms_;  // sorted descending by order_, no zero coeffs
};

/// Canonical names x_<i>_<j> for an n x n matrix-entry variable space.
std::vector<std::string> matrix_var_names(int n, const std::string& tag = "x");

}  // namespace qcut

#endif
