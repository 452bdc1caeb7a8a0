#ifndef QCUT_GROEBNER_HPP
#define QCUT_GROEBNER_HPP

#include <atomic>
#include <memory>
#include <optional>
#include <stdexcept>
#include <vector>

#include "qcut/poly.hpp"

namespace qcut {

/// Raised when a computation exceeds its resource budget. A budget overrun
/// never yields a wrong result, only this error.
class ResourceError : public std::runtime_error {
public:
    explicit ResourceError(const std::string& what) : std::runtime_error(what) {}
};

/// Cooperative budget: long-running loops call check() regularly.
struct Budget {
    long max_reductions = 2000000;
    int max_degree = 64;
    std::shared_ptr<std::atomic<bool>> cancelled;

    long used_reductions = 0;

    void check(long amount = 1) {
        used_reductions += amount;
        if (used_reductions > max_reductions)
            throw ResourceError("Groebner budget exceeded (reduction cap)");
        if (cancelled && cancelled->load(std::memory_order_relaxed))
            throw ResourceError("computation cancelled");
    }
    void check_degree(int d) const {
        if (d > max_degree) throw ResourceError("Groebner budget exceeded (degree cap)");
    }
};

/// Remainder of p on division by the (not necessarily Groebner) basis.
Poly normal_form(const Poly& p, const std::vector<Poly>& basis, Budget& budget);

/// Reduced Groebner basis, monic, sorted descending by leading monomial.
/// Buchberger with the coprime-lcm and chain criteria, degree-first pairs.
std::vector<Poly> groebner_basis(std::vector<Poly> gens, MonomialOrder order, Budget& budget);

/// Polynomial ideal with a cached reduced grevlex basis.
class PolyIdeal {
public:
    PolyIdeal() : nvars_(0) {}
    explicit PolyIdeal(int nvars) : nvars_(nvars) {}
    PolyIdeal(int nvars, std::vector<Poly> gens);

    int nvars() const { return nvars_; }
    const std::vector<Poly>& generators() const { return gens_; }
    bool trivially_zero() const { return gens_.empty(); }

    const std::vector<Poly>& basis(Budget& budget) const;  // reduced grevlex GB

    bool contains(const Poly& p, Budget& budget) const;

    /// Sample points known to lie on the variety (used as probes).
    const std::vector<std::vector<Rat>>& samples() const { return samples_; }
    void add_sample(std::vector<Rat> point) { samples_.push_back(std::move(point)); }

private:
    int nvars_;
    std::vector<Poly> gens_;
    std::vector<std::vector<Rat>> samples_;
    mutable std::shared_ptr<const std::vector<Poly>> gb_;
};

/// True iff the reduced grevlex bases coincide.
bool ideal_equal(const PolyIdeal& a, const PolyIdeal& b, Budget& budget);

/// True iff every generator vanishes at the point (exactly).
bool contains_point(const PolyIdeal& ideal, const std::vector<Rat>& point);
bool contains_point(const PolyIdeal& ideal, const QMatrix& m);

/// One generator per line, stable order, human-readable.
std::string ideal_dump(const PolyIdeal& ideal, const std::vector<std::string>& var_names,
                       Budget& budget);

}  // namespace qcut

#endif
