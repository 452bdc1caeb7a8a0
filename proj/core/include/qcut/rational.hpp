#ifndef QCUT_RATIONAL_HPP
#define QCUT_RATIONAL_HPP

#include <gmpxx.h>

#include <optional>
#include <stdexcept>
#include <string>

namespace qcut {

// Exact rational scalar. mpq_class keeps values canonical (lowest terms,
// positive denominator), so equality is structural.
using Rat = mpq_class;

inline Rat rat_of(long num, long den = 1) {
    if (den == 0) throw std::invalid_argument("rational with zero denominator");
    Rat r(num, den);
    r.canonicalize();
    return r;
}

// Parses "p/q" or "p" with optional sign. Returns nullopt on malformed input.
std::optional<Rat> rat_parse(const std::string& text);

// Throwing variant of rat_parse.
Rat rat_from_string(const std::string& text);

// Textual form "p/q", or "p" when the denominator is 1.
std::string rat_to_string(const Rat& r);

inline bool rat_is_integer(const Rat& r) { return r.get_den() == 1; }

}  // namespace qcut

#endif
