#ifndef QCUT_QFA_HPP
#define QCUT_QFA_HPP

#include <map>
#include <string>
#include <vector>

#include "qcut/matrix.hpp"

namespace qcut {

/// A word over a symbolic alphabet. Symbols are strings so multi-character
/// alphabets round-trip through the file formats.
using Word = std::vector<std::string>;

std::string word_to_string(const Word& w);

/// Measure-once quantum automaton (s, phi, P, lambda) over exact rationals.
/// Acceptance value of a word w is ||s phi(w) P||^2.
struct QuantumAutomaton {
    int dim = 0;
    std::vector<std::string> alphabet;
    QVector start;                       // unit row vector s
    std::map<std::string, QMatrix> phi;  // one orthogonal matrix per symbol
    QMatrix projection;                  // P, orthogonal projection
    Rat lambda;                          // cut-point threshold

    const QMatrix& letter(const std::string& a) const;
    bool has_letter(const std::string& a) const { return phi.count(a) != 0; }
};

enum class CutpointMode { Strict, Nonstrict };

/// Empty when the automaton is well-formed; otherwise one message per
/// violated condition.
std::vector<std::string> validate(const QuantumAutomaton& q);

/// phi extended to words: phi(w1...wm) = phi(w1)...phi(wm), phi(eps) = I.
QMatrix phi_of_word(const QuantumAutomaton& q, const Word& w);

/// ||s phi(w) P||^2, exactly.
Rat accept_prob(const QuantumAutomaton& q, const Word& w);

bool in_cutpoint(const QuantumAutomaton& q, const Word& w, CutpointMode mode);

/// Splits a display string into alphabet symbols. Single-character symbols
/// may be written contiguously ("aab"); otherwise separate with spaces.
Word parse_word(const QuantumAutomaton& q, const std::string& text);

// -- file format ------------------------------------------------------------

struct LoadResult {
    bool ok = false;
    QuantumAutomaton qfa;
    std::vector<std::string> diagnostics;
};

LoadResult load_qfa(const std::string& json_text);
LoadResult load_qfa_file(const std::string& path);
std::string qfa_to_json(const QuantumAutomaton& q);

}  // namespace qcut

#endif
