#ifndef QCUT_GRAMMAR_HPP
#define QCUT_GRAMMAR_HPP

#include <map>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "qcut/qfa.hpp"

namespace qcut {

struct Production {
    std::string lhs;
    std::vector<std::string> rhs;
    bool operator==(const Production&) const = default;
};

std::string production_to_string(const Production& p);

struct CFGrammar {
    std::vector<std::string> variables;
    std::vector<std::string> terminals;
    std::string axiom;
    std::vector<Production> productions;

    bool is_variable(const std::string& s) const;
    bool operator==(const CFGrammar&) const = default;
};

/// Linear grammar: every right-hand side has at most one variable.
struct LinearGrammar {
    std::vector<std::string> variables;
    std::vector<std::string> terminals;
    std::string axiom;
    std::vector<Production> productions;

    bool is_variable(const std::string& s) const;
    /// For a rule with one variable on the right, splits it as (u, B, v).
    /// Returns nullopt for terminal rules.
    struct Split {
        Word left;
        std::string var;
        Word right;
    };
    std::optional<Split> split_rule(int production_index) const;

    bool operator==(const LinearGrammar&) const = default;
};

/// Finite union of finite products of linear grammars.
struct MetalinearGrammar {
    std::vector<std::vector<LinearGrammar>> families;
    bool operator==(const MetalinearGrammar&) const = default;
};

// -- restricted simple matrix grammars ---------------------------------------

struct RMRule {
    std::string lhs;
    Word left_ctx;
    std::string var;
    Word right_ctx;
    bool operator==(const RMRule&) const = default;
};

struct RMMatrix {
    enum class Kind { Start, Step, Eps };
    Kind kind = Kind::Step;
    std::vector<std::string> start_tuple;  // Start: S -> X_1 ... X_k
    std::vector<std::string> eps_tuple;    // Eps: (X_1 -> eps, ..., X_k -> eps)
    std::vector<RMRule> rules;             // Step: (X_i -> u_i Y_i v_i)_i
    bool operator==(const RMMatrix&) const = default;
};

/// Matrix grammar with k disjoint variable blocks and the three matrix
/// shapes (start, synchronized step, synchronized erase).
struct RestrictedMatrixGrammar {
    int index_k = 0;
    std::vector<std::vector<std::string>> blocks;  // V_1 .. V_k
    std::vector<std::string> terminals;
    std::string axiom;
    std::vector<RMMatrix> matrices;

    int block_of(const std::string& var) const;  // -1 when not a block variable
    bool operator==(const RestrictedMatrixGrammar&) const = default;
};

// -- monoidal grammars --------------------------------------------------------

/// Minimal linear grammar: a single variable, cycle rules X -> u X v and
/// exit rules X -> u.
struct MinLinear {
    std::string variable;
    std::vector<Production> productions;
    bool irreducible_asserted = false;

    struct Cycle {
        int production_index;
        Word left;
        Word right;
    };
    std::vector<Cycle> cycles() const;
    struct Exit {
        int production_index;
        Word body;
    };
    std::vector<Exit> exits() const;

    bool operator==(const MinLinear&) const = default;
};

/// Composition of k families of minimal linear grammars. alphabets[0] is
/// the top level's working alphabet; alphabets.back() is the terminal
/// alphabet. families[i] maps letters of alphabets[i] to the grammars one
/// level further down.
struct MonoidalGrammar {
    std::vector<std::vector<std::string>> alphabets;
    MinLinear top;
    std::vector<std::map<std::string, MinLinear>> families;

    int depth() const { return 1 + static_cast<int>(families.size()); }
    const std::vector<std::string>& terminals() const { return alphabets.back(); }
    bool operator==(const MonoidalGrammar&) const = default;
};

using GrammarSpec =
    std::variant<LinearGrammar, MetalinearGrammar, RestrictedMatrixGrammar, MonoidalGrammar>;

std::string grammar_kind(const GrammarSpec& g);
std::vector<std::string> grammar_terminals(const GrammarSpec& g);

// -- parsing ------------------------------------------------------------------

struct GrammarParse {
    bool ok = false;
    std::optional<GrammarSpec> grammar;
    std::vector<std::string> diagnostics;
};

/// Parses the JSON grammar format. "bounded-semilinear" inputs are encoded
/// into a RestrictedMatrixGrammar on the fly.
GrammarParse parse_grammar(const std::string& json_text);
GrammarParse parse_grammar_file(const std::string& path);
std::string grammar_to_json(const GrammarSpec& g);

/// Parses "S -> a S b" into a Production (empty right side allowed).
std::optional<Production> parse_production(const std::string& text);

// -- derivation semantics ------------------------------------------------------

struct EnumLimits {
    int max_len = 0;
    long node_cap = 500000;  // sentential forms explored before giving up
    int var_bound = 0;       // 0 = choose per grammar class
};

struct EnumResult {
    bool ok = false;
    std::set<Word> words;
    std::string error;
};

/// Exactly { w in L(g) : |w| <= max_len }, or a resource error.
EnumResult enumerate_words(const GrammarSpec& g, const EnumLimits& limits);

// Leftmost production sequence; rebuildable into a derivation tree.
using CfgDerivation = std::vector<int>;

struct CfgEnumResult {
    bool ok = false;
    std::map<Word, CfgDerivation> derivations;
    std::string error;
};

CfgEnumResult enumerate_cfg(const CFGrammar& g, const EnumLimits& limits);

struct LinearEnumResult {
    bool ok = false;
    std::map<Word, std::vector<int>> derivations;  // chains of production indices
    std::string error;
};

LinearEnumResult enumerate_linear(const LinearGrammar& g, const EnumLimits& limits);

struct MatrixEnumResult {
    bool ok = false;
    std::map<Word, std::vector<int>> derivations;  // matrix index sequences
    std::string error;
};

MatrixEnumResult enumerate_matrix(const RestrictedMatrixGrammar& g, const EnumLimits& limits);

/// Derivation tree for a leftmost CFG derivation.
struct DerivTree {
    int production_index = -1;
    std::vector<DerivTree> children;  // one per variable occurrence in the rhs
};

DerivTree derivation_tree(const CFGrammar& g, const CfgDerivation& d);

// -- composition ---------------------------------------------------------------

/// Grammar composition: replaces each letter x of g1's alphabet by the
/// axiom of family[x] (after renaming the component variables apart) and
/// merges the productions. The composed language is the substitution image
/// of L(g1).
CFGrammar compose(const MinLinear& g1, const std::vector<std::string>& sigma1,
                  const std::map<std::string, CFGrammar>& family);

/// Full composition of all levels of a monoidal grammar into one CFG.
CFGrammar compose_monoidal(const MonoidalGrammar& g);

/// Name used for the component variable that substitutes letter `x`.
std::string composed_variable_name(const std::string& letter, int level);

// -- bounded semilinear --------------------------------------------------------

/// Builds a restricted matrix grammar for
///   { u_1^{n_1} ... u_k^{n_k} : n = v0 + lambda_1 v_1 + ... + lambda_l v_l }.
RestrictedMatrixGrammar semilinear_to_restricted(const std::vector<Word>& words,
                                                 const std::vector<long>& offset,
                                                 const std::vector<std::vector<long>>& periods);

// -- validation ----------------------------------------------------------------

std::vector<std::string> validate_grammar(const GrammarSpec& g);

}  // namespace qcut

#endif
