#include "qcut/qfa.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace qcut {

using nlohmann::ordered_json;

std::string word_to_string(const Word& w) {
    bool all_single = std::all_of(w.begin(), w.end(),
                                  [](const std::string& s) { return s.size() == 1; });
    std::string out;
    for (std::size_t i = 0; i < w.size(); ++i) {
        if (!all_single && i) out += ' ';
        out += w[i];
    }
    return out;
}

const QMatrix& QuantumAutomaton::letter(const std::string& a) const {
    auto it = phi.find(a);
    if (it == phi.end()) throw std::invalid_argument("unknown symbol '" + a + "'");
    return it->second;
}

std::vector<std::string> validate(const QuantumAutomaton& q) {
    std::vector<std::string> v;
    if (q.dim <= 0) {
        v.push_back("dimension must be positive");
        return v;
    }
    if (q.start.dim() != q.dim) v.push_back("start vector length != dim");
    if (q.projection.dim() != q.dim) v.push_back("projection size != dim");

    std::set<std::string> letters(q.alphabet.begin(), q.alphabet.end());
    if (letters.size() != q.alphabet.size()) v.push_back("alphabet contains duplicates");
    for (const auto& [a, m] : q.phi) {
        if (!letters.count(a)) v.push_back("phi defined for undeclared symbol '" + a + "'");
        if (m.dim() != q.dim) {
            v.push_back("phi(" + a + ") size != dim");
            continue;
        }
        if (!is_orthogonal(m)) v.push_back("phi(" + a + ") is not orthogonal");
    }
    for (const auto& a : q.alphabet)
        if (!q.phi.count(a)) v.push_back("missing phi for symbol '" + a + "'");

    if (q.start.dim() == q.dim) {
        Rat ns = q.start.norm_sq();
        if (ns != 1)
            v.push_back("start vector norm^2 = " + rat_to_string(ns) + " != 1");
    }
    if (q.projection.dim() == q.dim) {
        const QMatrix& P = q.projection;
        if (P != P.transpose() || mat_mul(P, P) != P)
            v.push_back("P not idempotent-symmetric");
    }
    return v;
}

QMatrix phi_of_word(const QuantumAutomaton& q, const Word& w) {
    QMatrix m = QMatrix::identity(q.dim);
    for (const auto& a : w) m = mat_mul(m, q.letter(a));
    return m;
}

Rat accept_prob(const QuantumAutomaton& q, const Word& w) {
    QVector r = vec_mat_mul(q.start, phi_of_word(q, w));
    r = vec_mat_mul(r, q.projection);
    return r.norm_sq();
}

bool in_cutpoint(const QuantumAutomaton& q, const Word& w, CutpointMode mode) {
    Rat p = accept_prob(q, w);
    return mode == CutpointMode::Strict ? p > q.lambda : p >= q.lambda;
}

Word parse_word(const QuantumAutomaton& q, const std::string& text) {
    Word w;
    if (text.find(' ') != std::string::npos) {
        std::istringstream is(text);
        std::string tok;
        while (is >> tok) w.push_back(tok);
    } else {
        for (char c : text) w.push_back(std::string(1, c));
    }
    for (const auto& a : w)
        if (!q.has_letter(a)) throw std::invalid_argument("unknown symbol '" + a + "' in word");
    return w;
}

namespace {

bool json_to_rat(const ordered_json& j, Rat& out, std::string& err) {
    if (j.is_number_integer()) {
        out = Rat(static_cast<long>(j.get<long long>()));
        return true;
    }
    if (j.is_string()) {
        auto r = rat_parse(j.get<std::string>());
        if (!r) {
            err = "malformed rational '" + j.get<std::string>() + "'";
            return false;
        }
        out = *r;
        return true;
    }
    err = "expected integer or \"p/q\" string";
    return false;
}

bool json_to_matrix(const ordered_json& j, int n, QMatrix& out, std::string& err) {
    if (!j.is_array() || static_cast<int>(j.size()) != n) {
        err = "matrix must be an array of " + std::to_string(n) + " rows";
        return false;
    }
    QMatrix m(n);
    for (int i = 0; i < n; ++i) {
        if (!j[i].is_array() || static_cast<int>(j[i].size()) != n) {
            err = "row " + std::to_string(i + 1) + " must have " + std::to_string(n) + " entries";
            return false;
        }
        for (int c = 0; c < n; ++c) {
            Rat r;
            if (!json_to_rat(j[i][c], r, err)) return false;
            m.at(i, c) = r;
        }
    }
    out = m;
    return true;
}

ordered_json rat_to_json(const Rat& r) { return rat_to_string(r); }

ordered_json matrix_to_json(const QMatrix& m) {
    ordered_json rows = ordered_json::array();
    for (int i = 0; i < m.dim(); ++i) {
        ordered_json row = ordered_json::array();
        for (int j = 0; j < m.dim(); ++j) row.push_back(rat_to_json(m.at(i, j)));
        rows.push_back(row);
    }
    return rows;
}

}  // namespace

LoadResult load_qfa(const std::string& json_text) {
    LoadResult res;
    ordered_json j;
    try {
        j = ordered_json::parse(json_text);
    } catch (const std::exception& e) {
        res.diagnostics.push_back(std::string("JSON parse error: ") + e.what());
        return res;
    }
    std::string err;
    QuantumAutomaton q;
    if (!j.is_object() || !j.contains("dim") || !j["dim"].is_number_integer()) {
        res.diagnostics.push_back("missing integer field 'dim'");
        return res;
    }
    q.dim = j["dim"].get<int>();
    if (q.dim <= 0) {
        res.diagnostics.push_back("'dim' must be positive");
        return res;
    }
    if (!j.contains("alphabet") || !j["alphabet"].is_array()) {
        res.diagnostics.push_back("missing array field 'alphabet'");
        return res;
    }
    for (const auto& a : j["alphabet"]) {
        if (!a.is_string()) {
            res.diagnostics.push_back("alphabet symbols must be strings");
            return res;
        }
        q.alphabet.push_back(a.get<std::string>());
    }
    if (!j.contains("s") || !j["s"].is_array() || static_cast<int>(j["s"].size()) != q.dim) {
        res.diagnostics.push_back("'s' must be an array of dim rationals");
        return res;
    }
    {
        std::vector<Rat> entries(q.dim);
        for (int i = 0; i < q.dim; ++i) {
            if (!json_to_rat(j["s"][i], entries[i], err)) {
                res.diagnostics.push_back("s[" + std::to_string(i + 1) + "]: " + err);
                return res;
            }
        }
        q.start = QVector(std::move(entries));
    }
    if (!j.contains("phi") || !j["phi"].is_object()) {
        res.diagnostics.push_back("missing object field 'phi'");
        return res;
    }
    for (const auto& [key, val] : j["phi"].items()) {
        QMatrix m;
        if (!json_to_matrix(val, q.dim, m, err)) {
            res.diagnostics.push_back("phi[" + key + "]: " + err);
            return res;
        }
        q.phi.emplace(key, std::move(m));
    }
    if (!j.contains("P")) {
        res.diagnostics.push_back("missing field 'P'");
        return res;
    }
    if (!json_to_matrix(j["P"], q.dim, q.projection, err)) {
        res.diagnostics.push_back("P: " + err);
        return res;
    }
    if (!j.contains("lambda")) {
        res.diagnostics.push_back("missing field 'lambda'");
        return res;
    }
    if (!json_to_rat(j["lambda"], q.lambda, err)) {
        res.diagnostics.push_back("lambda: " + err);
        return res;
    }

    auto viol = validate(q);
    if (!viol.empty()) {
        res.diagnostics = viol;
        res.qfa = std::move(q);  // returned for inspection even when invalid
        return res;
    }
    res.ok = true;
    res.qfa = std::move(q);
    return res;
}

LoadResult load_qfa_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        LoadResult res;
        res.diagnostics.push_back("cannot open file: " + path);
        return res;
    }
    std::stringstream buf;
    buf << in.rdbuf();
    return load_qfa(buf.str());
}

std::string qfa_to_json(const QuantumAutomaton& q) {
    ordered_json j;
    j["dim"] = q.dim;
    j["alphabet"] = q.alphabet;
    ordered_json s = ordered_json::array();
    for (int i = 0; i < q.start.dim(); ++i) s.push_back(rat_to_json(q.start.at(i)));
    j["s"] = s;
    ordered_json phi = ordered_json::object();
    for (const auto& [a, m] : q.phi) phi[a] = matrix_to_json(m);
    j["phi"] = phi;
    j["P"] = matrix_to_json(q.projection);
    j["lambda"] = rat_to_json(q.lambda);
    return j.dump(2) + "\n";
}

}  // namespace qcut
