#include "qcut/smt.hpp"

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cctype>
#include <cstdio>
#include <cstring>
#include <sstream>

namespace qcut {

DecisionQuery build_decision_query(const SemiAlg& closure, const QuantumAutomaton& q) {
    if (closure->free_blocks.size() != 1 || closure->free_blocks[0].dim != q.dim)
        throw std::invalid_argument("closure formula does not match the automaton dimension");
    DecisionQuery query;
    query.closure = closure;
    query.lambda = q.lambda;
    query.dim = q.dim;
    const int n = q.dim;
    const int nv = closure->var_count();
    // (s X P)_j = sum_i sum_t s_i x_{i,t} P_{t,j}; acceptance = sum_j (...)^2
    // the free block occupies the first n^2 variables of the layout
    Poly acc = Poly::zero(nv);
    for (int j = 0; j < n; ++j) {
        Poly entry = Poly::zero(nv);
        for (int i = 0; i < n; ++i) {
            if (q.start.at(i) == 0) continue;
            for (int t = 0; t < n; ++t) {
                const Rat& ptj = q.projection.at(t, j);
                if (ptj == 0) continue;
                entry = entry + Poly::variable(nv, i * n + t).scaled(q.start.at(i) * ptj);
            }
        }
        acc = acc + entry * entry;
    }
    query.acceptance = acc;
    return query;
}

namespace {

std::string smt_rat(const Rat& r) {
    bool neg = r < 0;
    Rat a = neg ? Rat(-r) : r;
    std::string core = a.get_den() == 1
                           ? a.get_num().get_str()
                           : "(/ " + a.get_num().get_str() + " " + a.get_den().get_str() + ")";
    return neg ? "(- " + core + ")" : core;
}

std::string smt_poly(const Poly& p, const std::vector<std::string>& names) {
    if (p.is_zero()) return "0";
    std::vector<std::string> terms;
    for (const auto& t : p.terms()) {
        std::vector<std::string> factors;
        if (t.coeff != 1 || t.mono.is_one()) factors.push_back(smt_rat(t.coeff));
        for (int v = 0; v < p.nvars(); ++v)
            for (std::uint32_t e = 0; e < t.mono.exps[static_cast<std::size_t>(v)]; ++e)
                factors.push_back(names[static_cast<std::size_t>(v)]);
        if (factors.size() == 1) {
            terms.push_back(factors[0]);
        } else {
            std::string s = "(*";
            for (const auto& f : factors) s += " " + f;
            terms.push_back(s + ")");
        }
    }
    if (terms.size() == 1) return terms[0];
    std::string s = "(+";
    for (const auto& t : terms) s += " " + t;
    return s + ")";
}

std::string smt_formula(const SAFormula& f, const std::vector<std::string>& atoms) {
    switch (f.kind) {
        case SAFormula::Kind::Atom:
            return atoms[static_cast<std::size_t>(f.atom)];
        case SAFormula::Kind::And: {
            if (f.kids.empty()) return "true";
            if (f.kids.size() == 1) return smt_formula(f.kids[0], atoms);
            std::string s = "(and";
            for (const auto& k : f.kids) s += " " + smt_formula(k, atoms);
            return s + ")";
        }
        case SAFormula::Kind::Or: {
            if (f.kids.empty()) return "false";
            if (f.kids.size() == 1) return smt_formula(f.kids[0], atoms);
            std::string s = "(or";
            for (const auto& k : f.kids) s += " " + smt_formula(k, atoms);
            return s + ")";
        }
    }
    return "false";
}

}  // namespace

std::string emit_smtlib(const DecisionQuery& query) {
    const auto& s = query.closure;
    std::vector<std::string> names;
    for (const auto& b : s->free_blocks)
        for (int i = 1; i <= b.dim; ++i)
            for (int j = 1; j <= b.dim; ++j)
                names.push_back(b.name + "_" + std::to_string(i) + "_" + std::to_string(j));
    for (const auto& b : s->bound_blocks)
        for (int i = 1; i <= b.dim; ++i)
            for (int j = 1; j <= b.dim; ++j)
                names.push_back(b.name + "_" + std::to_string(i) + "_" + std::to_string(j));

    std::ostringstream os;
    os << "(set-logic QF_NRA)\n";
    os << "(set-option :produce-models true)\n";
    for (const auto& nm : names) os << "(declare-const " << nm << " Real)\n";
    std::vector<std::string> atom_strs;
    for (const auto& a : s->atoms) {
        std::string ps = smt_poly(a.p, names);
        atom_strs.push_back(a.eq ? "(= " + ps + " 0)" : "(> " + ps + " 0)");
    }
    os << "(assert " << smt_formula(s->body, atom_strs) << ")\n";
    os << "(assert (> " << smt_poly(query.acceptance, names) << " " << smt_rat(query.lambda)
       << "))\n";
    os << "(check-sat)\n";
    os << "(get-model)\n";
    return os.str();
}

std::string solver_outcome_name(SolverOutcome o) {
    switch (o) {
        case SolverOutcome::Sat: return "sat";
        case SolverOutcome::Unsat: return "unsat";
        case SolverOutcome::Unknown: return "unknown";
        case SolverOutcome::Timeout: return "timeout";
        case SolverOutcome::NotRun: return "not-run";
    }
    return "not-run";
}

SolverResult run_solver(const std::string& smt_text, const std::string& command,
                        int timeout_seconds) {
    SolverResult res;
    if (command.empty()) return res;

    char tmpl[] = "/tmp/qcut-query-XXXXXX.smt2";
    int fd = mkstemps(tmpl, 5);
    if (fd < 0) return res;
    std::string path(tmpl);
    {
        ssize_t off = 0;
        while (off < static_cast<ssize_t>(smt_text.size())) {
            ssize_t w = write(fd, smt_text.data() + off, smt_text.size() - static_cast<std::size_t>(off));
            if (w <= 0) break;
            off += w;
        }
        close(fd);
    }

    int pipefd[2];
    if (pipe(pipefd) != 0) {
        unlink(path.c_str());
        return res;
    }
    pid_t pid = fork();
    if (pid < 0) {
        close(pipefd[0]);
        close(pipefd[1]);
        unlink(path.c_str());
        return res;  // NotRun
    }
    if (pid == 0) {
        setpgid(0, 0);
        dup2(pipefd[1], STDOUT_FILENO);
        close(pipefd[0]);
        close(pipefd[1]);
        std::string cmdline = command + " '" + path + "'";
        execl("/bin/sh", "sh", "-c", cmdline.c_str(), static_cast<char*>(nullptr));
        _exit(127);
    }
    close(pipefd[1]);

    std::string output;
    bool timed_out = false;
    const long deadline_ms = static_cast<long>(timeout_seconds) * 1000;
    long waited_ms = 0;
    int status = 0;
    bool exited = false;
    char buf[4096];
    fcntl(pipefd[0], F_SETFL, O_NONBLOCK);
    while (true) {
        struct pollfd pfd{pipefd[0], POLLIN, 0};
        int pr = poll(&pfd, 1, 50);
        if (pr > 0) {
            ssize_t r;
            while ((r = read(pipefd[0], buf, sizeof buf)) > 0)
                output.append(buf, static_cast<std::size_t>(r));
            if (r == 0) {  // closed
                waitpid(pid, &status, 0);
                exited = true;
                break;
            }
        }
        pid_t done = waitpid(pid, &status, WNOHANG);
        if (done == pid) {
            ssize_t r;
            while ((r = read(pipefd[0], buf, sizeof buf)) > 0)
                output.append(buf, static_cast<std::size_t>(r));
            exited = true;
            break;
        }
        waited_ms += 50;
        if (waited_ms >= deadline_ms) {
            timed_out = true;
            kill(-pid, SIGKILL);
            waitpid(pid, &status, 0);
            break;
        }
    }
    close(pipefd[0]);
    unlink(path.c_str());

    res.output = output;
    if (timed_out) {
        res.outcome = SolverOutcome::Timeout;
        return res;
    }
    std::istringstream is(output);
    std::string tok;
    is >> tok;
    if (tok == "sat")
        res.outcome = SolverOutcome::Sat;
    else if (tok == "unsat")
        res.outcome = SolverOutcome::Unsat;
    else if (tok == "unknown")
        res.outcome = SolverOutcome::Unknown;
    else if (exited && WIFEXITED(status) && WEXITSTATUS(status) == 127)
        res.outcome = SolverOutcome::NotRun;  // the command could not be spawned
    else
        res.outcome = SolverOutcome::Unknown;
    return res;
}

namespace {

struct Tok {
    std::vector<std::string> toks;
    std::size_t pos = 0;
    bool eof() const { return pos >= toks.size(); }
    const std::string& peek() const { return toks[pos]; }
    std::string next() { return toks[pos++]; }
};

Tok tokenize_sexpr(const std::string& s) {
    Tok t;
    std::string cur;
    for (char c : s) {
        if (c == '(' || c == ')') {
            if (!cur.empty()) {
                t.toks.push_back(cur);
                cur.clear();
            }
            t.toks.push_back(std::string(1, c));
        } else if (std::isspace(static_cast<unsigned char>(c))) {
            if (!cur.empty()) {
                t.toks.push_back(cur);
                cur.clear();
            }
        } else {
            cur.push_back(c);
        }
    }
    if (!cur.empty()) t.toks.push_back(cur);
    return t;
}

// parses a numeric s-expression value: N | N.M | (/ a b) | (- x)
std::optional<Rat> parse_value(Tok& t) {
    if (t.eof()) return std::nullopt;
    std::string tok = t.next();
    if (tok == "(") {
        if (t.eof()) return std::nullopt;
        std::string op = t.next();
        if (op == "-") {
            auto inner = parse_value(t);
            if (!inner || t.eof() || t.next() != ")") return std::nullopt;
            return Rat(-*inner);
        }
        if (op == "/") {
            auto a = parse_value(t);
            auto b = parse_value(t);
            if (!a || !b || t.eof() || t.next() != ")") return std::nullopt;
            if (*b == 0) return std::nullopt;
            Rat r = *a / *b;
            r.canonicalize();
            return r;
        }
        return std::nullopt;
    }
    auto dot = tok.find('.');
    if (dot != std::string::npos) {
        std::string digits = tok.substr(0, dot) + tok.substr(dot + 1);
        std::size_t frac = tok.size() - dot - 1;
        auto num = rat_parse(digits);
        if (!num) return std::nullopt;
        mpz_class den(1);
        for (std::size_t i = 0; i < frac; ++i) den *= 10;
        Rat r = *num / Rat(den);
        r.canonicalize();
        return r;
    }
    return rat_parse(tok);
}

}  // namespace

std::optional<std::map<std::string, Rat>> parse_model_rationals(const std::string& output) {
    Tok t = tokenize_sexpr(output);
    std::map<std::string, Rat> model;
    bool found_any = false;
    while (!t.eof()) {
        if (t.next() != "define-fun") continue;
        if (t.eof()) break;
        std::string name = t.next();
        // expect: ( ) Real <value>
        if (t.eof() || t.next() != "(") return std::nullopt;
        if (t.eof() || t.next() != ")") return std::nullopt;
        if (t.eof() || t.next() != "Real") return std::nullopt;
        auto val = parse_value(t);
        if (!val) return std::nullopt;
        model[name] = *val;
        found_any = true;
    }
    if (!found_any) return std::nullopt;
    return model;
}

}  // namespace qcut
