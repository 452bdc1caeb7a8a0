#include <doctest.h>

#include <array>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "oracles.hpp"

using nlohmann::json;
using qcut::oracles::fixture;

namespace {

struct RunOut {
    int exit_code = -1;
    std::string out;
};

RunOut run_cli(const std::string& args) {
    std::string cmd = std::string(QCUT_CLI_PATH) + " " + args + " 2>/dev/null";
    RunOut r;
    FILE* p = popen(cmd.c_str(), "r");
    REQUIRE(p != nullptr);
    char buf[4096];
    std::size_t n;
    while ((n = fread(buf, 1, sizeof buf, p)) > 0) r.out.append(buf, n);
    int status = pclose(p);
    r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return r;
}

std::string schema_path(const std::string& rel) { return std::string(QCUT_SCHEMA_DIR) + "/" + rel; }

json load_json_file(const std::string& path) {
    std::ifstream in(path);
    REQUIRE(in.good());
    json j;
    in >> j;
    return j;
}

// minimal structural validator for the schema subset the project ships:
// type (string or list), required, properties, items, enum
bool type_matches(const json& value, const std::string& t) {
    if (t == "object") return value.is_object();
    if (t == "array") return value.is_array();
    if (t == "string") return value.is_string();
    if (t == "integer") return value.is_number_integer();
    if (t == "boolean") return value.is_boolean();
    if (t == "null") return value.is_null();
    return false;
}

bool validate_schema(const json& value, const json& schema, std::string& err) {
    if (schema.contains("type")) {
        const auto& t = schema["type"];
        bool ok = false;
        if (t.is_string()) {
            ok = type_matches(value, t.get<std::string>());
        } else {
            for (const auto& alt : t) ok = ok || type_matches(value, alt.get<std::string>());
        }
        if (!ok) {
            err = "type mismatch for " + value.dump().substr(0, 40);
            return false;
        }
    }
    if (schema.contains("enum")) {
        bool ok = false;
        for (const auto& e : schema["enum"]) ok = ok || e == value;
        if (!ok) {
            err = "enum mismatch: " + value.dump();
            return false;
        }
    }
    if (value.is_object()) {
        if (schema.contains("required"))
            for (const auto& k : schema["required"])
                if (!value.contains(k.get<std::string>())) {
                    err = "missing required field " + k.get<std::string>();
                    return false;
                }
        if (schema.contains("properties"))
            for (const auto& [k, sub] : schema["properties"].items())
                if (value.contains(k) && !validate_schema(value[k], sub, err)) return false;
    }
    if (value.is_array() && schema.contains("items")) {
        for (const auto& e : value)
            if (!validate_schema(e, schema["items"], err)) return false;
    }
    return true;
}

std::string write_stub(const std::string& name, const std::string& body) {
    std::string path = "/tmp/qcut-cli-" + name + ".sh";
    std::ofstream outf(path);
    outf << "#!/bin/sh\n" << body << "\n";
    outf.close();
    std::system(("chmod +x " + path).c_str());
    return path;
}

}  // namespace

TEST_CASE("validate subcommand") {
    auto ok = run_cli("validate --qfa " + fixture("qfa/rot2.json") + " --grammar " +
                      fixture("grammar/anbn.json"));
    CHECK(ok.exit_code == 0);
    CHECK(ok.out.find("ok") != std::string::npos);

    // invalid automaton: non-unit start vector
    std::string bad = "/tmp/qcut-cli-bad-qfa.json";
    std::ofstream out(bad);
    out << "{\"dim\": 2, \"alphabet\": [\"a\"], \"s\": [\"1\", \"1\"], "
           "\"phi\": {\"a\": [[\"1\",\"0\"],[\"0\",\"1\"]]}, "
           "\"P\": [[\"1\",\"0\"],[\"0\",\"0\"]], \"lambda\": \"1/2\"}";
    out.close();
    auto fail = run_cli("validate --qfa " + bad);
    CHECK(fail.exit_code == 3);
    CHECK(fail.out.find("norm") != std::string::npos);
}

TEST_CASE("accept-prob subcommand") {
    auto r = run_cli("accept-prob --qfa " + fixture("qfa/rot2.json") + " --word a");
    CHECK(r.exit_code == 0);
    CHECK(r.out == "9/25\n");
}

TEST_CASE("enumerate subcommand") {
    auto r = run_cli("enumerate --grammar " + fixture("grammar/ex2_matrix.json") + " --max-len 6");
    CHECK(r.exit_code == 0);
    CHECK(r.out == "\nabc\naabbcc\n");
    auto j = run_cli("enumerate --grammar " + fixture("grammar/ex2_matrix.json") +
                     " --max-len 6 --json");
    CHECK(j.out == "[\"\",\"abc\",\"aabbcc\"]\n");
}

TEST_CASE("closure subcommand emits a schema-valid report") {
    auto r = run_cli("closure --qfa " + fixture("qfa/rot2.json") + " --grammar " +
                     fixture("grammar/anbn.json"));
    CHECK(r.exit_code == 0);
    json report = json::parse(r.out);
    std::string err;
    CHECK_MESSAGE(validate_schema(report, load_json_file(schema_path("closure-report.schema.json")), err),
                  err);
    CHECK(report["certified"] == true);
}

TEST_CASE("decide subcommand: exit codes and schema") {
    // NONEMPTY: epsilon witness
    auto r = run_cli("decide --qfa " + fixture("qfa/rot2.json") + " --grammar " +
                     fixture("grammar/anbn.json") + " --mode brute");
    CHECK(r.exit_code == 1);
    json report = json::parse(r.out);
    std::string err;
    CHECK_MESSAGE(
        validate_schema(report, load_json_file(schema_path("decision-report.schema.json")), err),
        err);
    CHECK(report["verdict"] == "NONEMPTY");
    CHECK(report["witness"]["probability"] == "1");

    // EMPTY by the zero projection
    auto e = run_cli("decide --qfa " + fixture("qfa/zero_p.json") + " --grammar " +
                     fixture("grammar/ex2_matrix.json") + " --mode both");
    CHECK(e.exit_code == 0);
    CHECK(json::parse(e.out)["verdict"] == "EMPTY");

    // INCONCLUSIVE: symbolic only, no solver configured
    ::unsetenv("QCUT_SMT_CMD");
    auto i = run_cli("decide --qfa " + fixture("qfa/rot2_free.json") + " --grammar " +
                     fixture("grammar/anbn.json") + " --mode symbolic");
    CHECK(i.exit_code == 2);
    CHECK(json::parse(i.out)["verdict"] == "INCONCLUSIVE");
}

TEST_CASE("decide is deterministic byte-for-byte with a stub solver") {
    std::string stub = write_stub("det-unsat", "echo unsat");
    std::string cmd = "decide --qfa " + fixture("qfa/rot2_free.json") + " --grammar " +
                      fixture("grammar/anbn.json") + " --mode both --smt-cmd " + stub;
    auto r1 = run_cli(cmd);
    auto r2 = run_cli(cmd);
    CHECK(r1.out == r2.out);
    CHECK(r1.exit_code == r2.exit_code);
}

TEST_CASE("fixture files validate against the shipped input schemas") {
    std::string err;
    json qfa_schema = load_json_file(schema_path("qfa.schema.json"));
    for (const auto& f : {"qfa/rot2.json", "qfa/rot2_free.json", "qfa/rot2_abc.json",
                          "qfa/perm3.json", "qfa/zero_p.json", "qfa/id2.json"})
        CHECK_MESSAGE(validate_schema(load_json_file(fixture(f)), qfa_schema, err), f, ": ", err);
    json g_schema = load_json_file(schema_path("grammar.schema.json"));
    for (const auto& f : {"grammar/anbn.json", "grammar/ex1_monoidal.json",
                          "grammar/ex2_matrix.json", "grammar/l2_matrix.json",
                          "grammar/bsl_anbn.json", "grammar/meta_ab.json",
                          "grammar/mono1_anbn.json"})
        CHECK_MESSAGE(validate_schema(load_json_file(fixture(f)), g_schema, err), f, ": ", err);
}
