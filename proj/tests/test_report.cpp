#include <cstdio>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "fixtures.hpp"
#include "json.hpp"

using namespace presym;
using namespace presym::testing;

namespace {

AnalysisRequest request_for(LagrangianSpec spec) {
    AnalysisRequest r;
    r.spec = std::move(spec);
    return r;
}

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

} // namespace

TEST_CASE("input format parsing") {
    {
        auto spec = parse_system_file(fixture("ex2.lag"));
        CHECK(spec.name == "ex2");
        CHECK(spec.dim == 3);
        CHECK((spec.lagrangian - parse_expression("v1^2/2 - v2*q3", spec.vars)).is_zero());
    }
    {
        auto spec = parse_system_text(
            "system \"s\"\ndim 1\nfunction U\nparam g = 3/2\n"
            "lagrangian = g*v1^2 - U(q1)  # comment\n",
            "inline");
        CHECK(spec.name == "s");
        CHECK(spec.vars.has_function("U"));
        REQUIRE(spec.param_values.size() == 1);
        CHECK(spec.param_values[0].second == Rational(3, 2));
    }
    {
        // a missing system line falls back to the origin tag
        auto spec = parse_system_text("dim 1\nlagrangian = v1^2\n", "fallback");
        CHECK(spec.name == "fallback");
    }
    CHECK_THROWS_AS(parse_system_text("system \"s\"\nlagrangian = v1\n", "x"), InputError);
    CHECK_THROWS_AS(parse_system_text("system \"s\"\ndim 1\n", "x"), InputError);
    CHECK_THROWS_AS(parse_system_text("system \"s\"\ndim 0\nlagrangian = 0\n", "x"),
                    InputError);
    CHECK_THROWS_AS(
        parse_system_text("system \"s\"\ndim 1\nnonsense here\nlagrangian = v1\n", "x"),
        InputError);
    CHECK_THROWS_AS(parse_system_file(fixture("does-not-exist.lag")), InputError);
    {
        auto spec = parse_system_file(fixture("ex5.lag"));
        set_parameter(spec, "alpha", Rational(0));
        REQUIRE(spec.param_values.size() == 1);
        CHECK_THROWS_AS(set_parameter(spec, "nosuch", Rational(1)), InputError);
    }
}

TEST_CASE("cross-picture equivalence holds for every corpus configuration") {
    for (auto spec : {make_ex1(), make_ex2(), make_ex3(), make_ex4(), make_ex5(0, 0),
                      make_ex5(0, -1)}) {
        auto model = build_model(spec);
        auto lag = run_lagrangian(model, 10);
        auto ham = run_hamiltonian(model, 10);
        auto eq = cross_check(model, lag, ham);
        CHECK(eq.matched);
        // the map lists the momentum-space resolutions of the initial stage
        std::size_t gen0_solved = 0;
        for (auto& c : ham.final_state.constraints)
            if (c.generation == 0 && c.resolution &&
                model.spec.vars.is_v(c.resolution->var))
                ++gen0_solved;
        CHECK(eq.map.size() == gen0_solved);
    }
    // The exponential system maps its gauge velocity through the solved one.
    {
        auto model = build_model(make_ex4());
        auto eq = cross_check(model, run_lagrangian(model, 10), run_hamiltonian(model, 10));
        REQUIRE(eq.map.size() == 1);
        CHECK(eq.map[0].first == "v1");
        Expr sol = parse_expression(eq.map[0].second, model.spec.vars);
        CHECK((sol - parse_expression("p1*exp(-q2)", model.spec.vars)).is_zero());
    }
}

TEST_CASE("numeric verification reports zero residual on exact systems") {
    for (auto spec : {make_ex2(), make_ex3()}) {
        auto model = build_model(spec);
        auto lag = run_lagrangian(model, 10);
        auto ham = run_hamiltonian(model, 10);
        auto vl = numeric_verify(model, lag, 32, 7);
        auto vh = numeric_verify(model, ham, 32, 7);
        CHECK(vl.samples == 32);
        CHECK(vh.samples == 32);
        CHECK(vl.max_residual == Real(0));
        CHECK(vh.max_residual == Real(0));
    }
}

TEST_CASE("analysis report carries both pictures and verification") {
    auto rep = analyze(request_for(make_ex4()));
    REQUIRE(rep.lag);
    REQUIRE(rep.ham);
    REQUIRE(rep.equivalence);
    CHECK(rep.equivalence->matched);
    REQUIRE(rep.verification);
    CHECK(rep.verification->max_residual < Real("1e-25"));
    REQUIRE(rep.side_conditions.size() == 1);
    CHECK((rep.side_conditions[0] - Expr::exp(Expr::symbol(rep.model.spec.vars.q[1])))
              .is_zero());

    auto req = request_for(make_ex2());
    req.picture = Picture::Lagrangian;
    auto lrep = analyze(req);
    CHECK(lrep.lag);
    CHECK(!lrep.ham);
    CHECK(!lrep.equivalence);
}

TEST_CASE("JSON output is well-formed and round-trips") {
    auto rep = analyze(request_for(make_ex3()));
    std::string out = render_report(rep, Format::Json);
    auto j = nlohmann::ordered_json::parse(out);
    CHECK(j["system"] == "ex3");
    CHECK(j["dim"] == 2);
    CHECK(j["pictures"]["lagrangian"]["termination"] == "FullyDetermined");
    CHECK(j["pictures"]["hamiltonian"]["termination"] == "FullyDetermined");
    CHECK(j["equivalence"]["matched"] == true);
    CHECK(j["pictures"]["lagrangian"]["generations"].size() == 2);
    CHECK(j.dump(2) + "\n" == out);
}

TEST_CASE("rendering is deterministic") {
    for (int pass = 0; pass < 2; ++pass) {
        std::string a = render_report(analyze(request_for(make_ex5(0, -1))), Format::Json);
        std::string b = render_report(analyze(request_for(make_ex5(0, -1))), Format::Json);
        CHECK(a == b);
        std::string ta = render_report(analyze(request_for(make_ex4())), Format::Text);
        std::string tb = render_report(analyze(request_for(make_ex4())), Format::Text);
        CHECK(ta == tb);
    }
}

TEST_CASE("command line driver exit codes") {
    std::string out = "/tmp/presym-report-test.json";
    std::string file = fixture("ex2.lag");
    {
        const char* argv[] = {"analyze", file.c_str(), "--format", "json",
                              "--out", out.c_str()};
        CHECK(cli_main(6, argv) == 0);
        std::string body = slurp(out);
        CHECK(body.find("FullyDetermined") != std::string::npos);
        CHECK(body.find("\"system\": \"ex2\"") != std::string::npos);
    }
    {
        const char* argv[] = {"analyze", "/nonexistent/file.lag"};
        CHECK(cli_main(2, argv) == 2);
    }
    {
        std::string f4 = fixture("ex4.lag");
        const char* argv[] = {"analyze", f4.c_str(), "--max-gen", "1"};
        CHECK(cli_main(4, argv) == 1);
    }
    {
        std::string f5 = fixture("ex5.lag");
        const char* argv[] = {"analyze", f5.c_str(), "--set", "alpha=0",
                              "--set", "beta=0", "--format", "json",
                              "--out", out.c_str()};
        CHECK(cli_main(10, argv) == 0);
        CHECK(slurp(out).find("GaugeFreedom") != std::string::npos);
    }
    {
        const char* argv[] = {"analyze", file.c_str(), "--picture", "sideways"};
        CHECK(cli_main(4, argv) == 2);
    }
    std::remove(out.c_str());
}
