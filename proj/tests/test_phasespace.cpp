#include "doctest.h"
#include "fixtures.hpp"

using namespace presym;
using namespace presym::testing;

TEST_CASE("build_model energies match the corpus") {
    {
        auto m = build_model(make_ex2());
        Expr want = parse_expression("p1*v1 + p2*v2 + p3*v3 - 1/2*v1^2 + v2*q3",
                                     m.spec.vars);
        CHECK((m.energy - want).is_zero());
        CHECK(m.hessian_cert.rank == 1);
    }
    {
        auto m = build_model(make_ex4());
        Expr want = parse_expression("p1*v1 + p2*v2 - 1/2*exp(q2)*v1^2", m.spec.vars);
        CHECK((m.energy - want).is_zero());
    }
    {
        LagrangianSpec s;
        s.name = "free-constraint";
        s.dim = 1;
        s.vars = VarTable::make(1);
        s.lagrangian = Expr();
        auto m = build_model(s);
        CHECK((m.energy - parse_expression("p1*v1", s.vars)).is_zero());
        CHECK(m.hessian(0, 0).is_zero());
        CHECK((m.primary[0].expr - Expr::symbol(s.vars.p[0])).is_zero());
    }
    {
        LagrangianSpec bad;
        bad.dim = 1;
        bad.vars = VarTable::make(1);
        bad.lagrangian = Expr::symbol(bad.vars.p[0]);
        CHECK_THROWS_AS(build_model(bad), InputError);
    }
}

TEST_CASE("primary constraints via both routes") {
    {
        auto m = build_model(make_ex2());
        auto pc = primary_constraints(m);
        REQUIRE(pc.size() == 3);
        CHECK((pc[0].expr - parse_expression("p1 - v1", m.spec.vars)).is_zero());
        CHECK((pc[1].expr - parse_expression("p2 + q3", m.spec.vars)).is_zero());
        CHECK((pc[2].expr - parse_expression("p3", m.spec.vars)).is_zero());
        for (auto& c : pc) CHECK(c.generation == 0);
    }
    {
        auto m = build_model(make_ex3());
        auto pc = primary_constraints(m);
        CHECK((pc[0].expr - parse_expression("p1 + q2/2", m.spec.vars)).is_zero());
        CHECK((pc[1].expr - parse_expression("p2 - q1/2", m.spec.vars)).is_zero());
    }
    {
        auto m = build_model(make_ex5(-1, -1));  // both parameters symbolic
        auto pc = primary_constraints(m);
        CHECK((pc[0].expr - parse_expression("p1 - q2 - v1", m.spec.vars)).is_zero());
        CHECK((pc[1].expr - parse_expression("p2 - (1-alpha)*q1", m.spec.vars)).is_zero());
    }
}

TEST_CASE("vertical differential of the energy recovers the primaries") {
    {
        auto m = build_model(make_ex1());
        auto d = vertical_differential(m, m.energy);
        CHECK((d.at(m.spec.vars.v[0]) - parse_expression("p1 - v1", m.spec.vars)).is_zero());
        auto z = vertical_differential(m, Expr(5));
        for (auto& [v, e] : z) CHECK(e.is_zero());
    }
    {
        auto m = build_model(make_ex4());
        auto d = vertical_differential(m, m.energy);
        CHECK((d.at(m.spec.vars.v[0]) - parse_expression("p1 - exp(q2)*v1", m.spec.vars))
                  .is_zero());
        CHECK((d.at(m.spec.vars.v[1]) - parse_expression("p2", m.spec.vars)).is_zero());
    }
}

TEST_CASE("evolution field decomposition Y + K") {
    {
        auto m = build_model(make_ex2());
        auto f = evolution_field(m);
        auto& vars = m.spec.vars;
        CHECK((f.coeff.at(vars.q[0]) - Expr::symbol(vars.v[0])).is_zero());
        CHECK((f.coeff.at(vars.q[1]) - Expr::symbol(vars.v[1])).is_zero());
        CHECK((f.coeff.at(vars.q[2]) - Expr::symbol(vars.v[2])).is_zero());
        CHECK((f.coeff.at(vars.p[2]) + Expr::symbol(vars.v[1])).is_zero());
        CHECK(f.undetermined == std::vector<std::string>{"alpha_1", "alpha_2", "alpha_3"});
    }
    {
        auto m = build_model(make_ex1());
        auto f = evolution_field(m);
        auto& vars = m.spec.vars;
        CHECK((f.coeff.at(vars.q[0]) - Expr::symbol(vars.v[0])).is_zero());
        CHECK((f.coeff.at(vars.p[0]) + Expr::opaque("U", 1, Expr::symbol(vars.q[0])))
                  .is_zero());
        CHECK(f.undetermined == std::vector<std::string>{"alpha_1"});
    }
}

TEST_CASE("poisson bracket convention and identities") {
    VarTable t = VarTable::make(2);
    // {p_i, q^j} = delta under the f-dot = {E, f} convention
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) {
            Expr b = poisson_bracket(t, Expr::symbol(t.p[i]), Expr::symbol(t.q[j]));
            CHECK((b - Expr(i == j ? 1 : 0)).is_zero());
        }
    // Ex.5B: v2 = -{h, phi2^(1)}
    Expr h = parse_expression("1/2*(p1-q2)^2", t);
    Expr chi = parse_expression("q2 - q1", t);
    CHECK((-poisson_bracket(t, h, chi) - parse_expression("p1 - q2", t)).is_zero());
    // antisymmetry and Jacobi on polynomial triples
    Expr f = parse_expression("q1*p2 + p1^2", t);
    Expr g = parse_expression("q2^2 - p1*q1", t);
    Expr k = parse_expression("p2*q2 + q1", t);
    CHECK((poisson_bracket(t, f, f)).is_zero());
    CHECK((poisson_bracket(t, f, g) + poisson_bracket(t, g, f)).is_zero());
    Expr jac = poisson_bracket(t, f, poisson_bracket(t, g, k)) +
               poisson_bracket(t, g, poisson_bracket(t, k, f)) +
               poisson_bracket(t, k, poisson_bracket(t, f, g));
    CHECK(jac.is_zero());
}

TEST_CASE("lagrangian two-form and regular bracket") {
    {
        auto m = build_model(make_ex1());
        auto [gamma, mm] = lagrangian_two_form(m);
        CHECK(gamma(0, 0).is_one());
        CHECK(mm(0, 0).is_zero());
        auto& t = m.spec.vars;
        CHECK(lagrangian_bracket(m, Expr::symbol(t.v[0]), Expr::symbol(t.q[0])).is_one());
        CHECK(lagrangian_bracket(m, Expr::symbol(t.q[0]), Expr::symbol(t.q[0])).is_zero());
        Expr e_l = parse_expression("v1^2/2 + U(q1)", t);  // energy over (q, v)
        CHECK((lagrangian_bracket(m, e_l, Expr::symbol(t.q[0])) -
               Expr::symbol(t.v[0]))
                  .is_zero());
    }
    {
        auto m = build_model(make_ex3());
        auto [gamma, mm] = lagrangian_two_form(m);
        CHECK(mm(0, 0).is_zero());
        CHECK(mm(0, 1).is_one());
        CHECK((mm(1, 0) + Expr(1)).is_zero());
        CHECK_THROWS_AS(
            lagrangian_bracket(m, Expr::symbol(m.spec.vars.q[0]),
                               Expr::symbol(m.spec.vars.q[1])),
            DegenerateLagrangian);
    }
}

TEST_CASE("Y_i phi_j = -Gamma_ij on all corpus systems") {
    for (auto spec : {make_ex1(), make_ex2(), make_ex3(), make_ex4(), make_ex5(-1, -1)}) {
        auto m = build_model(spec);
        auto& vars = m.spec.vars;
        for (int i = 0; i < vars.dim; ++i)
            for (int j = 0; j < vars.dim; ++j) {
                Expr yiphij = m.primary[j].expr.diff(vars.v[i]);
                CHECK((yiphij + m.hessian(i, j)).is_zero());
            }
    }
}
