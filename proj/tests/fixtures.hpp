#pragma once

#include <string>

#include "presym/parser.hpp"
#include "presym/report.hpp"

namespace presym::testing {

inline LagrangianSpec make_ex1() {
    LagrangianSpec s;
    s.name = "ex1";
    s.dim = 1;
    s.vars = VarTable::make(1);
    s.vars.add_function("U");
    s.lagrangian = parse_expression("v1^2/2 - U(q1)", s.vars);
    return s;
}

inline LagrangianSpec make_ex2() {
    LagrangianSpec s;
    s.name = "ex2";
    s.dim = 3;
    s.vars = VarTable::make(3);
    s.lagrangian = parse_expression("v1^2/2 - v2*q3", s.vars);
    return s;
}

inline LagrangianSpec make_ex3() {
    LagrangianSpec s;
    s.name = "ex3";
    s.dim = 2;
    s.vars = VarTable::make(2);
    s.lagrangian = parse_expression("1/2*(q1*v2 - q2*v1 - q1^2 - q2^2)", s.vars);
    return s;
}

inline LagrangianSpec make_ex4() {
    LagrangianSpec s;
    s.name = "ex4";
    s.dim = 2;
    s.vars = VarTable::make(2);
    s.lagrangian = parse_expression("1/2*exp(q2)*v1^2", s.vars);
    return s;
}

/// alpha/beta < 0 leave the parameter symbolic.
inline LagrangianSpec make_ex5(int alpha, int beta) {
    LagrangianSpec s;
    s.name = "ex5";
    s.dim = 2;
    s.vars = VarTable::make(2);
    s.vars.add_param("alpha");
    s.vars.add_param("beta");
    s.lagrangian =
        parse_expression("1/2*v1^2 + v1*q2 + (1-alpha)*q1*v2 + beta/2*(q1-q2)^2", s.vars);
    if (alpha >= 0) s.param_values.emplace_back("alpha", Rational(alpha));
    if (beta >= 0) s.param_values.emplace_back("beta", Rational(beta));
    return s;
}

inline std::string fixture(const std::string& name) {
    return std::string(FIXTURE_DIR) + "/" + name;
}

} // namespace presym::testing
