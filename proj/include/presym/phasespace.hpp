#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "presym/linalg.hpp"
#include "presym/vartable.hpp"

namespace presym {

struct LagrangianSpec {
    std::string name;
    int dim = 0;
    VarTable vars;
    Expr lagrangian;  // over (q, v) only
    std::vector<std::pair<std::string, Rational>> param_values;  // assigned parameters
};

struct Constraint {
    enum class Class { Undecided, Second, First };

    struct Resolution {
        AtomId var = 0;
        Expr solution;
        Expr side_condition;
    };

    Expr expr;
    int generation = 0;
    int lineage = 0;  // index of the ancestral primary constraint (0-based)
    std::string label;
    Class cls = Class::Undecided;
    std::optional<Resolution> resolution;
};

/// Vector field on W in coordinates; zero coefficients are omitted.
/// Undetermined accelerations appear as multiplier symbols (alpha_k) inside
/// the coefficients, listed by name in `undetermined`.
struct VectorField {
    std::map<AtomId, Expr> coeff;
    std::vector<std::string> undetermined;

    Expr apply(const Expr& f) const {
        Expr r;
        for (auto& [x, c] : coeff) r += c * f.diff(x);
        return r;
    }
};

struct PhaseSpaceModel {
    LagrangianSpec spec;
    Expr energy;               // p_i v^i - l
    SymMatrix hessian;         // Gamma_ij
    RankCertificate hessian_cert;
    std::vector<Constraint> primary;
};

PhaseSpaceModel build_model(const LagrangianSpec& spec);

std::vector<Constraint> primary_constraints(const PhaseSpaceModel& model);

/// Component i is df/dv^i, keyed by the v-coordinate atom.
std::map<AtomId, Expr> vertical_differential(const PhaseSpaceModel& model, const Expr& f);

/// Y + K: q-dot = v, p-dot = dl/dq, plus one multiplier per acceleration.
VectorField evolution_field(const PhaseSpaceModel& model);

/// {f,g} = sum_i (df/dp_i dg/dq^i - df/dq^i dg/dp_i), so f-dot = {E, f}.
Expr poisson_bracket(const VarTable& vars, const Expr& f, const Expr& g);

/// (Gamma, M) with M_ij = d2l/dq^i dv^j - d2l/dv^i dq^j.
std::pair<SymMatrix, SymMatrix> lagrangian_two_form(const PhaseSpaceModel& model);

/// Bracket of the regular case on TQ; requires rank Gamma = N.
Expr lagrangian_bracket(const PhaseSpaceModel& model, const Expr& f, const Expr& g);

/// Name used for the k-th acceleration multiplier (1-based).
std::string multiplier_name(int k);

} // namespace presym
