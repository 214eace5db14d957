#pragma once

#include "presym/phasespace.hpp"

namespace presym {

/// One free acceleration direction: a multiplier name plus its components
/// over the v-coordinates (the delta component lives at `home`).
struct Direction {
    std::string name;
    AtomId home = 0;
    std::map<AtomId, Expr> comps;

    Expr apply(const Expr& f) const {
        Expr r;
        for (auto& [x, c] : comps) r += c * f.diff(x);
        return r;
    }
};

struct Substitution {
    AtomId var = 0;
    Expr solution;
    Expr side_condition;
};

struct ReductionState {
    int generation = 0;
    std::vector<Substitution> substitutions;
    std::vector<Constraint> constraints;    // all produced so far
    std::vector<int> current;               // indices of current-generation constraints
    std::map<AtomId, Expr> determined_accelerations;
    std::map<AtomId, Expr> d_coeff;         // determined part of the evolution field
    std::vector<Direction> free_dirs;
    SymMatrix gamma;                        // gamma of the step just taken
    RankCertificate gamma_cert;
    std::vector<int> a_indices, mu_indices; // free-direction partition of that step
    std::vector<Expr> side_conditions;
    std::vector<std::string> warnings;

    Expr apply_subs(const Expr& e) const;
    Expr apply_field(const Expr& f) const;  // determined part only
    VectorField merged_field() const;       // determined + multiplier terms
};

enum class Termination { FullyDetermined, GaugeFreedom };

struct LagrangianReduction {
    std::vector<ReductionState> states;     // snapshot after each step
    Termination termination = Termination::FullyDetermined;
    VectorField final_field;
    ReductionState final_state;
    int generations = 0;                    // number of steps executed
};

/// Restricts and normalizes a fresh constraint candidate: drops nonzero
/// denominators and common exp factors, removes rational and parameter
/// content (parameters recorded as side conditions), reduces a single
/// monomial to its squarefree atom product, and fixes the leading sign.
Expr strip_candidate(const Expr& e, const VarTable& vars, std::vector<Expr>& side_conditions);

/// True iff the candidate vanishes on the surface cut out by the current
/// substitutions and the still-unresolved constraints.
bool reducibility_check(const Expr& candidate, const ReductionState& state,
                        const VarTable& vars, std::vector<std::string>& warnings);

/// Core of the reducibility test: eliminates the active constraints by
/// affine solving and substitution; falls back to numeric sampling (with a
/// "probably reducible" warning) when some constraint cannot be eliminated.
bool reduce_modulo(const Expr& candidate, std::vector<Expr> active,
                   const VarTable& vars, std::vector<std::string>& warnings);

/// Highest interleaved coordinate in which e is affine with nonzero
/// coefficient, if any; the deterministic solve-variable choice shared by
/// both pictures for generations past the zeroth.
std::optional<AtomId> affine_solve_var(const Expr& e, const VarTable& vars);

/// Advances the state by one generation (Dirac iteration in the Lagrangian
/// picture): classifies the current constraints, determines accelerations,
/// restricts to the new surface, and emits next-generation candidates.
ReductionState lagrangian_step(const PhaseSpaceModel& model, const ReductionState& state);

/// Splits the current generation into second-class (pivot columns of gamma)
/// and remaining first-class candidates; returns (second, first) index lists.
std::pair<std::vector<int>, std::vector<int>> classify_generation(const ReductionState& state);

LagrangianReduction run_lagrangian(const PhaseSpaceModel& model, int max_generations);

} // namespace presym
