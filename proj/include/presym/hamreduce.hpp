#pragma once

#include "presym/lagreduce.hpp"

namespace presym {

struct RouthData {
    Expr h;                      // over (q, p_a)
    std::map<int, Expr> psi;     // mu index -> psi_mu(q, p_a)
    std::map<int, Constraint> phi;  // mu index -> phi_mu = p_mu - psi_mu
    Expr h_total;                // h + sum_mu v^mu phi_mu
};

/// Dirac bracket stage: the accumulated second-class pool, the selected
/// nonsingular principal block, its exact inverse, and the surface used for
/// restriction.  bracket() is total on any pair of expressions.
struct BracketTable {
    int stage = 0;
    std::vector<Expr> pool;      // second-class constraints accumulated so far
    std::vector<int> selected;   // indices into pool with C[sel, sel] nonsingular
    SymMatrix cinv;              // inverse of that block
    std::vector<Substitution> surface;

    Expr restrict_to_surface(const Expr& e) const;
    Expr bracket(const VarTable& vars, const Expr& f, const Expr& g) const;
};

/// Extends the table with newly resolved second-class constraints and
/// reselects the maximal nonsingular principal block of the mutual-bracket
/// matrix.  Throws SingularConstraintMatrix if a nonempty pool admits no
/// nonsingular block of its full generic rank.
BracketTable dirac_bracket(const VarTable& vars, const BracketTable& table,
                           const std::vector<Expr>& chi,
                           const std::vector<Substitution>& surface);

struct HamState {
    int stage = 0;
    std::vector<Substitution> substitutions;
    std::vector<Constraint> constraints;
    std::vector<int> current;                    // unresolved constraints of this stage
    std::map<AtomId, Expr> determined_velocities;
    std::map<AtomId, Expr> determined_accelerations;
    std::vector<int> free_v;                     // indices i with v^i still free
    BracketTable table;
    SymMatrix gamma;
    RankCertificate gamma_cert;
    std::vector<Expr> side_conditions;
    std::vector<std::string> warnings;

    Expr apply_subs(const Expr& e) const;
};

struct HamiltonianReduction {
    RouthData routh;
    std::vector<HamState> states;
    Termination termination = Termination::FullyDetermined;
    HamState final_state;
    VectorField final_field;
    int generations = 0;
};

/// Resolves the generation-0 second-class primaries for the velocities v^a,
/// keeping (q, p) as coordinates on M1.
HamState hamiltonian_gen0(const PhaseSpaceModel& model);

/// Routh function R = (l - p_a v^a)|M1 = -h + v^mu psi_mu; asserts linearity
/// in the surviving velocities and returns h, psi, phi, h_T.
RouthData routh_reduction(const PhaseSpaceModel& model, const HamState& m1);

HamState hamiltonian_step(const PhaseSpaceModel& model, const RouthData& routh,
                          const HamState& state);

HamiltonianReduction run_hamiltonian(const PhaseSpaceModel& model, int max_generations);

} // namespace presym
