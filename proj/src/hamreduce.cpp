#include "presym/hamreduce.hpp"

#include <algorithm>

namespace presym {

Expr HamState::apply_subs(const Expr& e) const {
    Expr r = e;
    for (auto& s : substitutions)
        if (r.contains(s.var)) r = r.substitute_unchecked({{s.var, s.solution}});
    return r;
}

Expr BracketTable::restrict_to_surface(const Expr& e) const {
    Expr r = e;
    for (auto& s : surface)
        if (r.contains(s.var)) r = r.substitute_unchecked({{s.var, s.solution}});
    return r;
}

Expr BracketTable::bracket(const VarTable& vars, const Expr& f, const Expr& g) const {
    Expr r = poisson_bracket(vars, f, g);
    const int k = int(selected.size());
    if (k > 0) {
        std::vector<Expr> fb(k), bg(k);
        for (int a = 0; a < k; ++a) {
            fb[a] = poisson_bracket(vars, f, pool[selected[a]]);
            bg[a] = poisson_bracket(vars, pool[selected[a]], g);
        }
        for (int a = 0; a < k; ++a)
            for (int b = 0; b < k; ++b)
                r -= fb[a] * cinv(a, b) * bg[b];
    }
    return restrict_to_surface(r);
}

BracketTable dirac_bracket(const VarTable& vars, const BracketTable& table,
                           const std::vector<Expr>& chi,
                           const std::vector<Substitution>& surface) {
    BracketTable out;
    out.stage = table.stage + 1;
    out.pool = table.pool;
    for (auto& e : chi) out.pool.push_back(e);
    out.surface = surface;

    const int n = int(out.pool.size());
    if (n == 0) return out;

    SymMatrix c(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            Expr b = poisson_bracket(vars, out.pool[i], out.pool[j]);
            c(i, j) = out.restrict_to_surface(b);
        }
    const int target = generic_rank(c).rank;

    auto block_rank = [&](const std::vector<int>& s) {
        SymMatrix m(int(s.size()), int(s.size()));
        for (std::size_t i = 0; i < s.size(); ++i)
            for (std::size_t j = 0; j < s.size(); ++j)
                m(int(i), int(j)) = c(s[i], s[j]);
        return generic_rank(m).rank;
    };

    // Greedy principal-block selection: an antisymmetric matrix grows rank in
    // pairs, so extend two indices at a time.
    std::vector<int> sel;
    while (int(sel.size()) < target) {
        bool grew = false;
        for (int i = 0; i < n && !grew; ++i) {
            if (std::find(sel.begin(), sel.end(), i) != sel.end()) continue;
            for (int j = i + 1; j < n && !grew; ++j) {
                if (std::find(sel.begin(), sel.end(), j) != sel.end()) continue;
                std::vector<int> trial = sel;
                trial.push_back(i);
                trial.push_back(j);
                std::sort(trial.begin(), trial.end());
                if (block_rank(trial) == int(trial.size())) {
                    sel = std::move(trial);
                    grew = true;
                }
            }
        }
        if (!grew) break;
    }
    if (int(sel.size()) < target)
        throw SingularConstraintMatrix(
            "no principal block of the constraint matrix reaches its generic rank");

    out.selected = sel;
    out.cinv = sel.empty() ? SymMatrix(0, 0) : invert_submatrix(c, sel, sel);
    return out;
}

// --- generation 0 and Routh reduction ------------------------------------------

namespace {

/// Records a nonvanishing hypothesis, sign-normalized and deduplicated.
void push_side(std::vector<Expr>& sides, Expr cond) {
    if (cond.is_rational()) return;
    if (poly_lead(cond.rat().num).second < 0) cond = -cond;
    for (auto& s : sides)
        if (s == cond) return;
    sides.push_back(cond);
}

} // namespace

HamState hamiltonian_gen0(const PhaseSpaceModel& model) {
    const VarTable& vars = model.spec.vars;
    HamState st;
    st.constraints = model.primary;
    const RankCertificate& cert = model.hessian_cert;
    for (auto& s : cert.side_conditions) push_side(st.side_conditions, s);

    for (int b = 0; b < cert.rank; ++b) {
        Constraint& c = st.constraints[cert.pivot_cols[b]];
        AtomId v = vars.v[cert.pivot_rows[b]];
        Expr now = st.apply_subs(c.expr);
        Expr sol, side;
        try {
            std::tie(sol, side) = solve_linear(now, v);
        } catch (const NotAffine&) {
            throw UnresolvableSecondClass("primary constraint '" + c.label +
                                          "' is not affine in " + atom_info(v).name);
        }
        c.cls = Constraint::Class::Second;
        c.resolution = Constraint::Resolution{v, sol, side};
        st.substitutions.push_back({v, sol, side});
        st.determined_velocities[v] = sol;
        push_side(st.side_conditions, side);
    }

    std::vector<bool> pcol(vars.dim, false), prow(vars.dim, false);
    for (int c : cert.pivot_cols) pcol[c] = true;
    for (int r : cert.pivot_rows) prow[r] = true;
    for (int i = 0; i < vars.dim; ++i) {
        if (!pcol[i]) st.current.push_back(i);
        if (!prow[i]) st.free_v.push_back(i);
    }
    st.table.surface = st.substitutions;
    return st;
}

RouthData routh_reduction(const PhaseSpaceModel& model, const HamState& m1) {
    const VarTable& vars = model.spec.vars;
    RouthData rd;

    Expr r = model.spec.lagrangian;
    for (int b = 0; b < model.hessian_cert.rank; ++b) {
        int a = model.hessian_cert.pivot_rows[b];
        r -= Expr::symbol(vars.p[a]) * Expr::symbol(vars.v[a]);
    }
    r = m1.apply_subs(r);

    for (int mu : m1.free_v)
        for (int nu : m1.free_v)
            if (!r.diff(vars.v[mu]).diff(vars.v[nu]).is_zero())
                throw NonlinearRouth("Routh function is not affine in the free velocities");

    std::map<AtomId, Expr> vzero;
    for (int mu : m1.free_v) vzero[vars.v[mu]] = Expr();
    rd.h = -(r.substitute_unchecked(vzero));

    rd.h_total = rd.h;
    for (int mu : m1.free_v) {
        rd.psi[mu] = r.diff(vars.v[mu]);
        Constraint c;
        c.expr = Expr::symbol(vars.p[mu]) - rd.psi[mu];
        c.generation = 0;
        c.lineage = mu;
        c.label = "phi_" + std::to_string(mu + 1);
        // The two routes to phi_mu on M1 must agree.
        if (!(c.expr - m1.apply_subs(model.primary[mu].expr)).is_zero())
            throw Error("Routh constraint disagrees with the restricted primary");
        rd.phi[mu] = c;
        rd.h_total += Expr::symbol(vars.v[mu]) * c.expr;
    }
    return rd;
}

// --- the staged iteration --------------------------------------------------------

namespace {

void ham_resolve(Constraint& c, HamState& st, const VarTable& vars) {
    Expr now = st.apply_subs(c.expr);
    c.cls = Constraint::Class::Second;
    if (now.is_zero()) return;
    auto x = affine_solve_var(now, vars);
    if (!x)
        throw UnresolvableSecondClass("constraint '" + c.label +
                                      "' is not affine in any coordinate");
    auto [sol, side] = solve_linear(now, *x);
    c.resolution = Constraint::Resolution{*x, sol, side};
    st.substitutions.push_back({*x, sol, side});
    push_side(st.side_conditions, side);
}

void ham_resolve_ancestors(int lineage, int below_generation, HamState& st,
                           const HamState& pre, const VarTable& vars,
                           std::vector<Expr>& resolved_now) {
    for (int g = below_generation - 1; g >= 0; --g)
        for (auto& c : st.constraints)
            if (c.lineage == lineage && c.generation == g && !c.resolution &&
                c.cls != Constraint::Class::Second) {
                Expr original = pre.apply_subs(c.expr);
                ham_resolve(c, st, vars);
                if (!original.is_zero()) resolved_now.push_back(original);
            }
}

Expr stage_h_total(const RouthData& routh, const HamState& st, const VarTable& vars) {
    Expr ht = routh.h;
    for (int mu : st.free_v) ht += Expr::symbol(vars.v[mu]) * routh.phi.at(mu).expr;
    return ht;
}

} // namespace

HamState hamiltonian_step(const PhaseSpaceModel& model, const RouthData& routh,
                          const HamState& state) {
    const VarTable& vars = model.spec.vars;
    HamState st = state;
    const int stage = st.stage + 1;

    Expr ht = stage_h_total(routh, st, vars);

    std::vector<Expr> chi(st.current.size()), cand(st.current.size());
    for (std::size_t nu = 0; nu < st.current.size(); ++nu) {
        chi[nu] = st.apply_subs(st.constraints[st.current[nu]].expr);
        cand[nu] = st.apply_subs(st.table.bracket(vars, ht, chi[nu]));
    }

    SymMatrix gamma(int(st.free_v.size()), int(st.current.size()));
    for (std::size_t mu = 0; mu < st.free_v.size(); ++mu)
        for (std::size_t nu = 0; nu < st.current.size(); ++nu)
            gamma(int(mu), int(nu)) = cand[nu].diff(vars.v[st.free_v[mu]]);
    RankCertificate cert = generic_rank(gamma);
    st.gamma = gamma;
    st.gamma_cert = cert;
    for (auto& s : cert.side_conditions) push_side(st.side_conditions, s);

    // Pivot pairs: solve the consistency function for the pivot velocity,
    // then resolve the constraint whose consistency it is, and its lineage.
    std::vector<Expr> resolved_now;
    std::vector<std::pair<AtomId, Expr>> new_velocities;
    for (int b = 0; b < cert.rank; ++b) {
        int ci = st.current[cert.pivot_cols[b]];
        Constraint& parent = st.constraints[ci];
        AtomId v = vars.v[st.free_v[cert.pivot_rows[b]]];

        Expr now = st.apply_subs(cand[cert.pivot_cols[b]]);
        Expr sol, side;
        try {
            std::tie(sol, side) = solve_linear(now, v);
        } catch (const NotAffine&) {
            throw UnresolvableSecondClass("consistency of '" + parent.label +
                                          "' is not affine in " + atom_info(v).name);
        }

        Constraint nc;
        nc.expr = Expr::symbol(v) - sol;
        nc.generation = stage;
        nc.lineage = parent.lineage;
        nc.label = "phi_" + std::to_string(parent.lineage + 1) + "^(" +
                   std::to_string(stage) + ")";
        nc.cls = Constraint::Class::Second;
        nc.resolution = Constraint::Resolution{v, sol, side};
        st.substitutions.push_back({v, sol, side});
        st.determined_velocities[v] = sol;
        push_side(st.side_conditions, side);
        new_velocities.emplace_back(v, sol);

        // Pool entries carry the stage-entry restriction only; the
        // velocity-solving constraints stay out of the bracket pool because
        // the v-coordinates are inert under the canonical bracket.
        Expr parent_now = chi[cert.pivot_cols[b]];
        ham_resolve(parent, st, vars);
        if (!parent_now.is_zero()) resolved_now.push_back(parent_now);
        ham_resolve_ancestors(parent.lineage, parent.generation, st, state, vars,
                              resolved_now);
        st.constraints.push_back(std::move(nc));
    }

    // Accelerations of the newly fixed velocities, with the stage-entry
    // bracket and surface (before this stage's resolutions restrict them).
    for (auto& [v, sol] : new_velocities)
        st.determined_accelerations[v] = state.table.bracket(vars, ht, sol);

    std::vector<bool> prow(st.free_v.size(), false), pcol(st.current.size(), false);
    for (int r : cert.pivot_rows) prow[r] = true;
    for (int c : cert.pivot_cols) pcol[c] = true;
    std::vector<int> freev2;
    for (std::size_t i = 0; i < st.free_v.size(); ++i)
        if (!prow[i]) freev2.push_back(st.free_v[i]);

    // Next-generation constraints from the column null space.
    auto nullvecs = null_space_basis(gamma, cert);
    std::vector<int> nonpivot_cols;
    for (int c = 0; c < int(st.current.size()); ++c)
        if (!pcol[c]) nonpivot_cols.push_back(c);

    std::vector<Expr> active;
    for (auto& c : st.constraints)
        if (!c.resolution && c.cls != Constraint::Class::Second) {
            Expr r = st.apply_subs(c.expr);
            if (!r.is_zero()) active.push_back(r);
        }

    std::vector<int> next;
    for (std::size_t i = 0; i < nullvecs.size(); ++i) {
        Expr cexpr;
        for (std::size_t nu = 0; nu < st.current.size(); ++nu)
            cexpr += nullvecs[i][nu] * cand[nu];
        cexpr = strip_candidate(st.apply_subs(cexpr), vars, st.side_conditions);
        if (reduce_modulo(cexpr, active, vars, st.warnings)) continue;
        const Constraint& parent = st.constraints[st.current[nonpivot_cols[i]]];
        Constraint c;
        c.expr = cexpr;
        c.generation = stage;
        c.lineage = parent.lineage;
        c.label = "phi_" + std::to_string(parent.lineage + 1) + "^(" +
                  std::to_string(stage) + ")";
        st.constraints.push_back(std::move(c));
        next.push_back(int(st.constraints.size()) - 1);
    }

    st.free_v = std::move(freev2);
    st.current = std::move(next);
    st.table = dirac_bracket(vars, st.table, resolved_now, st.substitutions);
    st.stage = stage;
    return st;
}

HamiltonianReduction run_hamiltonian(const PhaseSpaceModel& model, int max_generations) {
    if (max_generations < 1) throw InputError("max_generations must be >= 1");
    const VarTable& vars = model.spec.vars;

    HamiltonianReduction red;
    HamState st = hamiltonian_gen0(model);
    red.routh = routh_reduction(model, st);

    // Accelerations of the generation-0 velocities (plain Poisson stage).
    for (auto& [v, sol] : st.determined_velocities)
        st.determined_accelerations[v] =
            st.apply_subs(st.table.bracket(vars, stage_h_total(red.routh, st, vars), sol));

    while (!st.current.empty() || !st.free_v.empty()) {
        if (st.current.empty()) {  // free velocities with nothing left to check
            red.termination = Termination::GaugeFreedom;
            break;
        }
        if (red.generations >= max_generations)
            throw GenerationBudgetExceeded(
                "no termination within " + std::to_string(max_generations) + " generations");
        st = hamiltonian_step(model, red.routh, st);
        red.generations += 1;
        red.states.push_back(st);
        if (st.free_v.empty()) {
            if (!st.current.empty())
                throw Error("inconsistent system: constraints remain with no free velocity");
            red.termination = Termination::FullyDetermined;
            break;
        }
        if (st.current.empty()) {
            red.termination = Termination::GaugeFreedom;
            break;
        }
    }
    if (st.current.empty() && st.free_v.empty())
        red.termination = Termination::FullyDetermined;

    for (auto& c : st.constraints)
        if (c.cls == Constraint::Class::Undecided) c.cls = Constraint::Class::First;

    // Final evolution field over the surviving coordinates.
    Expr ht = stage_h_total(red.routh, st, vars);
    std::set<AtomId> solved;
    for (auto& s : st.substitutions) solved.insert(s.var);
    VectorField f;
    for (int i = 0; i < vars.dim; ++i) {
        for (AtomId x : {vars.q[i], vars.p[i]}) {
            if (solved.count(x)) continue;
            Expr c = st.apply_subs(st.table.bracket(vars, ht, Expr::symbol(x)));
            if (!c.is_zero()) f.coeff[x] = c;
        }
    }
    for (int mu : st.free_v) {
        std::string a = multiplier_name(mu + 1);
        f.coeff[vars.v[mu]] = Expr::symbol(a);
        f.undetermined.push_back(a);
    }
    red.final_field = f;
    red.final_state = st;
    return red;
}

} // namespace presym
