#include "presym/lagreduce.hpp"

#include <algorithm>
#include <random>

namespace presym {

Expr ReductionState::apply_subs(const Expr& e) const {
    Expr r = e;
    for (auto& s : substitutions)
        if (r.contains(s.var)) r = r.substitute_unchecked({{s.var, s.solution}});
    return r;
}

Expr ReductionState::apply_field(const Expr& f) const {
    Expr r;
    for (auto& [x, c] : d_coeff) r += c * f.diff(x);
    return r;
}

VectorField ReductionState::merged_field() const {
    VectorField out;
    for (auto& [x, c] : d_coeff)
        if (!c.is_zero()) out.coeff[x] = c;
    for (auto& d : free_dirs) {
        Expr mult = Expr::symbol(d.name);
        for (auto& [x, c] : d.comps) {
            Expr add = mult * c;
            if (add.is_zero()) continue;
            auto it = out.coeff.find(x);
            if (it == out.coeff.end()) out.coeff[x] = add;
            else it->second += add;
        }
        out.undetermined.push_back(d.name);
    }
    for (auto it = out.coeff.begin(); it != out.coeff.end();)
        it = it->second.is_zero() ? out.coeff.erase(it) : std::next(it);
    return out;
}

// --- candidate normalization --------------------------------------------------

Expr strip_candidate(const Expr& e, const VarTable& vars, std::vector<Expr>& side_conditions) {
    if (e.is_zero()) return e;

    if (!e.is_polynomial()) {
        Expr den = e.denominator();
        if (!den.is_rational()) side_conditions.push_back(den);
    }
    Poly p = e.rat().num;

    // A shared exp factor never vanishes; drop it without a side condition.
    bool shared_expo = !p.begin()->first.expo.empty();
    for (auto& [m, c] : p)
        if (!(m.expo == p.begin()->first.expo)) { shared_expo = false; break; }
    if (shared_expo) {
        Poly q;
        for (auto& [m, c] : p) {
            Monomial n = m;
            n.expo.clear();
            q.emplace(std::move(n), c);
        }
        p = std::move(q);
    }

    if (p.size() == 1) {
        // Squarefree atom product; parameters are dropped as side conditions.
        const Monomial& m = p.begin()->first;
        Monomial n;
        for (auto& [id, k] : m.pows) {
            if (vars.is_param(id)) side_conditions.push_back(Expr::symbol(id));
            else n.pows[id] = 1;
        }
        n.expo = m.expo;
        Poly q;
        q.emplace(std::move(n), Rational(1));
        return make_expr(std::move(q), poly_const(Rational(1)));
    }

    // Common parameter factor: assumed nonzero, recorded.
    std::map<AtomId, int> pmin;
    bool first = true;
    for (auto& [m, c] : p) {
        std::map<AtomId, int> cur;
        for (auto& [id, k] : m.pows)
            if (vars.is_param(id)) cur[id] = k;
        if (first) { pmin = cur; first = false; continue; }
        for (auto it = pmin.begin(); it != pmin.end();) {
            auto f = cur.find(it->first);
            if (f == cur.end()) it = pmin.erase(it);
            else { it->second = std::min(it->second, f->second); ++it; }
        }
    }
    if (!pmin.empty()) {
        Poly q;
        for (auto& [m, c] : p) {
            Monomial n = m;
            for (auto& [id, k] : pmin) {
                n.pows[id] -= k;
                if (n.pows[id] == 0) n.pows.erase(id);
            }
            q.emplace(std::move(n), c);
        }
        p = std::move(q);
        for (auto& [id, k] : pmin) side_conditions.push_back(Expr::symbol(id));
    }

    // Integer-primitive coefficients with positive leading sign.
    Integer g = 0, l = 1;
    for (auto& [m, c] : p) {
        g = boost::multiprecision::gcd(g, boost::multiprecision::numerator(c));
        l = boost::multiprecision::lcm(l, boost::multiprecision::denominator(c));
    }
    Rational scale(l, g);
    if (poly_lead(p).second < 0) scale = -scale;
    return make_expr(poly_scale(p, scale), poly_const(Rational(1)));
}

// --- reducibility ---------------------------------------------------------------

std::optional<AtomId> affine_solve_var(const Expr& e, const VarTable& vars) {
    auto coords = vars.coords();
    for (auto it = coords.rbegin(); it != coords.rend(); ++it) {
        if (!e.contains(*it)) continue;
        Expr a = e.diff(*it);
        if (a.is_zero() || a.contains(*it) || !a.diff(*it).is_zero()) continue;
        return *it;
    }
    return std::nullopt;
}

bool reducibility_check(const Expr& candidate, const ReductionState& state,
                        const VarTable& vars, std::vector<std::string>& warnings) {
    std::vector<Expr> active;
    for (auto& c : state.constraints)
        if (!c.resolution) {
            Expr r = state.apply_subs(c.expr);
            if (!r.is_zero()) active.push_back(r);
        }
    return reduce_modulo(candidate, std::move(active), vars, warnings);
}

bool reduce_modulo(const Expr& candidate, std::vector<Expr> active,
                   const VarTable& vars, std::vector<std::string>& warnings) {
    if (candidate.is_zero()) return true;

    Expr e = candidate;
    bool leftover = false;
    for (std::size_t i = 0; i < active.size(); ++i) {
        auto x = affine_solve_var(active[i], vars);
        if (!x) { leftover = true; continue; }
        auto [sol, side] = solve_linear(active[i], *x);
        std::map<AtomId, Expr> b{{*x, sol}};
        e = e.substitute_unchecked(b);
        for (std::size_t j = i + 1; j < active.size(); ++j)
            active[j] = active[j].substitute_unchecked(b);
    }
    if (e.is_zero()) return true;
    if (!leftover) return false;

    // Numeric fallback: sample the solvable part of the surface.
    std::mt19937_64 rng(0x5EEDBA5Eu);
    std::uniform_int_distribution<int> num(-9, 9), den(1, 4);
    int zeros = 0;
    for (int s = 0; s < 50; ++s) {
        std::map<AtomId, Rational> pt;
        for (AtomId id : e.atoms()) {
            const Atom& a = atom_info(id);
            if (a.kind != AtomKind::Symbol) continue;
            int n = num(rng);
            if (n == 0) n = 1;
            pt[id] = Rational(n, den(rng));
        }
        try {
            if (e.eval_rational(pt).is_zero()) ++zeros;
        } catch (const Error&) {
            if (abs(e.eval_real(pt)) < Real("1e-30")) ++zeros;
        }
    }
    if (zeros == 50) {
        warnings.push_back("candidate flagged probably reducible by numeric sampling only");
        return true;
    }
    return false;
}

// --- the generation step -----------------------------------------------------------

namespace {

SymMatrix step_gamma(const ReductionState& st) {
    const int f = int(st.free_dirs.size()), c = int(st.current.size());
    SymMatrix g(f, c);
    for (int mu = 0; mu < f; ++mu)
        for (int nu = 0; nu < c; ++nu)
            g(mu, nu) = st.free_dirs[mu].apply(st.constraints[st.current[nu]].expr);
    return g;
}

void resolve_constraint(Constraint& c, ReductionState& st, const VarTable& vars,
                        std::optional<AtomId> forced_var) {
    Expr now = st.apply_subs(c.expr);
    c.cls = Constraint::Class::Second;
    if (now.is_zero()) return;  // already implied by the surface
    AtomId var;
    if (forced_var) {
        var = *forced_var;
    } else {
        auto x = affine_solve_var(now, vars);
        if (!x)
            throw UnresolvableSecondClass("constraint '" + c.label +
                                          "' is not affine in any coordinate");
        var = *x;
    }
    auto [sol, side] = solve_linear(now, var);
    c.resolution = Constraint::Resolution{var, sol, side};
    st.substitutions.push_back({var, sol, side});
    if (!side.is_rational()) st.side_conditions.push_back(side);
}

void resolve_ancestors(int lineage, int below_generation, ReductionState& st,
                       const VarTable& vars) {
    for (int g = below_generation - 1; g >= 0; --g)
        for (auto& c : st.constraints)
            if (c.lineage == lineage && c.generation == g && !c.resolution &&
                c.cls != Constraint::Class::Second)
                resolve_constraint(c, st, vars, std::nullopt);
}

} // namespace

std::pair<std::vector<int>, std::vector<int>> classify_generation(const ReductionState& state) {
    SymMatrix g = step_gamma(state);
    RankCertificate cert = generic_rank(g);
    std::vector<bool> pivot(state.current.size(), false);
    for (int c : cert.pivot_cols) pivot[c] = true;
    std::pair<std::vector<int>, std::vector<int>> out;
    for (std::size_t i = 0; i < state.current.size(); ++i)
        (pivot[i] ? out.first : out.second).push_back(state.current[i]);
    return out;
}

ReductionState lagrangian_step(const PhaseSpaceModel& model, const ReductionState& state) {
    const VarTable& vars = model.spec.vars;
    ReductionState st = state;

    SymMatrix gamma = step_gamma(st);
    RankCertificate cert = generic_rank(gamma);
    st.gamma = gamma;
    st.gamma_cert = cert;
    for (auto& s : cert.side_conditions) st.side_conditions.push_back(s);

    st.a_indices = cert.pivot_rows;
    st.mu_indices.clear();
    std::vector<bool> prow(st.free_dirs.size(), false), pcol(st.current.size(), false);
    for (int r : cert.pivot_rows) prow[r] = true;
    for (int c : cert.pivot_cols) pcol[c] = true;
    for (int r = 0; r < int(st.free_dirs.size()); ++r)
        if (!prow[r]) st.mu_indices.push_back(r);

    std::vector<Expr> dchi(st.current.size());
    for (std::size_t nu = 0; nu < st.current.size(); ++nu)
        dchi[nu] = state.apply_field(st.constraints[st.current[nu]].expr);

    // alpha_a = sum_b Pinv(b,a) * (-D(chi_b) - sum_{mu free} alpha_mu gamma(mu,b))
    const int r = cert.rank;
    SymMatrix pinv = r ? invert_submatrix(gamma, cert.pivot_rows, cert.pivot_cols)
                       : SymMatrix(0, 0);
    std::vector<Expr> base(r);
    std::vector<std::map<int, Expr>> lin(r);  // per pivot a: free row -> coefficient
    for (int a = 0; a < r; ++a) {
        Expr b0;
        for (int b = 0; b < r; ++b) b0 += pinv(b, a) * (-dchi[cert.pivot_cols[b]]);
        base[a] = b0;
        for (int mu : st.mu_indices) {
            Expr s;
            for (int b = 0; b < r; ++b)
                s += pinv(b, a) * (-gamma(mu, cert.pivot_cols[b]));
            if (!s.is_zero()) lin[a][mu] = s;
        }
    }

    // Resolve the pivot constraints (and their unresolved ancestors).
    for (int b = 0; b < r; ++b) {
        int ci = st.current[cert.pivot_cols[b]];
        Constraint& c = st.constraints[ci];
        std::optional<AtomId> forced;
        if (st.generation == 0) forced = vars.p[c.lineage];
        resolve_constraint(c, st, vars, forced);
        resolve_ancestors(c.lineage, c.generation, st, vars);
    }

    // Fold the determined accelerations into the evolution field.
    std::map<AtomId, Expr> dnew = st.d_coeff;
    for (int a = 0; a < r; ++a) {
        const Direction& dir = st.free_dirs[cert.pivot_rows[a]];
        for (auto& [x, comp] : dir.comps) {
            Expr add = base[a] * comp;
            if (add.is_zero()) continue;
            auto it = dnew.find(x);
            if (it == dnew.end()) dnew[x] = add;
            else it->second += add;
        }
        st.determined_accelerations[dir.home] = base[a];
    }

    // Remaining free directions absorb the multiplier-linear corrections.
    std::vector<Direction> fnew;
    for (int mu : st.mu_indices) {
        Direction d = st.free_dirs[mu];
        for (int a = 0; a < r; ++a) {
            auto it = lin[a].find(mu);
            if (it == lin[a].end()) continue;
            for (auto& [x, comp] : st.free_dirs[cert.pivot_rows[a]].comps) {
                Expr add = it->second * comp;
                if (add.is_zero()) continue;
                auto f = d.comps.find(x);
                if (f == d.comps.end()) d.comps[x] = add;
                else f->second += add;
            }
        }
        fnew.push_back(std::move(d));
    }

    // Restrict the field and directions to the new surface.
    std::set<AtomId> solved;
    for (auto& s : st.substitutions) solved.insert(s.var);
    auto restrict_map = [&](std::map<AtomId, Expr>& m) {
        std::map<AtomId, Expr> out;
        for (auto& [x, c] : m) {
            if (solved.count(x)) continue;
            Expr rc = st.apply_subs(c);
            if (!rc.is_zero()) out[x] = rc;
        }
        m = std::move(out);
    };
    restrict_map(dnew);
    for (auto& d : fnew) restrict_map(d.comps);
    st.d_coeff = std::move(dnew);
    st.free_dirs = std::move(fnew);

    // Next-generation candidates from the column null space.
    auto nullvecs = null_space_basis(gamma, cert);
    std::vector<int> nonpivot_cols;
    for (int c = 0; c < int(st.current.size()); ++c)
        if (!pcol[c]) nonpivot_cols.push_back(c);

    std::vector<int> next;
    for (std::size_t i = 0; i < nullvecs.size(); ++i) {
        Expr cand;
        for (std::size_t nu = 0; nu < st.current.size(); ++nu)
            cand += nullvecs[i][nu] * dchi[nu];
        cand = strip_candidate(st.apply_subs(cand), vars, st.side_conditions);
        if (reducibility_check(cand, st, vars, st.warnings)) continue;
        const Constraint& parent = st.constraints[st.current[nonpivot_cols[i]]];
        Constraint c;
        c.expr = cand;
        c.generation = st.generation + 1;
        c.lineage = parent.lineage;
        c.label = "phi_" + std::to_string(parent.lineage + 1) + "^(" +
                  std::to_string(c.generation) + ")";
        st.constraints.push_back(std::move(c));
        next.push_back(int(st.constraints.size()) - 1);
    }
    st.current = std::move(next);
    st.generation += 1;

    // Canonical side-condition list: positive leading sign, no duplicates.
    std::vector<Expr> sides;
    for (Expr s : st.side_conditions) {
        if (s.is_rational()) continue;
        if (poly_lead(s.rat().num).second < 0) s = -s;
        bool seen = false;
        for (auto& t : sides)
            if ((t - s).is_zero()) { seen = true; break; }
        if (!seen) sides.push_back(std::move(s));
    }
    st.side_conditions = std::move(sides);
    return st;
}

LagrangianReduction run_lagrangian(const PhaseSpaceModel& model, int max_generations) {
    if (max_generations < 1) throw InputError("max_generations must be >= 1");
    const VarTable& vars = model.spec.vars;

    ReductionState st;
    st.constraints = model.primary;
    for (int i = 0; i < vars.dim; ++i) {
        st.current.push_back(i);
        Direction d;
        d.name = multiplier_name(i + 1);
        d.home = vars.v[i];
        d.comps[vars.v[i]] = Expr(1);
        st.free_dirs.push_back(std::move(d));
    }
    for (int i = 0; i < vars.dim; ++i) {
        st.d_coeff[vars.q[i]] = Expr::symbol(vars.v[i]);
        Expr pdot = model.spec.lagrangian.diff(vars.q[i]);
        if (!pdot.is_zero()) st.d_coeff[vars.p[i]] = pdot;
    }

    LagrangianReduction red;
    while (true) {
        if (red.generations >= max_generations)
            throw GenerationBudgetExceeded(
                "no termination within " + std::to_string(max_generations) + " generations");
        st = lagrangian_step(model, st);
        red.generations += 1;
        red.states.push_back(st);
        if (st.free_dirs.empty()) {
            if (!st.current.empty())
                throw Error("inconsistent system: constraints remain with no free multiplier");
            red.termination = Termination::FullyDetermined;
            break;
        }
        if (st.current.empty()) {
            red.termination = Termination::GaugeFreedom;
            break;
        }
    }
    for (auto& c : st.constraints)
        if (c.cls == Constraint::Class::Undecided) c.cls = Constraint::Class::First;
    red.final_state = st;
    red.final_field = st.merged_field();
    return red;
}

} // namespace presym
