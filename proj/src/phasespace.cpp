#include "presym/phasespace.hpp"

namespace presym {

std::string multiplier_name(int k) { return "alpha_" + std::to_string(k); }

PhaseSpaceModel build_model(const LagrangianSpec& spec) {
    PhaseSpaceModel m;
    m.spec = spec;

    const VarTable& t = spec.vars;
    if (t.dim != spec.dim) throw InputError("variable table dimension mismatch");

    // Assigned parameter values are folded into the Lagrangian up front.
    std::map<AtomId, Expr> values;
    for (auto& [name, val] : spec.param_values)
        values[intern_symbol(name)] = Expr(val);
    if (!values.empty()) m.spec.lagrangian = spec.lagrangian.substitute(values);

    const Expr& l = m.spec.lagrangian;
    for (AtomId id : l.atoms())
        if (t.is_p(id))
            throw InputError("lagrangian mentions momentum variable '" + atom_info(id).name + "'");

    m.energy = Expr();
    for (int i = 0; i < t.dim; ++i)
        m.energy += Expr::symbol(t.p[i]) * Expr::symbol(t.v[i]);
    m.energy -= l;

    m.hessian = SymMatrix(t.dim, t.dim);
    for (int i = 0; i < t.dim; ++i)
        for (int j = 0; j < t.dim; ++j)
            m.hessian(i, j) = l.diff(t.v[i]).diff(t.v[j]);
    m.hessian_cert = generic_rank(m.hessian);

    for (int i = 0; i < t.dim; ++i) {
        Constraint c;
        c.expr = Expr::symbol(t.p[i]) - l.diff(t.v[i]);
        c.generation = 0;
        c.lineage = i;
        c.label = "phi_" + std::to_string(i + 1);
        m.primary.push_back(std::move(c));
    }
    return m;
}

std::vector<Constraint> primary_constraints(const PhaseSpaceModel& model) {
    // Route check: dE(d/dv^i) must reproduce p_i - dl/dv^i.
    const VarTable& t = model.spec.vars;
    auto vd = vertical_differential(model, model.energy);
    for (int i = 0; i < t.dim; ++i)
        if (vd.at(t.v[i]) != model.primary[i].expr)
            throw Error("primary constraint routes disagree");
    return model.primary;
}

std::map<AtomId, Expr> vertical_differential(const PhaseSpaceModel& model, const Expr& f) {
    std::map<AtomId, Expr> out;
    for (AtomId v : model.spec.vars.v) out[v] = f.diff(v);
    return out;
}

VectorField evolution_field(const PhaseSpaceModel& model) {
    const VarTable& t = model.spec.vars;
    VectorField y;
    for (int i = 0; i < t.dim; ++i) {
        Expr qdot = Expr::symbol(t.v[i]);
        Expr pdot = model.spec.lagrangian.diff(t.q[i]);
        if (!qdot.is_zero()) y.coeff[t.q[i]] = qdot;
        if (!pdot.is_zero()) y.coeff[t.p[i]] = pdot;
        std::string a = multiplier_name(i + 1);
        y.coeff[t.v[i]] = Expr::symbol(a);
        y.undetermined.push_back(a);
    }
    return y;
}

Expr poisson_bracket(const VarTable& vars, const Expr& f, const Expr& g) {
    Expr r;
    for (int i = 0; i < vars.dim; ++i)
        r += f.diff(vars.p[i]) * g.diff(vars.q[i]) - f.diff(vars.q[i]) * g.diff(vars.p[i]);
    return r;
}

std::pair<SymMatrix, SymMatrix> lagrangian_two_form(const PhaseSpaceModel& model) {
    const VarTable& t = model.spec.vars;
    const Expr& l = model.spec.lagrangian;
    SymMatrix mm(t.dim, t.dim);
    for (int i = 0; i < t.dim; ++i)
        for (int j = 0; j < t.dim; ++j)
            mm(i, j) = l.diff(t.q[i]).diff(t.v[j]) - l.diff(t.v[i]).diff(t.q[j]);
    return {model.hessian, mm};
}

Expr lagrangian_bracket(const PhaseSpaceModel& model, const Expr& f, const Expr& g) {
    const VarTable& t = model.spec.vars;
    const int n = t.dim;
    if (model.hessian_cert.rank < n)
        throw DegenerateLagrangian("lagrangian_bracket requires a regular Lagrangian");

    std::vector<int> all(n);
    for (int i = 0; i < n; ++i) all[i] = i;
    SymMatrix ginv = invert_submatrix(model.hessian, all, all);
    auto [gamma, mform] = lagrangian_two_form(model);

    // M^{ij} = Gamma^{ik} M_{kl} Gamma^{lj}
    SymMatrix mup(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            Expr s;
            for (int k = 0; k < n; ++k)
                for (int l = 0; l < n; ++l)
                    s += ginv(i, k) * mform(k, l) * ginv(l, j);
            mup(i, j) = s;
        }

    Expr r;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            r += ginv(i, j) * (f.diff(t.v[i]) * g.diff(t.q[j]) - g.diff(t.v[i]) * f.diff(t.q[j]));
            r -= mup(i, j) * f.diff(t.v[i]) * g.diff(t.v[j]);
        }
    return r;
}

} // namespace presym
