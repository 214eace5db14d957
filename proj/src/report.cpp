#include "presym/report.hpp"

#include <fstream>
#include <random>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "presym/parser.hpp"

namespace presym {

namespace {

using ordered_json = nlohmann::ordered_json;

std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

Rational parse_rational_text(const std::string& text, const std::string& context) {
    std::string t = trim(text);
    if (t.empty()) throw InputError(context + ": empty rational value");
    for (char c : t)
        if (!std::isdigit(static_cast<unsigned char>(c)) && c != '-' && c != '/')
            throw InputError(context + ": bad rational value '" + t + "'");
    try {
        return Rational(t);
    } catch (const std::exception&) {
        throw InputError(context + ": bad rational value '" + t + "'");
    }
}

bool is_ident(const std::string& s) {
    if (s.empty() || !(std::isalpha(static_cast<unsigned char>(s[0])) || s[0] == '_'))
        return false;
    for (char c : s)
        if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_')) return false;
    return true;
}

void push_side(std::vector<Expr>& sides, Expr cond) {
    if (cond.is_rational()) return;
    if (poly_lead(cond.rat().num).second < 0) cond = -cond;
    for (auto& s : sides)
        if (s == cond) return;
    sides.push_back(cond);
}

} // namespace

// --- input files -----------------------------------------------------------------

LagrangianSpec parse_system_text(const std::string& text, const std::string& origin) {
    std::string name;
    int dim = -1;
    std::vector<std::pair<std::string, std::optional<Rational>>> params;
    std::vector<std::string> functions;
    std::string lag_text;
    bool have_lag = false;

    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string ctx = origin + ":" + std::to_string(lineno);
        std::size_t hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;

        std::istringstream ls(line);
        std::string key;
        ls >> key;
        std::string rest = trim(line.substr(key.size()));
        if (key == "system") {
            if (rest.size() < 2 || rest.front() != '"' || rest.back() != '"')
                throw InputError(ctx + ": system name must be quoted");
            name = rest.substr(1, rest.size() - 2);
        } else if (key == "dim") {
            try {
                dim = std::stoi(rest);
            } catch (const std::exception&) {
                throw InputError(ctx + ": bad dimension '" + rest + "'");
            }
            if (dim < 1) throw InputError(ctx + ": dimension must be >= 1");
        } else if (key == "param") {
            std::size_t eq = rest.find('=');
            std::string pname = trim(eq == std::string::npos ? rest : rest.substr(0, eq));
            if (!is_ident(pname)) throw InputError(ctx + ": bad parameter name '" + pname + "'");
            std::optional<Rational> value;
            if (eq != std::string::npos)
                value = parse_rational_text(rest.substr(eq + 1), ctx);
            params.emplace_back(pname, value);
        } else if (key == "function") {
            if (!is_ident(rest)) throw InputError(ctx + ": bad function name '" + rest + "'");
            functions.push_back(rest);
        } else if (key == "lagrangian") {
            std::size_t eq = rest.find('=');
            if (rest.empty() || rest[0] != '=')
                throw InputError(ctx + ": expected 'lagrangian = <expression>'");
            lag_text = trim(rest.substr(1));
            (void)eq;
            have_lag = true;
        } else {
            throw InputError(ctx + ": unknown directive '" + key + "'");
        }
    }
    if (dim < 1) throw InputError(origin + ": missing 'dim' declaration");
    if (!have_lag) throw InputError(origin + ": missing 'lagrangian' declaration");
    if (name.empty()) name = origin;

    LagrangianSpec spec;
    spec.name = name;
    spec.dim = dim;
    spec.vars = VarTable::make(dim);
    for (auto& [pname, value] : params) {
        spec.vars.add_param(pname);
        if (value) spec.param_values.emplace_back(pname, *value);
    }
    for (auto& f : functions) spec.vars.add_function(f);
    try {
        spec.lagrangian = parse_expression(lag_text, spec.vars);
    } catch (const ParseError& e) {
        throw InputError(origin + ": in lagrangian: " + e.what());
    }
    return spec;
}

LagrangianSpec parse_system_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot open input file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_system_text(buf.str(), path);
}

void set_parameter(LagrangianSpec& spec, const std::string& name, const Rational& value) {
    bool declared = false;
    for (auto& [n, id] : spec.vars.params)
        if (n == name) declared = true;
    if (!declared)
        throw InputError("--set: '" + name + "' is not a declared parameter of system '" +
                         spec.name + "'");
    for (auto& [n, v] : spec.param_values)
        if (n == name) {
            v = value;
            return;
        }
    spec.param_values.emplace_back(name, value);
}

// --- cross-picture equivalence ---------------------------------------------------

namespace {

Expr restrict_with(const Expr& e, const std::vector<Substitution>& subs) {
    Expr r = e;
    for (auto& s : subs)
        if (r.contains(s.var)) r = r.substitute_unchecked({{s.var, s.solution}});
    return r;
}

/// Vanishes on the surface: restricted expression is zero or reducible to
/// the unresolved constraints.
bool vanishes_on(const Expr& e, const std::vector<Substitution>& subs,
                 const std::vector<Expr>& active, const VarTable& vars,
                 std::vector<std::string>& warnings) {
    Expr r = restrict_with(e, subs);
    if (r.is_zero()) return true;
    return reduce_modulo(r, active, vars, warnings);
}

std::vector<Expr> unresolved_exprs(const std::vector<Constraint>& cs,
                                   const std::vector<Substitution>& subs) {
    std::vector<Expr> out;
    for (auto& c : cs)
        if (!c.resolution) {
            Expr r = restrict_with(c.expr, subs);
            if (!r.is_zero()) out.push_back(r);
        }
    return out;
}

} // namespace

EquivalenceRecord cross_check(const PhaseSpaceModel& model,
                              const LagrangianReduction& lag,
                              const HamiltonianReduction& ham) {
    const VarTable& vars = model.spec.vars;
    EquivalenceRecord rec;
    std::vector<std::string> scratch;

    for (auto& c : ham.final_state.constraints)
        if (c.generation == 0 && c.resolution && vars.is_v(c.resolution->var))
            rec.map.emplace_back(atom_info(c.resolution->var).name,
                                 c.resolution->solution.str());

    if (lag.termination != ham.termination)
        throw EquivalenceFailure("termination modes differ between the pictures");
    if (lag.final_field.undetermined.size() != ham.final_field.undetermined.size())
        throw EquivalenceFailure("undetermined multiplier counts differ between the pictures");

    auto& lsubs = lag.final_state.substitutions;
    auto& hsubs = ham.final_state.substitutions;
    std::vector<Expr> lactive = unresolved_exprs(lag.final_state.constraints, lsubs);
    std::vector<Expr> hactive = unresolved_exprs(ham.final_state.constraints, hsubs);

    for (auto& lc : lag.final_state.constraints) {
        const Constraint* hc = nullptr;
        for (auto& c : ham.final_state.constraints)
            if (c.generation == lc.generation && c.lineage == lc.lineage) hc = &c;
        if (!hc)
            throw EquivalenceFailure("constraint '" + lc.label +
                                     "' has no counterpart in the Hamiltonian picture");
        if (!vanishes_on(lc.expr, hsubs, hactive, vars, scratch))
            throw EquivalenceFailure("constraint '" + lc.label +
                                     "' does not vanish on the Hamiltonian surface");
        if (!vanishes_on(hc->expr, lsubs, lactive, vars, scratch))
            throw EquivalenceFailure("constraint '" + hc->label +
                                     "' does not vanish on the Lagrangian surface");
    }
    for (auto& hc : ham.final_state.constraints) {
        bool found = false;
        for (auto& c : lag.final_state.constraints)
            if (c.generation == hc.generation && c.lineage == hc.lineage) found = true;
        if (!found)
            throw EquivalenceFailure("constraint '" + hc.label +
                                     "' has no counterpart in the Lagrangian picture");
    }

    rec.matched = true;
    return rec;
}

// --- numeric verification --------------------------------------------------------

namespace {

/// Final surface plus affine elimination of the remaining (first-class)
/// constraints, so that sampled points satisfy every recorded relation.
std::vector<Substitution> extended_surface(const std::vector<Substitution>& base,
                                           const std::vector<Constraint>& constraints,
                                           const VarTable& vars) {
    std::vector<Substitution> subs = base;
    std::vector<Expr> pending;
    for (auto& c : constraints)
        if (!c.resolution) pending.push_back(c.expr);
    bool progress = true;
    while (progress) {
        progress = false;
        for (auto it = pending.begin(); it != pending.end();) {
            Expr r = restrict_with(*it, subs);
            if (r.is_zero()) {
                it = pending.erase(it);
                progress = true;
                continue;
            }
            if (auto x = affine_solve_var(r, vars)) {
                auto [sol, side] = solve_linear(r, *x);
                subs.push_back({*x, sol, side});
                it = pending.erase(it);
                progress = true;
                continue;
            }
            ++it;
        }
    }
    return subs;
}

Rational draw_rational(std::mt19937_64& rng) {
    std::uint64_t r = rng();
    long num = long(r % 19) - 9;
    long den = long((r >> 32) % 4) + 1;
    return Rational(num, den);
}

Real eval_abs(const Expr& e, const std::map<AtomId, Rational>& pt, std::uint64_t seed) {
    if (e.is_zero()) return Real(0);
    if (e.exp_free()) {
        Rational v = e.eval_rational(pt, seed);
        return Real(boost::multiprecision::abs(v));
    }
    Real v = e.eval_real(pt, seed);
    return boost::multiprecision::abs(v);
}

Real run_samples(const std::vector<Expr>& residuals, const std::vector<Expr>& sides,
                 int samples, std::uint64_t seed) {
    std::set<AtomId> free_atoms;
    for (auto& e : residuals)
        for (AtomId a : e.atoms())
            if (atom_info(a).kind == AtomKind::Symbol) free_atoms.insert(a);
    for (auto& e : sides)
        for (AtomId a : e.atoms())
            if (atom_info(a).kind == AtomKind::Symbol) free_atoms.insert(a);

    std::mt19937_64 rng(seed);
    Real max_res = 0;
    const Real tol("1e-30");
    for (int s = 0; s < samples; ++s) {
        std::map<AtomId, Rational> pt;
        bool ok = false;
        for (int attempt = 0; attempt < 100 && !ok; ++attempt) {
            pt.clear();
            for (AtomId a : free_atoms) pt[a] = draw_rational(rng);
            ok = true;
            for (auto& e : sides)
                if (eval_abs(e, pt, seed) <= tol) {
                    ok = false;
                    break;
                }
        }
        if (!ok)
            throw SideConditionViolated(
                "could not sample a surface point away from the recorded zero sets");
        for (auto& e : residuals) {
            Real r = eval_abs(e, pt, seed);
            if (r > max_res) max_res = r;
        }
    }
    return max_res;
}

/// Deterministic polynomial test functions over (q, p).  Quadratic terms
/// make the bracket identities nontrivial; with free symbolic parameters the
/// nested Dirac brackets are kept affine to bound coefficient growth.
std::vector<Expr> test_functions(const VarTable& vars, bool affine) {
    Expr f, g, h;
    for (int i = 0; i < vars.dim; ++i) {
        Expr q = Expr::symbol(vars.q[i]), p = Expr::symbol(vars.p[i]);
        if (affine) {
            f += Expr(i + 1) * q + Expr(2) * p;
            g += q - Expr(i + 3) * p;
            h += Expr(2 * i + 1) * q + p;
        } else {
            f += Expr(i + 1) * q + p * p;
            g += q * p + Expr(2) * p;
            h += q * q - Expr(i + 2) * p;
        }
    }
    return {f, g, h};
}

bool has_free_parameter(const VarTable& vars, const Expr& e) {
    for (AtomId a : e.atoms())
        if (vars.is_param(a)) return true;
    return false;
}

} // namespace

VerificationSummary numeric_verify(const PhaseSpaceModel& model,
                                   const LagrangianReduction& lag,
                                   int samples, std::uint64_t seed) {
    VerificationSummary vs;
    vs.samples = samples;
    if (samples <= 0) return vs;
    const VarTable& vars = model.spec.vars;
    auto& st = lag.final_state;
    auto surface = extended_surface(st.substitutions, st.constraints, vars);

    std::vector<Expr> residuals;
    // (a) conservation of E along the final field.
    Expr e_surf = restrict_with(model.energy, surface);
    residuals.push_back(restrict_with(lag.final_field.apply(e_surf), surface));
    // (b) every recorded constraint vanishes on the sampled surface.
    for (auto& c : st.constraints) residuals.push_back(restrict_with(c.expr, surface));
    // (c) canonical bracket identities (antisymmetry and Jacobi).
    auto tf = test_functions(vars, false);
    residuals.push_back(poisson_bracket(vars, tf[0], tf[1]) +
                        poisson_bracket(vars, tf[1], tf[0]));
    Expr jac = poisson_bracket(vars, tf[0], poisson_bracket(vars, tf[1], tf[2])) +
               poisson_bracket(vars, tf[1], poisson_bracket(vars, tf[2], tf[0])) +
               poisson_bracket(vars, tf[2], poisson_bracket(vars, tf[0], tf[1]));
    residuals.push_back(jac);

    std::vector<Expr> sides;
    for (auto& s : st.side_conditions) push_side(sides, restrict_with(s, surface));
    vs.max_residual = run_samples(residuals, sides, samples, seed);
    return vs;
}

VerificationSummary numeric_verify(const PhaseSpaceModel& model,
                                   const HamiltonianReduction& ham,
                                   int samples, std::uint64_t seed) {
    VerificationSummary vs;
    vs.samples = samples;
    if (samples <= 0) return vs;
    const VarTable& vars = model.spec.vars;
    auto& st = ham.final_state;
    auto surface = extended_surface(st.substitutions, st.constraints, vars);
    const BracketTable& table = st.table;

    std::vector<Expr> residuals;
    // (a) conservation of h under the total Hamiltonian.
    residuals.push_back(
        restrict_with(table.bracket(vars, ham.routh.h_total, ham.routh.h), surface));
    // (b) recorded constraints vanish; the Dirac bracket annihilates the pool.
    for (auto& c : st.constraints) residuals.push_back(restrict_with(c.expr, surface));
    bool affine_tf = false;
    for (int a : table.selected)
        if (has_free_parameter(vars, table.pool[a])) affine_tf = true;
    for (int r = 0; r < table.cinv.rows() && !affine_tf; ++r)
        for (int c = 0; c < table.cinv.cols() && !affine_tf; ++c)
            if (has_free_parameter(vars, table.cinv(r, c))) affine_tf = true;
    auto tf = test_functions(vars, affine_tf);
    for (int a : table.selected)
        for (auto& f : tf)
            residuals.push_back(restrict_with(table.bracket(vars, table.pool[a], f), surface));
    // (c) antisymmetry and on-surface Jacobi for the final bracket.
    residuals.push_back(restrict_with(
        table.bracket(vars, tf[0], tf[1]) + table.bracket(vars, tf[1], tf[0]), surface));
    Expr jac = table.bracket(vars, tf[0], table.bracket(vars, tf[1], tf[2])) +
               table.bracket(vars, tf[1], table.bracket(vars, tf[2], tf[0])) +
               table.bracket(vars, tf[2], table.bracket(vars, tf[0], tf[1]));
    residuals.push_back(restrict_with(jac, surface));

    std::vector<Expr> sides;
    for (auto& s : st.side_conditions) push_side(sides, restrict_with(s, surface));
    vs.max_residual = run_samples(residuals, sides, samples, seed);
    return vs;
}

// --- orchestration ---------------------------------------------------------------

Report analyze(const AnalysisRequest& request) {
    if (request.max_generations < 1) throw InputError("--max-gen must be >= 1");
    if (request.verify_samples < 0) throw InputError("--verify-samples must be >= 0");

    Report r;
    r.request = request;
    r.model = build_model(request.spec);
    for (auto& s : r.model.hessian_cert.side_conditions) push_side(r.side_conditions, s);

    if (request.picture != Picture::Hamiltonian) {
        r.lag = run_lagrangian(r.model, request.max_generations);
        for (auto& s : r.lag->final_state.side_conditions) push_side(r.side_conditions, s);
        for (auto& w : r.lag->final_state.warnings) r.warnings.push_back("lagrangian: " + w);
    }
    if (request.picture != Picture::Lagrangian) {
        r.ham = run_hamiltonian(r.model, request.max_generations);
        for (auto& s : r.ham->final_state.side_conditions) push_side(r.side_conditions, s);
        for (auto& w : r.ham->final_state.warnings) r.warnings.push_back("hamiltonian: " + w);
    }
    if (request.picture == Picture::Both)
        r.equivalence = cross_check(r.model, *r.lag, *r.ham);

    if (request.verify_samples > 0) {
        VerificationSummary vs;
        vs.samples = request.verify_samples;
        if (r.lag) {
            auto v = numeric_verify(r.model, *r.lag, request.verify_samples, request.rng_seed);
            if (v.max_residual > vs.max_residual) vs.max_residual = v.max_residual;
        }
        if (r.ham) {
            auto v = numeric_verify(r.model, *r.ham, request.verify_samples, request.rng_seed);
            if (v.max_residual > vs.max_residual) vs.max_residual = v.max_residual;
        }
        r.verification = vs;
    }
    return r;
}

// --- rendering -------------------------------------------------------------------

namespace {

const char* class_name(Constraint::Class c) {
    switch (c) {
        case Constraint::Class::Second: return "second";
        case Constraint::Class::First: return "first";
        default: return "undecided";
    }
}

const char* termination_name(Termination t) {
    return t == Termination::FullyDetermined ? "FullyDetermined" : "GaugeFreedom";
}

ordered_json constraint_json(const Constraint& c) {
    ordered_json j;
    j["label"] = c.label;
    j["expr"] = c.expr.str();
    j["class"] = class_name(c.cls);
    if (c.resolution) {
        ordered_json r;
        r["variable"] = atom_info(c.resolution->var).name;
        r["solution"] = c.resolution->solution.str();
        if (c.resolution->side_condition.is_rational())
            r["side_condition"] = nullptr;
        else
            r["side_condition"] = c.resolution->side_condition.str();
        j["resolution"] = r;
    } else {
        j["resolution"] = nullptr;
    }
    return j;
}

ordered_json generations_json(const std::vector<Constraint>& cs) {
    int max_gen = 0;
    for (auto& c : cs) max_gen = std::max(max_gen, c.generation);
    ordered_json gens = ordered_json::array();
    for (int g = 0; g <= max_gen; ++g) {
        ordered_json jg;
        jg["generation"] = g;
        ordered_json arr = ordered_json::array();
        for (auto& c : cs)
            if (c.generation == g) arr.push_back(constraint_json(c));
        jg["constraints"] = arr;
        gens.push_back(jg);
    }
    return gens;
}

ordered_json field_json(const VectorField& f) {
    ordered_json j;
    ordered_json coeffs = ordered_json::object();
    for (auto& [x, e] : f.coeff) coeffs[atom_info(x).name] = e.str();
    j["coefficients"] = coeffs;
    j["undetermined"] = f.undetermined;
    return j;
}

ordered_json expr_map_json(const std::map<AtomId, Expr>& m) {
    ordered_json j = ordered_json::object();
    for (auto& [x, e] : m) j[atom_info(x).name] = e.str();
    return j;
}

ordered_json lag_picture_json(const LagrangianReduction& red, const VarTable& vars) {
    ordered_json j;
    j["generations"] = generations_json(red.final_state.constraints);
    ordered_json det;
    ordered_json vel = ordered_json::object();
    std::map<AtomId, Expr> vsubs;
    for (auto& s : red.final_state.substitutions)
        if (vars.is_v(s.var)) vsubs[s.var] = s.solution;
    det["velocities"] = expr_map_json(vsubs);
    det["accelerations"] = expr_map_json(red.final_state.determined_accelerations);
    j["determined"] = det;
    j["termination"] = termination_name(red.termination);
    j["evolution_field"] = field_json(red.final_field);
    return j;
}

ordered_json ham_picture_json(const HamiltonianReduction& red) {
    ordered_json j;
    j["generations"] = generations_json(red.final_state.constraints);
    ordered_json det;
    det["velocities"] = expr_map_json(red.final_state.determined_velocities);
    det["accelerations"] = expr_map_json(red.final_state.determined_accelerations);
    j["determined"] = det;
    j["termination"] = termination_name(red.termination);
    j["evolution_field"] = field_json(red.final_field);
    j["h"] = red.routh.h.str();
    j["h_total"] = red.routh.h_total.str();
    return j;
}

ordered_json report_json(const Report& r) {
    ordered_json j;
    j["system"] = r.model.spec.name;
    j["dim"] = r.model.spec.dim;
    ordered_json sides = ordered_json::array();
    for (auto& s : r.side_conditions) sides.push_back(s.str());
    j["side_conditions"] = sides;
    ordered_json pics;
    pics["lagrangian"] =
        r.lag ? lag_picture_json(*r.lag, r.model.spec.vars) : ordered_json(nullptr);
    pics["hamiltonian"] = r.ham ? ham_picture_json(*r.ham) : ordered_json(nullptr);
    j["pictures"] = pics;
    if (r.equivalence) {
        ordered_json eq;
        ordered_json m = ordered_json::array();
        for (auto& [l, h] : r.equivalence->map) {
            ordered_json e;
            e["lagrangian"] = l;
            e["hamiltonian"] = h;
            m.push_back(e);
        }
        eq["map"] = m;
        eq["matched"] = r.equivalence->matched;
        j["equivalence"] = eq;
    } else {
        j["equivalence"] = nullptr;
    }
    if (r.verification) {
        ordered_json v;
        v["samples"] = r.verification->samples;
        v["max_residual"] = r.verification->max_residual.convert_to<double>();
        j["verification"] = v;
    } else {
        j["verification"] = nullptr;
    }
    j["warnings"] = r.warnings;
    return j;
}

void render_constraints_text(std::ostream& out, const std::vector<Constraint>& cs) {
    int max_gen = 0;
    for (auto& c : cs) max_gen = std::max(max_gen, c.generation);
    for (int g = 0; g <= max_gen; ++g) {
        out << "  generation " << g << ":\n";
        for (auto& c : cs) {
            if (c.generation != g) continue;
            out << "    " << c.label << " = " << c.expr.str() << "  [" << class_name(c.cls)
                << "]";
            if (c.resolution)
                out << "  => " << atom_info(c.resolution->var).name << " = "
                    << c.resolution->solution.str();
            out << "\n";
        }
    }
}

void render_field_text(std::ostream& out, const VectorField& f) {
    if (f.coeff.empty()) {
        out << "    (zero field)\n";
        return;
    }
    for (auto& [x, e] : f.coeff)
        out << "    d/dt " << atom_info(x).name << " = " << e.str() << "\n";
    if (!f.undetermined.empty()) {
        out << "    undetermined multipliers:";
        for (auto& u : f.undetermined) out << " " << u;
        out << "\n";
    }
}

std::string report_text(const Report& r) {
    std::ostringstream out;
    out << "system \"" << r.model.spec.name << "\" (dim " << r.model.spec.dim << ")\n";
    out << "hessian rank " << r.model.hessian_cert.rank << " of " << r.model.spec.dim << "\n";
    if (!r.side_conditions.empty()) {
        out << "side conditions (assumed nonzero):";
        for (auto& s : r.side_conditions) out << "  " << s.str();
        out << "\n";
    }
    if (r.lag) {
        out << "\n[lagrangian picture]  termination: " << termination_name(r.lag->termination)
            << " after " << r.lag->generations << " generation(s)\n";
        render_constraints_text(out, r.lag->final_state.constraints);
        if (!r.lag->final_state.determined_accelerations.empty()) {
            out << "  determined accelerations:\n";
            for (auto& [v, e] : r.lag->final_state.determined_accelerations)
                out << "    d/dt " << atom_info(v).name << " = " << e.str() << "\n";
        }
        out << "  final evolution field:\n";
        render_field_text(out, r.lag->final_field);
    }
    if (r.ham) {
        out << "\n[hamiltonian picture]  termination: " << termination_name(r.ham->termination)
            << " after " << r.ham->generations << " generation(s)\n";
        out << "  h = " << r.ham->routh.h.str() << "\n";
        out << "  h_T = " << r.ham->routh.h_total.str() << "\n";
        render_constraints_text(out, r.ham->final_state.constraints);
        if (!r.ham->final_state.determined_velocities.empty()) {
            out << "  determined velocities:\n";
            for (auto& [v, e] : r.ham->final_state.determined_velocities)
                out << "    " << atom_info(v).name << " = " << e.str() << "\n";
        }
        out << "  final evolution field:\n";
        render_field_text(out, r.ham->final_field);
    }
    if (r.equivalence) {
        out << "\n[equivalence]  " << (r.equivalence->matched ? "matched" : "NOT matched")
            << "\n";
        for (auto& [l, h] : r.equivalence->map)
            out << "  " << l << "  <->  " << h << "\n";
    }
    if (r.verification) {
        out << "\n[verification]  samples: " << r.verification->samples
            << "  max residual: " << r.verification->max_residual << "\n";
    }
    if (!r.warnings.empty()) {
        out << "\nwarnings:\n";
        for (auto& w : r.warnings) out << "  " << w << "\n";
    }
    return out.str();
}

} // namespace

std::string render_report(const Report& report, Format format) {
    if (format == Format::Json) return report_json(report).dump(2) + "\n";
    return report_text(report);
}

std::string render_reports(const std::vector<Report>& reports, Format format) {
    if (format == Format::Json) {
        if (reports.size() == 1) return report_json(reports[0]).dump(2) + "\n";
        ordered_json arr = ordered_json::array();
        for (auto& r : reports) arr.push_back(report_json(r));
        return arr.dump(2) + "\n";
    }
    std::string out;
    for (std::size_t i = 0; i < reports.size(); ++i) {
        if (i) out += "\n" + std::string(72, '-') + "\n\n";
        out += report_text(reports[i]);
    }
    return out;
}

// --- CLI -------------------------------------------------------------------------

int cli_main(int argc, const char* const* argv) {
    CLI::App app{"Constraint analysis for degenerate Lagrangian systems"};
    std::vector<std::string> files;
    std::string picture = "both", format = "text", out_path;
    int max_gen = 10, samples = 16;
    std::uint64_t seed = 1;
    std::vector<std::string> sets;

    app.add_option("files", files, "input system files")->required();
    app.add_option("--picture", picture, "lagrangian|hamiltonian|both")
        ->check(CLI::IsMember({"lagrangian", "hamiltonian", "both"}));
    app.add_option("--max-gen", max_gen, "generation budget");
    app.add_option("--verify-samples", samples, "numeric verification samples");
    app.add_option("--seed", seed, "rng seed for verification and opaque values");
    app.add_option("--set", sets, "parameter assignment name=value");
    app.add_option("--format", format, "text|json")->check(CLI::IsMember({"text", "json"}));
    app.add_option("--out", out_path, "write the report to a file instead of stdout");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    std::vector<Report> reports;
    try {
        for (auto& file : files) {
            AnalysisRequest req;
            req.spec = parse_system_file(file);
            for (auto& s : sets) {
                std::size_t eq = s.find('=');
                if (eq == std::string::npos)
                    throw InputError("--set expects name=value, got '" + s + "'");
                set_parameter(req.spec, trim(s.substr(0, eq)),
                              parse_rational_text(s.substr(eq + 1), "--set " + s));
            }
            req.picture = picture == "lagrangian"    ? Picture::Lagrangian
                          : picture == "hamiltonian" ? Picture::Hamiltonian
                                                     : Picture::Both;
            req.max_generations = max_gen;
            req.verify_samples = samples;
            req.rng_seed = seed;
            req.format = format == "json" ? Format::Json : Format::Text;
            if (req.max_generations < 1) throw InputError("--max-gen must be >= 1");
            if (req.verify_samples < 0) throw InputError("--verify-samples must be >= 0");
            reports.push_back(analyze(req));
        }
    } catch (const InputError& e) {
        std::fprintf(stderr, "input error: %s\n", e.what());
        return 2;
    } catch (const ParseError& e) {
        std::fprintf(stderr, "input error: %s\n", e.what());
        return 2;
    } catch (const Error& e) {
        std::fprintf(stderr, "analysis error: %s\n", e.what());
        return 1;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "analysis error: %s\n", e.what());
        return 1;
    }

    std::string text = render_reports(reports, format == "json" ? Format::Json : Format::Text);
    if (!out_path.empty()) {
        std::ofstream out(out_path, std::ios::binary);
        if (!out) {
            std::fprintf(stderr, "input error: cannot open output file '%s'\n",
                         out_path.c_str());
            return 2;
        }
        out << text;
    } else {
        std::fwrite(text.data(), 1, text.size(), stdout);
    }
    return 0;
}

} // namespace presym
