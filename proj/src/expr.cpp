#include "presym/expr.hpp"

#include <cassert>
#include <mutex>
#include <sstream>
#include <unordered_map>
#include <vector>

namespace presym {

// --- atom table --------------------------------------------------------------

namespace {

struct AtomTable {
    std::mutex mu;
    std::vector<Atom> atoms;
    std::unordered_map<std::string, AtomId> index;

    AtomId intern(const std::string& key, Atom a) {
        std::lock_guard<std::mutex> lock(mu);
        auto it = index.find(key);
        if (it != index.end()) return it->second;
        AtomId id = AtomId(atoms.size());
        atoms.push_back(std::move(a));
        index.emplace(key, id);
        return id;
    }

    Atom get(AtomId id) {
        std::lock_guard<std::mutex> lock(mu);
        return atoms.at(id);
    }
};

AtomTable& table() {
    static AtomTable t;
    return t;
}

// Stable per-id cache of atom info; the table is append-only.
const Atom& cached(AtomId id) {
    static std::mutex mu;
    static std::vector<std::unique_ptr<Atom>> cache;
    std::lock_guard<std::mutex> lock(mu);
    if (cache.size() <= id) cache.resize(id + 1);
    if (!cache[id]) cache[id] = std::make_unique<Atom>(table().get(id));
    return *cache[id];
}

} // namespace

AtomId intern_symbol(const std::string& name) {
    Atom a;
    a.kind = AtomKind::Symbol;
    a.name = name;
    return table().intern("S:" + name, std::move(a));
}

AtomId intern_opaque(const std::string& name, int deriv_order, const Expr& arg) {
    Atom a;
    a.kind = AtomKind::Opaque;
    a.name = name;
    a.deriv_order = deriv_order;
    a.arg = std::make_shared<const RatFun>(arg.rat());
    std::string key = "O:" + name + ":" + std::to_string(deriv_order) + ":" + arg.str();
    return table().intern(key, std::move(a));
}

const Atom& atom_info(AtomId id) { return cached(id); }

// --- normalization -----------------------------------------------------------

namespace {

Poly shift_expo(const Poly& p, const ExpPoly& neg_shift) {
    Poly r;
    for (auto& [m, c] : p) {
        Monomial n = m;
        n.expo = exp_poly_add(n.expo, neg_shift);
        r.emplace(std::move(n), c);
    }
    return r;
}

// Atom-power content common to every monomial of both polynomials.
SymMono mono_content(const Poly& a, const Poly& b) {
    SymMono g;
    bool first = true;
    auto visit = [&](const Poly& p) {
        for (auto& [m, c] : p) {
            if (first) {
                g = m.pows;
                first = false;
                continue;
            }
            SymMono next;
            for (auto& [id, k] : g) {
                auto f = m.pows.find(id);
                if (f != m.pows.end()) next[id] = std::min(k, f->second);
            }
            g = std::move(next);
            if (g.empty()) break;
        }
    };
    visit(a);
    if (!g.empty()) visit(b);
    return g;
}

Poly strip_mono(const Poly& p, const SymMono& g) {
    Poly r;
    for (auto& [m, c] : p) {
        Monomial n = m;
        for (auto& [id, k] : g) {
            n.pows[id] -= k;
            if (n.pows[id] == 0) n.pows.erase(id);
        }
        r.emplace(std::move(n), c);
    }
    return r;
}

} // namespace

Expr make_expr(Poly num, Poly den) {
    if (poly_is_zero(den)) throw DivisionByZero();
    if (poly_is_zero(num)) return Expr();

    // Move the exp factor of the denominator's leading monomial into the
    // numerator; the group order on exponents keeps this canonical.
    const ExpPoly& lead_expo = poly_lead(den).first.expo;
    if (!lead_expo.empty()) {
        ExpPoly neg = exp_poly_neg(lead_expo);
        num = shift_expo(num, neg);
        den = shift_expo(den, neg);
    }

    SymMono g = mono_content(num, den);
    if (!g.empty()) {
        num = strip_mono(num, g);
        den = strip_mono(den, g);
    }

    if (poly_is_const(den)) {
        Rational c = den.begin()->second;
        num = poly_scale(num, Rational(1) / c);
        den = poly_const(Rational(1));
    } else if (poly_exp_free(num) && poly_exp_free(den)) {
        Poly d = poly_gcd(num, den);
        if (!poly_is_const(d)) {
            num = poly_div_exact(num, d);
            den = poly_div_exact(den, d);
        }
        Rational c = poly_lead(den).second;
        if (c != 1) {
            num = poly_scale(num, Rational(1) / c);
            den = poly_scale(den, Rational(1) / c);
        }
    } else {
        Rational c = poly_lead(den).second;
        if (c != 1) {
            num = poly_scale(num, Rational(1) / c);
            den = poly_scale(den, Rational(1) / c);
        }
    }

    auto rf = std::make_shared<RatFun>();
    rf->num = std::move(num);
    rf->den = std::move(den);
    return Expr(std::shared_ptr<const RatFun>(std::move(rf)));
}

Expr Expr::make(Poly num, Poly den) { return make_expr(std::move(num), std::move(den)); }

// --- construction ------------------------------------------------------------

Expr::Expr() {
    static const std::shared_ptr<const RatFun> zero = [] {
        auto rf = std::make_shared<RatFun>();
        rf->den = poly_const(Rational(1));
        return rf;
    }();
    rf_ = zero;
}

Expr::Expr(int v) : Expr(Rational(v)) {}

Expr::Expr(const Rational& v) {
    auto rf = std::make_shared<RatFun>();
    rf->num = poly_const(v);
    rf->den = poly_const(Rational(1));
    rf_ = std::move(rf);
}

Expr Expr::symbol(AtomId id) { return make(poly_atom(id), poly_const(Rational(1))); }

Expr Expr::symbol(const std::string& name) { return symbol(intern_symbol(name)); }

Expr Expr::exp(const Expr& exponent) {
    if (exponent.is_zero()) return Expr(1);
    if (!exponent.is_polynomial() || !exponent.exp_free())
        throw Error("exp argument must be a polynomial in symbols");
    ExpPoly e;
    for (auto& [m, c] : exponent.rat().num) {
        for (auto& [id, k] : m.pows)
            if (atom_info(id).kind != AtomKind::Symbol)
                throw Error("exp argument must be a polynomial in symbols");
        e.emplace(m.pows, c);
    }
    Poly p;
    Monomial m;
    m.expo = std::move(e);
    p.emplace(std::move(m), Rational(1));
    return make(std::move(p), poly_const(Rational(1)));
}

Expr Expr::opaque(const std::string& name, int deriv_order, const Expr& arg) {
    return make(poly_atom(intern_opaque(name, deriv_order, arg)), poly_const(Rational(1)));
}

// --- predicates ---------------------------------------------------------------

bool Expr::is_zero() const { return rf_->num.empty(); }

bool Expr::is_one() const {
    return is_rational() && as_rational() == 1;
}

bool Expr::is_rational() const {
    return poly_is_const(rf_->num) && poly_is_const(rf_->den);
}

Rational Expr::as_rational() const {
    if (rf_->num.empty()) return Rational(0);
    return rf_->num.begin()->second / rf_->den.begin()->second;
}

bool Expr::is_polynomial() const { return poly_is_const(rf_->den); }

bool Expr::exp_free() const { return poly_exp_free(rf_->num) && poly_exp_free(rf_->den); }

static int poly_size(const Poly& p) {
    int s = 0;
    for (auto& [m, c] : p) {
        s += 1 + int(m.pows.size()) + int(m.expo.size());
    }
    return s;
}

int Expr::size() const {
    int s = poly_size(rf_->num);
    if (!is_polynomial()) s += poly_size(rf_->den);
    return s;
}

bool Expr::operator==(const Expr& o) const {
    if (rf_ == o.rf_) return true;
    return rf_->num == o.rf_->num && rf_->den == o.rf_->den;
}

// --- arithmetic ----------------------------------------------------------------

Expr Expr::operator-() const { return make(poly_neg(rf_->num), rf_->den); }

Expr Expr::operator+(const Expr& o) const {
    if (rf_->den == o.rf_->den)
        return make(poly_add(rf_->num, o.rf_->num), rf_->den);
    return make(poly_add(poly_mul(rf_->num, o.rf_->den), poly_mul(o.rf_->num, rf_->den)),
                poly_mul(rf_->den, o.rf_->den));
}

Expr Expr::operator-(const Expr& o) const { return *this + (-o); }

Expr Expr::operator*(const Expr& o) const {
    return make(poly_mul(rf_->num, o.rf_->num), poly_mul(rf_->den, o.rf_->den));
}

Expr Expr::operator/(const Expr& o) const {
    if (o.is_zero()) throw DivisionByZero();
    return make(poly_mul(rf_->num, o.rf_->den), poly_mul(rf_->den, o.rf_->num));
}

Expr Expr::pow(int k) const {
    if (k == 0) return Expr(1);
    if (k < 0) return (Expr(1) / *this).pow(-k);
    Expr base = *this, acc(1);
    while (k > 0) {
        if (k & 1) acc = acc * base;
        base = base * base;
        k >>= 1;
    }
    return acc;
}

Expr Expr::numerator() const { return make(rf_->num, poly_const(Rational(1))); }
Expr Expr::denominator() const { return make(rf_->den, poly_const(Rational(1))); }

// --- differentiation -----------------------------------------------------------

namespace {

Expr single_monomial(const Monomial& m) {
    Poly p;
    p.emplace(m, Rational(1));
    return make_expr(std::move(p), poly_const(Rational(1)));
}

Expr from_ratfun(const RatFun& rf) { return make_expr(rf.num, rf.den); }

Expr atom_diff(AtomId id, AtomId x) {
    const Atom& a = atom_info(id);
    if (a.kind == AtomKind::Symbol) return id == x ? Expr(1) : Expr();
    Expr arg = from_ratfun(*a.arg);
    Expr darg = arg.diff(x);
    if (darg.is_zero()) return Expr();
    return Expr::opaque(a.name, a.deriv_order + 1, arg) * darg;
}

Expr exp_poly_diff_expr(const ExpPoly& s, AtomId x) {
    Expr acc;
    for (auto& [m, c] : s) {
        auto f = m.find(x);
        if (f == m.end()) continue;
        SymMono n = m;
        if (f->second == 1) n.erase(x); else n[x] -= 1;
        Monomial mono;
        mono.pows = n;
        acc += Expr(c * f->second) * single_monomial(mono);
    }
    return acc;
}

Expr poly_diff(const Poly& p, AtomId x) {
    Expr acc;
    for (auto& [m, c] : p) {
        for (auto& [id, k] : m.pows) {
            Expr da = atom_diff(id, x);
            if (da.is_zero()) continue;
            Monomial reduced = m;
            if (k == 1) reduced.pows.erase(id); else reduced.pows[id] -= 1;
            acc += Expr(c * k) * single_monomial(reduced) * da;
        }
        if (!m.expo.empty()) {
            Expr ds = exp_poly_diff_expr(m.expo, x);
            if (!ds.is_zero()) acc += Expr(c) * single_monomial(m) * ds;
        }
    }
    return acc;
}

} // namespace

Expr Expr::diff(AtomId x) const {
    Expr dn = poly_diff(rf_->num, x);
    if (is_polynomial()) return dn;
    Expr dd = poly_diff(rf_->den, x);
    Expr num = numerator(), den = denominator();
    return (dn * den - num * dd) / (den * den);
}

Expr Expr::diff(const std::string& name) const { return diff(intern_symbol(name)); }

// --- substitution ---------------------------------------------------------------

namespace {

Expr eval_poly_hom(const Poly& p, const std::function<Expr(AtomId)>& image);

Expr eval_monomial_hom(const Monomial& m, const Rational& c,
                       const std::function<Expr(AtomId)>& image) {
    Expr term(c);
    for (auto& [id, k] : m.pows) term = term * image(id).pow(k);
    if (!m.expo.empty()) {
        Expr s;
        for (auto& [sm, sc] : m.expo) {
            Expr t(sc);
            for (auto& [id, k] : sm) t = t * image(id).pow(k);
            s += t;
        }
        term = term * Expr::exp(s);
    }
    return term;
}

Expr eval_poly_hom(const Poly& p, const std::function<Expr(AtomId)>& image) {
    Expr acc;
    for (auto& [m, c] : p) acc += eval_monomial_hom(m, c, image);
    return acc;
}

} // namespace

Expr Expr::substitute_unchecked(const std::map<AtomId, Expr>& bindings) const {
    std::function<Expr(AtomId)> image = [&](AtomId id) -> Expr {
        const Atom& a = atom_info(id);
        if (a.kind == AtomKind::Symbol) {
            auto it = bindings.find(id);
            return it != bindings.end() ? it->second : Expr::symbol(id);
        }
        Expr arg = from_ratfun(*a.arg).substitute_unchecked(bindings);
        return Expr::opaque(a.name, a.deriv_order, arg);
    };
    Expr n = eval_poly_hom(rf_->num, image);
    if (is_polynomial()) return n;
    Expr d = eval_poly_hom(rf_->den, image);
    return n / d;
}

Expr Expr::substitute(const std::map<AtomId, Expr>& bindings) const {
    for (auto& [k, v] : bindings) {
        auto vat = v.atoms();
        for (auto& [k2, v2] : bindings) {
            (void)v2;
            if (vat.count(k2))
                throw CyclicBinding("binding for '" + atom_info(k).name +
                                    "' mentions bound variable '" + atom_info(k2).name + "'");
        }
    }
    return substitute_unchecked(bindings);
}

bool Expr::contains(AtomId id) const { return atoms().count(id) > 0; }

std::set<AtomId> Expr::atoms() const {
    std::set<AtomId> out;
    poly_atoms(rf_->num, out);
    poly_atoms(rf_->den, out);
    // expand through opaque-function arguments
    std::vector<AtomId> stack(out.begin(), out.end());
    while (!stack.empty()) {
        AtomId id = stack.back();
        stack.pop_back();
        const Atom& a = atom_info(id);
        if (a.kind != AtomKind::Opaque) continue;
        std::set<AtomId> inner;
        poly_atoms(a.arg->num, inner);
        poly_atoms(a.arg->den, inner);
        for (AtomId i : inner)
            if (out.insert(i).second) stack.push_back(i);
    }
    return out;
}

// --- numeric evaluation ----------------------------------------------------------

namespace {

std::uint64_t fnv1a(const std::string& s, std::uint64_t h) {
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001B3ULL;
    }
    return h;
}

std::uint64_t splitmix(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

// Deterministic pseudo-random value of an opaque atom at a rational argument.
Rational opaque_value(const Atom& a, const Rational& arg, std::uint64_t seed) {
    std::ostringstream os;
    os << a.name << '\'' << a.deriv_order << '@' << arg;
    std::uint64_t h = splitmix(fnv1a(os.str(), seed ^ 0xCBF29CE484222325ULL));
    long num = long(h % 17) - 8;
    if (num == 0) num = 3;
    long den = long((h >> 32) % 4) + 1;
    return Rational(num, den);
}

struct RationalEval {
    const std::map<AtomId, Rational>& point;
    std::uint64_t seed;

    Rational atom(AtomId id) const {
        const Atom& a = atom_info(id);
        if (a.kind == AtomKind::Symbol) {
            auto it = point.find(id);
            if (it == point.end())
                throw Error("unassigned symbol '" + a.name + "' in numeric evaluation");
            return it->second;
        }
        RationalEval inner{point, seed};
        Rational arg = inner.ratfun(*a.arg);
        return opaque_value(a, arg, seed);
    }

    Rational poly(const Poly& p) const {
        Rational acc(0);
        for (auto& [m, c] : p) {
            Rational t = c;
            for (auto& [id, k] : m.pows) {
                Rational v = atom(id);
                for (int i = 0; i < k; ++i) t *= v;
            }
            if (!m.expo.empty()) {
                Rational s(0);
                for (auto& [sm, sc] : m.expo) {
                    Rational u = sc;
                    for (auto& [id, k] : sm) {
                        Rational v = atom(id);
                        for (int i = 0; i < k; ++i) u *= v;
                    }
                    s += u;
                }
                if (!s.is_zero())
                    throw Error("exact evaluation hit an irrational exp factor");
            }
            acc += t;
        }
        return acc;
    }

    Rational ratfun(const RatFun& rf) const {
        Rational d = poly(rf.den);
        if (d.is_zero()) throw SideConditionViolated("denominator vanished at sample point");
        return poly(rf.num) / d;
    }
};

struct RealEval {
    const std::map<AtomId, Rational>& point;
    std::uint64_t seed;

    Real atom(AtomId id) const {
        const Atom& a = atom_info(id);
        if (a.kind == AtomKind::Symbol) {
            auto it = point.find(id);
            if (it == point.end())
                throw Error("unassigned symbol '" + a.name + "' in numeric evaluation");
            return to_real(it->second);
        }
        RationalEval inner{point, seed};
        Rational arg = inner.ratfun(*a.arg);
        return to_real(opaque_value(a, arg, seed));
    }

    Real poly(const Poly& p) const {
        Real acc(0);
        for (auto& [m, c] : p) {
            Real t = to_real(c);
            for (auto& [id, k] : m.pows) {
                Real v = atom(id);
                for (int i = 0; i < k; ++i) t *= v;
            }
            if (!m.expo.empty()) {
                Real s(0);
                for (auto& [sm, sc] : m.expo) {
                    Real u = to_real(sc);
                    for (auto& [id, k] : sm) {
                        Real v = atom(id);
                        for (int i = 0; i < k; ++i) u *= v;
                    }
                    s += u;
                }
                t *= exp(s);
            }
            acc += t;
        }
        return acc;
    }

    Real ratfun(const RatFun& rf) const {
        Real d = poly(rf.den);
        if (d == 0) throw SideConditionViolated("denominator vanished at sample point");
        return poly(rf.num) / d;
    }
};

} // namespace

Rational Expr::eval_rational(const std::map<AtomId, Rational>& point, std::uint64_t seed) const {
    return RationalEval{point, seed}.ratfun(*rf_);
}

Real Expr::eval_real(const std::map<AtomId, Rational>& point, std::uint64_t seed) const {
    return RealEval{point, seed}.ratfun(*rf_);
}

// --- printing ---------------------------------------------------------------------

namespace {

std::string rational_str(const Rational& r) {
    std::ostringstream os;
    os << r;
    return os.str();
}

std::string atom_str(AtomId id) {
    const Atom& a = atom_info(id);
    if (a.kind == AtomKind::Symbol) return a.name;
    std::string s = a.name;
    for (int i = 0; i < a.deriv_order; ++i) s += '\'';
    return s + "(" + from_ratfun(*a.arg).str() + ")";
}

std::string sym_mono_str(const SymMono& m, const Rational& c) {
    std::vector<std::string> parts;
    Rational a = c < 0 ? Rational(-c) : c;
    if (a != 1 || m.empty()) parts.push_back(rational_str(a));
    for (auto& [id, k] : m) {
        std::string f = atom_str(id);
        if (k != 1) f += "^" + std::to_string(k);
        parts.push_back(f);
    }
    std::string out;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        if (i) out += "*";
        out += parts[i];
    }
    return out;
}

std::string poly_str(const Poly& p) {
    if (p.empty()) return "0";
    std::string out;
    bool first = true;
    for (auto it = p.rbegin(); it != p.rend(); ++it) {
        const Monomial& m = it->first;
        const Rational& c = it->second;
        if (first) {
            if (c < 0) out += "-";
        } else {
            out += c < 0 ? " - " : " + ";
        }
        first = false;
        Rational a = c < 0 ? Rational(-c) : c;
        std::vector<std::string> parts;
        if (a != 1 || (m.pows.empty() && m.expo.empty())) parts.push_back(rational_str(a));
        for (auto& [id, k] : m.pows) {
            std::string f = atom_str(id);
            if (k != 1) f += "^" + std::to_string(k);
            parts.push_back(f);
        }
        if (!m.expo.empty()) parts.push_back("exp(" + print_exp_poly(m.expo) + ")");
        for (std::size_t i = 0; i < parts.size(); ++i) {
            if (i) out += "*";
            out += parts[i];
        }
    }
    return out;
}

} // namespace

std::string print_exp_poly(const ExpPoly& p) {
    if (p.empty()) return "0";
    std::string out;
    bool first = true;
    for (auto it = p.rbegin(); it != p.rend(); ++it) {
        const Rational& c = it->second;
        if (first) {
            if (c < 0) out += "-";
        } else {
            out += c < 0 ? " - " : " + ";
        }
        first = false;
        out += sym_mono_str(it->first, c);
    }
    return out;
}

std::string Expr::str() const {
    if (is_polynomial()) return poly_str(rf_->num);
    std::string n = poly_str(rf_->num);
    std::string d = poly_str(rf_->den);
    return "(" + n + ")/(" + d + ")";
}

// --- linear solving ------------------------------------------------------------------

std::pair<Expr, Expr> solve_linear(const Expr& e, AtomId x) {
    Expr a = e.diff(x);
    if (!a.diff(x).is_zero() || a.contains(x))
        throw NotAffine("expression is not affine in '" + atom_info(x).name + "'");
    if (a.is_zero())
        throw ZeroCoefficient("coefficient of '" + atom_info(x).name + "' is identically zero");
    Expr b = e - a * Expr::symbol(x);
    return {(-b) / a, a};
}

} // namespace presym
