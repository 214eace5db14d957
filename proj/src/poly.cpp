#include "presym/expr.hpp"

#include <algorithm>
#include <cassert>

namespace presym {

// --- monomial order ---------------------------------------------------------

int sym_mono_cmp(const SymMono& a, const SymMono& b) {
    // Graded, then lexicographic from the largest atom id down.  Graded
    // orders are multiplicative, which exact division relies on.
    int da = 0, db = 0;
    for (auto& [id, k] : a) da += k;
    for (auto& [id, k] : b) db += k;
    if (da != db) return da < db ? -1 : 1;
    auto ia = a.rbegin(), ib = b.rbegin();
    while (ia != a.rend() && ib != b.rend()) {
        if (ia->first != ib->first) return ia->first < ib->first ? -1 : 1;
        if (ia->second != ib->second) return ia->second < ib->second ? -1 : 1;
        ++ia; ++ib;
    }
    if (ia != a.rend()) return 1;
    if (ib != b.rend()) return -1;
    return 0;
}

// Order by the sign of the difference: a group order, so it is invariant
// under the exponent shifts performed during normalization.
int exp_poly_cmp(const ExpPoly& a, const ExpPoly& b) {
    auto ia = a.rbegin();
    auto ib = b.rbegin();
    while (ia != a.rend() || ib != b.rend()) {
        if (ib == b.rend() || (ia != a.rend() && sym_mono_cmp(ia->first, ib->first) > 0)) {
            if (!ia->second.is_zero()) return ia->second > 0 ? 1 : -1;
            ++ia;
        } else if (ia == a.rend() || sym_mono_cmp(ia->first, ib->first) < 0) {
            if (!ib->second.is_zero()) return ib->second > 0 ? -1 : 1;
            ++ib;
        } else {
            if (ia->second != ib->second) return ia->second > ib->second ? 1 : -1;
            ++ia; ++ib;
        }
    }
    return 0;
}

ExpPoly exp_poly_add(const ExpPoly& a, const ExpPoly& b) {
    ExpPoly r = a;
    for (auto& [m, c] : b) {
        auto it = r.find(m);
        if (it == r.end()) {
            if (!c.is_zero()) r.emplace(m, c);
        } else {
            it->second += c;
            if (it->second.is_zero()) r.erase(it);
        }
    }
    return r;
}

ExpPoly exp_poly_neg(const ExpPoly& a) {
    ExpPoly r;
    for (auto& [m, c] : a) r.emplace(m, -c);
    return r;
}

ExpPoly exp_poly_scale(const ExpPoly& a, const Rational& c) {
    ExpPoly r;
    if (c.is_zero()) return r;
    for (auto& [m, k] : a) r.emplace(m, k * c);
    return r;
}

int Monomial::degree() const {
    int d = 0;
    for (auto& [id, k] : pows) d += k;
    return d;
}

bool MonomialLess::operator()(const Monomial& a, const Monomial& b) const {
    int c = sym_mono_cmp(a.pows, b.pows);
    if (c != 0) return c < 0;
    return exp_poly_cmp(a.expo, b.expo) < 0;
}

// --- polynomial arithmetic ---------------------------------------------------

Poly poly_zero() { return {}; }

Poly poly_const(const Rational& c) {
    Poly p;
    if (!c.is_zero()) p.emplace(Monomial{}, c);
    return p;
}

Poly poly_atom(AtomId id) {
    Poly p;
    Monomial m;
    m.pows[id] = 1;
    p.emplace(std::move(m), Rational(1));
    return p;
}

bool poly_is_zero(const Poly& p) { return p.empty(); }

bool poly_is_const(const Poly& p) {
    return p.empty() || (p.size() == 1 && p.begin()->first.pows.empty() && p.begin()->first.expo.empty());
}

void poly_add_term(Poly& p, const Monomial& m, const Rational& c) {
    if (c.is_zero()) return;
    auto it = p.find(m);
    if (it == p.end()) {
        p.emplace(m, c);
    } else {
        it->second += c;
        if (it->second.is_zero()) p.erase(it);
    }
}

Poly poly_add(const Poly& a, const Poly& b) {
    Poly r = a;
    for (auto& [m, c] : b) poly_add_term(r, m, c);
    return r;
}

Poly poly_sub(const Poly& a, const Poly& b) {
    Poly r = a;
    for (auto& [m, c] : b) poly_add_term(r, m, -c);
    return r;
}

Poly poly_neg(const Poly& a) {
    Poly r;
    for (auto& [m, c] : a) r.emplace(m, -c);
    return r;
}

static Monomial mono_mul(const Monomial& a, const Monomial& b) {
    Monomial r = a;
    for (auto& [id, k] : b.pows) {
        r.pows[id] += k;
        if (r.pows[id] == 0) r.pows.erase(id);
    }
    r.expo = exp_poly_add(r.expo, b.expo);
    return r;
}

Poly poly_mul(const Poly& a, const Poly& b) {
    Poly r;
    for (auto& [ma, ca] : a)
        for (auto& [mb, cb] : b)
            poly_add_term(r, mono_mul(ma, mb), ca * cb);
    return r;
}

Poly poly_scale(const Poly& a, const Rational& c) {
    Poly r;
    if (c.is_zero()) return r;
    for (auto& [m, k] : a) r.emplace(m, k * c);
    return r;
}

bool poly_exp_free(const Poly& p) {
    for (auto& [m, c] : p)
        if (!m.expo.empty()) return false;
    return true;
}

void poly_atoms(const Poly& p, std::set<AtomId>& out) {
    for (auto& [m, c] : p) {
        for (auto& [id, k] : m.pows) out.insert(id);
        for (auto& [sm, r] : m.expo)
            for (auto& [id, k] : sm) out.insert(id);
    }
}

const std::pair<const Monomial, Rational>& poly_lead(const Poly& p) {
    assert(!p.empty());
    return *p.rbegin();
}

// --- exact division and gcd (exp-free polynomials) ---------------------------

static bool mono_divides(const Monomial& g, const Monomial& m, Monomial& q) {
    q = Monomial{};
    auto it = m.pows.begin();
    for (auto& [id, k] : g.pows) {
        auto f = m.pows.find(id);
        if (f == m.pows.end() || f->second < k) return false;
    }
    for (auto& [id, k] : m.pows) {
        auto f = g.pows.find(id);
        int d = k - (f == g.pows.end() ? 0 : f->second);
        if (d > 0) q.pows[id] = d;
    }
    (void)it;
    return true;
}

Poly poly_div_exact(const Poly& p, const Poly& g) {
    if (poly_is_zero(g)) throw Error("exact division by zero polynomial");
    Poly rem = p, quot;
    const auto& glead = poly_lead(g);
    while (!rem.empty()) {
        const auto& rlead = poly_lead(rem);
        Monomial q;
        if (!mono_divides(glead.first, rlead.first, q))
            throw Error("non-exact polynomial division");
        Rational c = rlead.second / glead.second;
        poly_add_term(quot, q, c);
        Poly t;
        t.emplace(q, c);
        rem = poly_sub(rem, poly_mul(t, g));
    }
    return quot;
}

namespace {

int degree_in(const Poly& p, AtomId x) {
    int d = 0;
    for (auto& [m, c] : p) {
        auto f = m.pows.find(x);
        if (f != m.pows.end()) d = std::max(d, f->second);
    }
    return d;
}

// Coefficients of p viewed as a univariate polynomial in x.
std::vector<Poly> univariate(const Poly& p, AtomId x) {
    std::vector<Poly> cs(degree_in(p, x) + 1);
    for (auto& [m, c] : p) {
        Monomial r = m;
        int k = 0;
        auto f = r.pows.find(x);
        if (f != r.pows.end()) { k = f->second; r.pows.erase(f); }
        poly_add_term(cs[k], r, c);
    }
    return cs;
}

Poly from_univariate(const std::vector<Poly>& cs, AtomId x) {
    Poly r;
    for (std::size_t k = 0; k < cs.size(); ++k) {
        Poly xk;
        Monomial m;
        if (k > 0) m.pows[x] = int(k);
        xk.emplace(m, Rational(1));
        r = poly_add(r, poly_mul(cs[k], xk));
    }
    return r;
}

// Pseudo-remainder of a by b in x: lc(b)^(da-db+1) * a mod b.
Poly pseudo_rem(const Poly& a, const Poly& b, AtomId x) {
    auto ca = univariate(a, x);
    auto cb = univariate(b, x);
    int da = int(ca.size()) - 1, db = int(cb.size()) - 1;
    Poly lcb = cb[db];
    Poly rem = a;
    while (true) {
        auto cr = univariate(rem, x);
        int dr = int(cr.size()) - 1;
        if (poly_is_zero(rem) || dr < db) break;
        // rem = lcb*rem - lc(rem)*x^(dr-db)*b
        Poly shift;
        Monomial m;
        if (dr - db > 0) m.pows[x] = dr - db;
        shift.emplace(m, Rational(1));
        rem = poly_sub(poly_mul(lcb, rem), poly_mul(poly_mul(cr[dr], shift), b));
    }
    (void)da;
    return rem;
}

Poly monic(const Poly& p) {
    if (p.empty()) return p;
    return poly_scale(p, Rational(1) / poly_lead(p).second);
}

Poly content_in(const Poly& p, AtomId x) {
    auto cs = univariate(p, x);
    Poly g;
    for (auto& c : cs)
        if (!poly_is_zero(c)) g = poly_gcd(g, c);
    return g;
}

} // namespace

Poly poly_gcd(const Poly& a, const Poly& b) {
    if (!poly_exp_free(a) || !poly_exp_free(b))
        throw Error("poly_gcd requires exp-free polynomials");
    if (poly_is_zero(a)) return monic(b);
    if (poly_is_zero(b)) return monic(a);
    if (poly_is_const(a) || poly_is_const(b)) return poly_const(Rational(1));

    std::set<AtomId> atoms;
    poly_atoms(a, atoms);
    poly_atoms(b, atoms);
    AtomId x = *atoms.rbegin();

    if (degree_in(a, x) == 0) return poly_gcd(a, content_in(b, x));
    if (degree_in(b, x) == 0) return poly_gcd(content_in(a, x), b);

    Poly ca = content_in(a, x), cb = content_in(b, x);
    Poly g0 = poly_gcd(ca, cb);
    Poly f = poly_div_exact(a, ca);
    Poly g = poly_div_exact(b, cb);
    if (degree_in(f, x) < degree_in(g, x)) std::swap(f, g);

    while (!poly_is_zero(g)) {
        Poly r = pseudo_rem(f, g, x);
        f = g;
        if (poly_is_zero(r)) { g = r; break; }
        Poly cr = content_in(r, x);
        g = poly_div_exact(r, cr);
    }
    Poly cf = content_in(f, x);
    return monic(poly_mul(g0, poly_div_exact(f, cf)));
}

} // namespace presym
