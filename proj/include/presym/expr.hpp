#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include "presym/errors.hpp"
#include "presym/rational.hpp"

namespace presym {

// ---------------------------------------------------------------------------
// Atoms and monomials.
//
// An expression is kept permanently in a canonical normal form: a rational
// function whose numerator and denominator are expanded polynomials over a
// set of atoms.  Atoms are named symbols (coordinates, parameters) and formal
// derivatives of opaque unary functions.  Exponential factors are not atoms;
// each monomial carries one polynomial exponent, so exp(P)*exp(Q) collapses
// to exp(P+Q) by construction.
// ---------------------------------------------------------------------------

using AtomId = std::uint32_t;

/// Exponent map of a plain monomial in symbol atoms, all powers >= 1.
using SymMono = std::map<AtomId, int>;

/// Polynomial with rational coefficients in symbol atoms; used as the
/// exponent of an exp factor.  Empty map means exponent zero (no factor).
using ExpPoly = std::map<SymMono, Rational>;

int sym_mono_cmp(const SymMono& a, const SymMono& b);   // graded lex
int exp_poly_cmp(const ExpPoly& a, const ExpPoly& b);   // sign of (a - b)

ExpPoly exp_poly_add(const ExpPoly& a, const ExpPoly& b);
ExpPoly exp_poly_neg(const ExpPoly& a);
ExpPoly exp_poly_scale(const ExpPoly& a, const Rational& c);

struct Monomial {
    SymMono pows;
    ExpPoly expo;

    bool operator==(const Monomial& o) const { return pows == o.pows && expo == o.expo; }
    int degree() const;
};

struct MonomialLess {
    bool operator()(const Monomial& a, const Monomial& b) const;
};

/// Expanded multivariate polynomial; invariant: no zero coefficients stored.
using Poly = std::map<Monomial, Rational, MonomialLess>;

Poly poly_zero();
Poly poly_const(const Rational& c);
Poly poly_atom(AtomId id);
bool poly_is_zero(const Poly& p);
bool poly_is_const(const Poly& p);
void poly_add_term(Poly& p, const Monomial& m, const Rational& c);
Poly poly_add(const Poly& a, const Poly& b);
Poly poly_sub(const Poly& a, const Poly& b);
Poly poly_neg(const Poly& a);
Poly poly_mul(const Poly& a, const Poly& b);
Poly poly_scale(const Poly& a, const Rational& c);
bool poly_exp_free(const Poly& p);
void poly_atoms(const Poly& p, std::set<AtomId>& out);

/// Leading (largest) term under the canonical monomial order.
const std::pair<const Monomial, Rational>& poly_lead(const Poly& p);

/// Exact division; throws Error if the division is not exact.
Poly poly_div_exact(const Poly& p, const Poly& g);

/// GCD of two exp-free polynomials, normalized to leading coefficient 1.
Poly poly_gcd(const Poly& a, const Poly& b);

struct RatFun {
    Poly num;
    Poly den;  // never identically zero
};

// ---------------------------------------------------------------------------
// Atom table (global, append-only, thread-safe).
// ---------------------------------------------------------------------------

class Expr;

enum class AtomKind { Symbol, Opaque };

struct Atom {
    AtomKind kind = AtomKind::Symbol;
    std::string name;
    int deriv_order = 0;                 // opaque only: number of primes
    std::shared_ptr<const RatFun> arg;   // opaque only: the (normalized) argument
};

/// Interns a symbol atom; repeated calls with the same name return the same id.
AtomId intern_symbol(const std::string& name);

/// Interns a formal derivative atom F^(order)(arg).
AtomId intern_opaque(const std::string& name, int deriv_order, const Expr& arg);

const Atom& atom_info(AtomId id);

// ---------------------------------------------------------------------------
// Expr: immutable value type, always normalized.
// ---------------------------------------------------------------------------

class Expr {
public:
    Expr();                         // zero
    explicit Expr(int v);
    explicit Expr(const Rational& v);
    static Expr symbol(AtomId id);
    static Expr symbol(const std::string& name);
    /// exp of a polynomial expression in symbol atoms.
    static Expr exp(const Expr& exponent);
    static Expr opaque(const std::string& name, int deriv_order, const Expr& arg);

    bool is_zero() const;
    bool is_one() const;
    bool is_rational() const;            // literal c/d, no atoms, no exp
    Rational as_rational() const;        // pre: is_rational()
    bool is_polynomial() const;          // denominator == 1
    bool exp_free() const;

    /// Term/factor count, used for deterministic pivot preference.
    int size() const;

    bool operator==(const Expr& o) const;
    bool operator!=(const Expr& o) const { return !(*this == o); }

    Expr operator-() const;
    Expr operator+(const Expr& o) const;
    Expr operator-(const Expr& o) const;
    Expr operator*(const Expr& o) const;
    Expr operator/(const Expr& o) const;   // throws DivisionByZero
    Expr& operator+=(const Expr& o) { *this = *this + o; return *this; }
    Expr& operator-=(const Expr& o) { *this = *this - o; return *this; }
    Expr& operator*=(const Expr& o) { *this = *this * o; return *this; }
    Expr& operator/=(const Expr& o) { *this = *this / o; return *this; }
    Expr pow(int k) const;

    /// Exact partial derivative with respect to a symbol atom.
    Expr diff(AtomId x) const;
    Expr diff(const std::string& name) const;

    /// Simultaneous substitution; throws CyclicBinding if any bound value
    /// mentions a bound variable.
    Expr substitute(const std::map<AtomId, Expr>& bindings) const;
    /// Substitution without the simultaneity check (caller orders bindings).
    Expr substitute_unchecked(const std::map<AtomId, Expr>& bindings) const;

    bool contains(AtomId id) const;
    std::set<AtomId> atoms() const;

    /// Numeric value with exact rational arithmetic.  Throws Error if the
    /// expression has exp factors with nonzero exponent (irrational) and
    /// SideConditionViolated if the denominator vanishes at the point.
    Rational eval_rational(const std::map<AtomId, Rational>& point,
                           std::uint64_t opaque_seed = 0x9E3779B97F4A7C15ULL) const;
    /// Numeric value in the shared high-precision float backend.
    Real eval_real(const std::map<AtomId, Rational>& point,
                   std::uint64_t opaque_seed = 0x9E3779B97F4A7C15ULL) const;

    std::string str() const;

    const RatFun& rat() const { return *rf_; }
    Expr numerator() const;
    Expr denominator() const;

private:
    explicit Expr(std::shared_ptr<const RatFun> rf) : rf_(std::move(rf)) {}
    static Expr make(Poly num, Poly den);
    std::shared_ptr<const RatFun> rf_;

    friend Expr make_expr(Poly num, Poly den);
};

Expr make_expr(Poly num, Poly den);

/// normalize is the identity on Expr (values are kept canonical), provided
/// so the kernel API reads like the operation set it implements.
inline Expr normalize(const Expr& e) { return e; }
inline bool is_zero(const Expr& e) { return e.is_zero(); }

/// Solves e == 0 for x, requiring e affine in x.  Returns the solution and
/// the coefficient of x (the nonvanishing side condition).
std::pair<Expr, Expr> solve_linear(const Expr& e, AtomId x);

std::string print_exp_poly(const ExpPoly& p);

} // namespace presym
