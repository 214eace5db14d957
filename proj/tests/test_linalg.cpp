#include <random>

#include "doctest.h"
#include "fixtures.hpp"

using namespace presym;

namespace {

SymMatrix from_rows(int r, int c, std::vector<Expr> e) {
    SymMatrix m(r, c);
    int k = 0;
    for (int i = 0; i < r; ++i)
        for (int j = 0; j < c; ++j) m(i, j) = e[k++];
    return m;
}

/// Numeric rank oracle at a rational point (exact Gaussian elimination for
/// exp-free entries, high-precision floats otherwise).
int numeric_rank(const SymMatrix& m, const std::map<AtomId, Rational>& pt) {
    const int nr = int(m.rows()), nc = int(m.cols());
    std::vector<std::vector<Real>> a(nr, std::vector<Real>(nc));
    for (int i = 0; i < nr; ++i)
        for (int j = 0; j < nc; ++j) a[i][j] = m(i, j).eval_real(pt);
    const Real tol("1e-25");
    int rank = 0;
    for (int col = 0; col < nc && rank < nr; ++col) {
        int piv = -1;
        Real best = 0;
        for (int r = rank; r < nr; ++r)
            if (boost::multiprecision::abs(a[r][col]) > best) {
                best = boost::multiprecision::abs(a[r][col]);
                piv = r;
            }
        if (piv < 0 || best < tol) continue;
        std::swap(a[rank], a[piv]);
        for (int r = 0; r < nr; ++r) {
            if (r == rank) continue;
            Real f = a[r][col] / a[rank][col];
            for (int j = 0; j < nc; ++j) a[r][j] -= f * a[rank][j];
        }
        ++rank;
    }
    return rank;
}

void check_rank_at_points(const SymMatrix& m, const VarTable& vars) {
    RankCertificate cert = generic_rank(m);
    std::set<AtomId> atoms;
    for (int i = 0; i < int(m.rows()); ++i)
        for (int j = 0; j < int(m.cols()); ++j)
            for (AtomId a : m(i, j).atoms())
                if (atom_info(a).kind == AtomKind::Symbol) atoms.insert(a);
    std::mt19937_64 rng(99);
    const Real tol("1e-25");
    int done = 0;
    while (done < 50) {
        std::map<AtomId, Rational> pt;
        for (AtomId a : atoms) pt[a] = Rational(long(rng() % 19) - 9, long(rng() % 4) + 1);
        bool ok = true;
        for (auto& s : cert.side_conditions)
            if (boost::multiprecision::abs(s.eval_real(pt)) < tol) ok = false;
        if (!ok) continue;
        CHECK(numeric_rank(m, pt) == cert.rank);
        ++done;
    }
}

} // namespace

TEST_CASE("generic_rank on the corpus Hessians") {
    VarTable t = VarTable::make(3);
    {
        SymMatrix g = from_rows(3, 3,
                                {Expr(1), Expr(), Expr(), Expr(), Expr(), Expr(), Expr(),
                                 Expr(), Expr()});
        RankCertificate c = generic_rank(g);
        CHECK(c.rank == 1);
        CHECK(c.pivot_cols == std::vector<int>{0});
        CHECK(c.side_conditions.empty());
        auto basis = null_space_basis(g, c);
        REQUIRE(basis.size() == 2);
        CHECK(basis[0][0].is_zero());
        CHECK(basis[0][1].is_one());
        CHECK(basis[1][2].is_one());
    }
    {
        SymMatrix z = from_rows(2, 2, {Expr(), Expr(), Expr(), Expr()});
        RankCertificate c = generic_rank(z);
        CHECK(c.rank == 0);
        auto basis = null_space_basis(z, c);
        REQUIRE(basis.size() == 2);
        CHECK(basis[0][0].is_one());
        CHECK(basis[1][1].is_one());
    }
    {
        Expr e = Expr::exp(Expr::symbol(t.q[1]));
        SymMatrix g = from_rows(2, 2, {e, Expr(), Expr(), Expr()});
        RankCertificate c = generic_rank(g);
        CHECK(c.rank == 1);
        REQUIRE(c.side_conditions.size() == 1);
        CHECK((c.side_conditions[0] - e).is_zero());
        auto basis = null_space_basis(g, c);
        REQUIRE(basis.size() == 1);
        CHECK(basis[0][0].is_zero());
        CHECK(basis[0][1].is_one());
        // m * b normalizes to zero
        for (int i = 0; i < 2; ++i) {
            Expr acc;
            for (int j = 0; j < 2; ++j) acc += g(i, j) * basis[0][j];
            CHECK(acc.is_zero());
        }
    }
}

TEST_CASE("invert_submatrix is an exact inverse, both orders") {
    VarTable t = VarTable::make(2);
    {
        SymMatrix m = from_rows(1, 1, {Expr(1)});
        SymMatrix inv = invert_submatrix(m, {0}, {0});
        CHECK(inv(0, 0).is_one());
    }
    {
        SymMatrix m = from_rows(1, 1, {Expr::exp(Expr::symbol(t.q[1]))});
        SymMatrix inv = invert_submatrix(m, {0}, {0});
        CHECK((inv(0, 0) - Expr::exp(-Expr::symbol(t.q[1]))).is_zero());
    }
    {
        SymMatrix m = from_rows(2, 2,
                                {Expr::symbol(t.q[0]) + Expr(1), Expr::symbol(t.p[0]),
                                 Expr(2), Expr::symbol(t.q[1])});
        SymMatrix inv = invert_submatrix(m, {0, 1}, {0, 1});
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j) {
                Expr ab, ba;
                for (int k = 0; k < 2; ++k) {
                    ab += m(i, k) * inv(k, j);
                    ba += inv(i, k) * m(k, j);
                }
                Expr want = Expr(i == j ? 1 : 0);
                CHECK((ab - want).is_zero());
                CHECK((ba - want).is_zero());
            }
    }
    {
        SymMatrix m = from_rows(2, 2, {Expr(1), Expr(1), Expr(1), Expr(1)});
        CHECK_THROWS_AS(invert_submatrix(m, {0, 1}, {0, 1}), SingularSubmatrix);
    }
}

TEST_CASE("numeric rank oracle at 50 points per fixture") {
    using namespace presym::testing;
    for (auto spec : {make_ex1(), make_ex2(), make_ex3(), make_ex4(), make_ex5(0, -1)}) {
        auto model = build_model(spec);
        check_rank_at_points(model.hessian, spec.vars);
        auto [gamma, mform] = lagrangian_two_form(model);
        check_rank_at_points(mform, spec.vars);
    }
    // a generically full-rank symbolic matrix
    VarTable t = VarTable::make(2);
    SymMatrix m = from_rows(2, 2,
                            {Expr::symbol(t.q[0]), Expr(1) + Expr::symbol(t.p[0]),
                             Expr::symbol(t.q[1]).pow(2), Expr(3)});
    check_rank_at_points(m, t);
}

TEST_CASE("null space vectors annihilate the matrix for symbolic fixtures") {
    VarTable t = VarTable::make(3);
    SymMatrix m = from_rows(2, 3,
                            {Expr::symbol(t.q[0]), Expr::symbol(t.q[1]), Expr(1),
                             Expr(), Expr::symbol(t.p[0]), Expr::symbol(t.q[0])});
    RankCertificate c = generic_rank(m);
    auto basis = null_space_basis(m, c);
    CHECK(int(basis.size()) == 3 - c.rank);
    for (auto& b : basis)
        for (int i = 0; i < 2; ++i) {
            Expr acc;
            for (int j = 0; j < 3; ++j) acc += m(i, j) * b[j];
            CHECK(acc.is_zero());
        }
}
