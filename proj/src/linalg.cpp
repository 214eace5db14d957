#include "presym/linalg.hpp"

#include <algorithm>

namespace presym {

namespace {

bool better_pivot(const Expr& a, int ar, int ac, const Expr& b, int br, int bc) {
    // b is the incumbent; return true if a should replace it.
    bool alit = a.is_rational(), blit = b.is_rational();
    if (alit != blit) return alit;
    int as = a.size(), bs = b.size();
    if (as != bs) return as < bs;
    if (ar != br) return ar < br;
    return ac < bc;
}

} // namespace

RankCertificate generic_rank(const SymMatrix& m) {
    const int nr = int(m.rows()), nc = int(m.cols());
    SymMatrix b = m;
    std::vector<bool> row_used(nr, false), col_used(nc, false);
    RankCertificate cert;
    Expr prev(1);

    while (true) {
        int pr = -1, pc = -1;
        for (int r = 0; r < nr; ++r) {
            if (row_used[r]) continue;
            for (int c = 0; c < nc; ++c) {
                if (col_used[c]) continue;
                const Expr& e = b(r, c);
                if (e.is_zero()) continue;
                if (pr < 0 || better_pivot(e, r, c, b(pr, pc), pr, pc)) {
                    pr = r;
                    pc = c;
                }
            }
        }
        if (pr < 0) break;

        Expr pivot = b(pr, pc);
        cert.pivot_rows.push_back(pr);
        cert.pivot_cols.push_back(pc);
        if (!pivot.is_rational()) {
            // Sign-normalize: a != 0 and -a != 0 are the same hypothesis.
            Expr cond = pivot;
            if (poly_lead(cond.rat().num).second < 0) cond = -cond;
            cert.side_conditions.push_back(cond);
        }

        for (int r = 0; r < nr; ++r) {
            if (row_used[r] || r == pr) continue;
            for (int c = 0; c < nc; ++c) {
                if (col_used[c] || c == pc) continue;
                b(r, c) = (b(r, c) * pivot - b(r, pc) * b(pr, c)) / prev;
            }
        }
        row_used[pr] = true;
        col_used[pc] = true;
        prev = pivot;
    }
    cert.rank = int(cert.pivot_rows.size());
    return cert;
}

SymMatrix invert_submatrix(const SymMatrix& m,
                           const std::vector<int>& rows,
                           const std::vector<int>& cols) {
    const int k = int(rows.size());
    if (k != int(cols.size())) throw Error("invert_submatrix: non-square selection");
    if (k == 0) return SymMatrix(0, 0);

    // Gauss-Jordan over the expression field on [A | I].
    SymMatrix a(k, 2 * k);
    for (int r = 0; r < k; ++r)
        for (int c = 0; c < k; ++c) {
            a(r, c) = m(rows[r], cols[c]);
            a(r, k + c) = Expr(r == c ? 1 : 0);
        }

    for (int c = 0; c < k; ++c) {
        int pr = -1;
        for (int r = c; r < k; ++r) {
            if (a(r, c).is_zero()) continue;
            if (pr < 0 || better_pivot(a(r, c), r, c, a(pr, c), pr, c)) pr = r;
        }
        if (pr < 0) throw SingularSubmatrix("selected submatrix is generically singular");
        if (pr != c)
            for (int j = 0; j < 2 * k; ++j) std::swap(a(c, j), a(pr, j));
        Expr inv = Expr(1) / a(c, c);
        for (int j = 0; j < 2 * k; ++j) a(c, j) = a(c, j) * inv;
        for (int r = 0; r < k; ++r) {
            if (r == c || a(r, c).is_zero()) continue;
            Expr f = a(r, c);
            for (int j = 0; j < 2 * k; ++j) a(r, j) = a(r, j) - f * a(c, j);
        }
    }

    SymMatrix out(k, k);
    for (int r = 0; r < k; ++r)
        for (int c = 0; c < k; ++c) out(r, c) = a(r, k + c);
    return out;
}

std::vector<std::vector<Expr>> null_space_basis(const SymMatrix& m,
                                                const RankCertificate& cert) {
    const int nc = int(m.cols());
    std::vector<bool> is_pivot_col(nc, false);
    for (int c : cert.pivot_cols) is_pivot_col[c] = true;

    SymMatrix pinv = invert_submatrix(m, cert.pivot_rows, cert.pivot_cols);

    std::vector<std::vector<Expr>> basis;
    for (int mu = 0; mu < nc; ++mu) {
        if (is_pivot_col[mu]) continue;
        std::vector<Expr> b(nc, Expr());
        b[mu] = Expr(1);
        // Solve the pivot block so every pivot row annihilates b.
        for (int j = 0; j < cert.rank; ++j) {
            Expr s;
            for (int i = 0; i < cert.rank; ++i)
                s += pinv(j, i) * m(cert.pivot_rows[i], mu);
            b[cert.pivot_cols[j]] = -s;
        }
        basis.push_back(std::move(b));
    }
    return basis;
}

} // namespace presym
