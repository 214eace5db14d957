#pragma once

#include <Eigen/Core>
#include <vector>

#include "presym/expr.hpp"

namespace Eigen {

template <>
struct NumTraits<presym::Expr> {
    using Real = presym::Expr;
    using NonInteger = presym::Expr;
    using Nested = presym::Expr;
    using Literal = presym::Expr;
    enum {
        IsComplex = 0,
        IsInteger = 0,
        IsSigned = 1,
        RequireInitialization = 1,
        ReadCost = 1,
        AddCost = 16,
        MulCost = 32,
    };
    static inline presym::Expr epsilon() { return presym::Expr(); }
    static inline presym::Expr dummy_precision() { return presym::Expr(); }
    static inline int digits10() { return 0; }
};

} // namespace Eigen

namespace presym {

/// Dense symbolic matrix; Eigen is the container and expression plumbing,
/// the exact eliminations below supply the field arithmetic.
using SymMatrix = Eigen::Matrix<Expr, Eigen::Dynamic, Eigen::Dynamic>;
using SymVector = Eigen::Matrix<Expr, Eigen::Dynamic, 1>;

struct RankCertificate {
    int rank = 0;
    std::vector<int> pivot_rows;
    std::vector<int> pivot_cols;
    /// Pivots that are not nonzero rational literals; each is assumed != 0.
    std::vector<Expr> side_conditions;
};

/// Generic (field-of-fractions) rank via fraction-free Bareiss elimination
/// with deterministic pivoting: prefer nonzero rational literals, then
/// smallest expression size, ties by lowest (row, col).
RankCertificate generic_rank(const SymMatrix& m);

/// Exact inverse of the square submatrix m(rows, cols).
/// Throws SingularSubmatrix if it is generically singular.
SymMatrix invert_submatrix(const SymMatrix& m,
                           const std::vector<int>& rows,
                           const std::vector<int>& cols);

/// Null-space basis with one vector per non-pivot column: component mu' of
/// b_mu is the Kronecker delta on non-pivot columns, completed on pivot
/// columns through the inverse pivot block.
std::vector<std::vector<Expr>> null_space_basis(const SymMatrix& m,
                                                const RankCertificate& cert);

} // namespace presym
