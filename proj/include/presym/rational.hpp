#pragma once

#include <boost/multiprecision/cpp_int.hpp>
#include <boost/multiprecision/cpp_bin_float.hpp>

namespace presym {

/// Exact rational scalar used for every literal in the kernel.
using Rational = boost::multiprecision::cpp_rational;
using Integer = boost::multiprecision::cpp_int;

/// Shared high-precision backend for numeric spot checks (exp atoms etc.).
using Real = boost::multiprecision::cpp_bin_float_50;

inline Real to_real(const Rational& r) { return Real(r); }

} // namespace presym
