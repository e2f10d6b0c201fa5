#pragma once

#include <cstddef>
#include <vector>

namespace stelab {

using Vec = std::vector<double>;

double dot(const Vec& a, const Vec& b);
double norm(const Vec& a);
double sum(const Vec& a);  // 1'x
Vec add(const Vec& a, const Vec& b);
Vec sub(const Vec& a, const Vec& b);
Vec scaled(const Vec& a, double s);
void axpy(double a, const Vec& x, Vec& y);  // y += a*x
bool all_finite(const Vec& a);
bool is_zero(const Vec& a);

/// Unit vector in the direction of a. Throws std::domain_error on a zero vector.
Vec unit(const Vec& a);

/// Component of b orthogonal to a, i.e. (I - aa'/|a|^2) b.
Vec reject(const Vec& b, const Vec& a);

/// Eigenvalues of a symmetric n x n matrix (row-major), ascending.
/// Cyclic Jacobi sweeps; intended for the small dense matrices used here.
std::vector<double> symmetric_eigenvalues(std::vector<double> a, std::size_t n);

}  // namespace stelab
