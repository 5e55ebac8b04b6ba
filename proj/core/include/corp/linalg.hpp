#pragma once

#include <complex>
#include <vector>

#include "corp/mat.hpp"

namespace corp {

struct Eigenvalue {
    std::complex<double> value;
    double modulus = 0.0;
};

/// All eigenvalues of a square matrix, with multiplicity.
struct Spectrum {
    std::vector<Eigenvalue> values;

    [[nodiscard]] std::size_t size() const noexcept { return values.size(); }
    [[nodiscard]] std::vector<std::complex<double>> complex_values() const;
    [[nodiscard]] double max_modulus() const noexcept;
    [[nodiscard]] double min_real() const noexcept;
    [[nodiscard]] double max_real() const noexcept;
};

/// exp(A t) by scaling and squaring with a degree-13 Pade approximant.
Mat mat_exp(const Mat& a, double t = 1.0);

/// Integral over [0, h] of exp(F (h - s)) G exp(S s) ds, via the exponential of
/// the block matrix [[F, G], [0, S]] h. With S = 0 this is the ZOH input matrix.
Mat exp_convolution(const Mat& f, const Mat& g, const Mat& s, double h);

/// Eigenvalues by balancing, Householder Hessenberg reduction and Francis
/// double-shift QR. Throws NumericalFailure after 100 n iterations.
Spectrum eigenvalues(const Mat& a);

/// Eigenvalues of a symmetric matrix (cyclic Jacobi), ascending.
std::vector<double> symmetric_eigenvalues(const Mat& a);

/// Singular values, descending (one-sided Jacobi).
std::vector<double> singular_values(const Mat& a);

double spectral_radius(const Mat& a);

/// Largest singular value as sqrt(lambda_max(A^T A)).
double sigma_max(const Mat& a);

/// Numerical rank: count of singular values above rel_tol * sigma_max.
std::size_t rank(const Mat& a, double rel_tol = 1e-9);

/// Rank of the complex matrix re + i im, through its real 2x2 block embedding.
std::size_t complex_rank(const Mat& re, const Mat& im, double rel_tol = 1e-9);

Mat kron(const Mat& a, const Mat& b);

/// Solve A X = B by LU with partial pivoting. Throws SingularEquation.
Mat solve(const Mat& a, const Mat& b);
Mat inverse(const Mat& a);

/// Unique X with X S - A X = P (continuous-time Sylvester form). Dense Kronecker
/// vectorization, O((nq)^3), intended for small systems only.
Mat solve_sylvester(const Mat& a, const Mat& s, const Mat& p);

/// Unique X with M X - X J + N = 0. Throws SingularEquation naming the closest
/// eigenvalue pair when sigma(M) and sigma(J) overlap.
Mat solve_discrete_sylvester(const Mat& m, const Mat& j, const Mat& n);

/// Stack columns (column-major vec operator) and its inverse.
Vec vec(const Mat& a);
Mat unvec(std::span<const double> v, std::size_t rows, std::size_t cols);

}  // namespace corp
