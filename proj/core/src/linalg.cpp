#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "corp/errors.hpp"
#include "corp/linalg.hpp"

namespace corp {

namespace {

class Lu {
public:
    explicit Lu(const Mat& a) : lu_(a), perm_(a.rows()) {
        if (!a.is_square()) throw DimensionError("solve: matrix must be square");
        const std::size_t n = a.rows();
        std::iota(perm_.begin(), perm_.end(), std::size_t{0});
        const double scale = a.max_abs();
        const double tiny = static_cast<double>(std::max<std::size_t>(n, 1)) *
                            std::numeric_limits<double>::epsilon() * scale;
        for (std::size_t k = 0; k < n; ++k) {
            std::size_t piv = k;
            for (std::size_t i = k + 1; i < n; ++i)
                if (std::abs(lu_(i, k)) > std::abs(lu_(piv, k))) piv = i;
            if (std::abs(lu_(piv, k)) <= tiny) throw SingularEquation("solve: matrix is singular to working precision");
            if (piv != k) {
                for (std::size_t j = 0; j < n; ++j) std::swap(lu_(k, j), lu_(piv, j));
                std::swap(perm_[k], perm_[piv]);
            }
            for (std::size_t i = k + 1; i < n; ++i) {
                const double f = lu_(i, k) /= lu_(k, k);
                if (f == 0.0) continue;
                for (std::size_t j = k + 1; j < n; ++j) lu_(i, j) -= f * lu_(k, j);
            }
        }
    }

    [[nodiscard]] Mat solve(const Mat& b) const {
        const std::size_t n = lu_.rows();
        if (b.rows() != n) throw DimensionError("solve: right-hand side has wrong row count");
        Mat x(n, b.cols());
        for (std::size_t c = 0; c < b.cols(); ++c) {
            Vec y(n);
            for (std::size_t i = 0; i < n; ++i) {
                double s = b(perm_[i], c);
                for (std::size_t j = 0; j < i; ++j) s -= lu_(i, j) * y[j];
                y[i] = s;
            }
            for (std::size_t ii = n; ii-- > 0;) {
                double s = y[ii];
                for (std::size_t j = ii + 1; j < n; ++j) s -= lu_(ii, j) * x(j, c);
                x(ii, c) = s / lu_(ii, ii);
            }
        }
        return x;
    }

private:
    Mat lu_;
    std::vector<std::size_t> perm_;
};

std::string format_complex(std::complex<double> z) {
    std::ostringstream os;
    os.precision(6);
    os << z.real() << (z.imag() < 0 ? "-" : "+") << std::abs(z.imag()) << "i";
    return os.str();
}

struct ClosestPair {
    std::complex<double> a;
    std::complex<double> b;
    double distance = HUGE_VAL;
};

ClosestPair closest_pair(const Spectrum& x, const Spectrum& y) {
    ClosestPair best;
    for (const auto& ex : x.values) {
        for (const auto& ey : y.values) {
            const double d = std::abs(ex.value - ey.value);
            if (d < best.distance) best = {ex.value, ey.value, d};
        }
    }
    return best;
}

// Solve K vec(X) = vec(R) and refine until the caller's residual target is met.
template <class ResidualFn>
Mat solve_vectorized(const Mat& k, const Mat& rhs, std::size_t rows, std::size_t cols, double target,
                     ResidualFn residual, const char* name) {
    const Lu lu(k);
    Mat x = unvec(lu.solve(Mat::column(vec(rhs))).data(), rows, cols);
    Mat r = residual(x);
    for (int pass = 0; pass < 3 && r.max_abs() > 0.25 * target; ++pass) {
        x += unvec(lu.solve(Mat::column(vec(r))).data(), rows, cols);
        r = residual(x);
    }
    if (r.norm_inf() > target) {
        throw NumericalFailure(std::string(name) + ": residual above tolerance", r.norm_inf());
    }
    return x;
}

}  // namespace

Mat kron(const Mat& a, const Mat& b) {
    Mat out(a.rows() * b.rows(), a.cols() * b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) {
            const double aij = a(i, j);
            for (std::size_t k = 0; k < b.rows(); ++k)
                for (std::size_t l = 0; l < b.cols(); ++l) out(i * b.rows() + k, j * b.cols() + l) = aij * b(k, l);
        }
    return out;
}

Mat solve(const Mat& a, const Mat& b) { return Lu(a).solve(b); }

Mat inverse(const Mat& a) { return solve(a, Mat::identity(a.rows())); }

Vec vec(const Mat& a) {
    Vec v;
    v.reserve(a.size());
    for (std::size_t j = 0; j < a.cols(); ++j)
        for (std::size_t i = 0; i < a.rows(); ++i) v.push_back(a(i, j));
    return v;
}

Mat unvec(std::span<const double> v, std::size_t rows, std::size_t cols) {
    if (v.size() != rows * cols) throw DimensionError("unvec: length mismatch");
    Mat m(rows, cols);
    for (std::size_t j = 0; j < cols; ++j)
        for (std::size_t i = 0; i < rows; ++i) m(i, j) = v[j * rows + i];
    return m;
}

Mat solve_sylvester(const Mat& a, const Mat& s, const Mat& p) {
    if (!a.is_square() || !s.is_square() || p.rows() != a.rows() || p.cols() != s.rows()) {
        throw DimensionError("solve_sylvester: need A n x n, S q x q, P n x q");
    }
    const std::size_t n = a.rows();
    const std::size_t q = s.rows();
    const auto pair = closest_pair(eigenvalues(a), eigenvalues(s));
    const double scale = std::max({1.0, a.norm_inf(), s.norm_inf()});
    if (pair.distance <= 1e-9 * scale) {
        throw SingularEquation("solve_sylvester: A and S share eigenvalue " + format_complex(pair.a));
    }
    const Mat k = kron(s.transpose(), Mat::identity(n)) - kron(Mat::identity(q), a);
    const double target = 1e-10 * (1.0 + p.norm_inf());
    return solve_vectorized(
        k, p, n, q, target, [&](const Mat& x) { return p - (x * s - a * x); }, "solve_sylvester");
}

Mat solve_discrete_sylvester(const Mat& m, const Mat& j, const Mat& n) {
    if (!m.is_square() || !j.is_square() || n.rows() != m.rows() || n.cols() != j.rows()) {
        throw DimensionError("solve_discrete_sylvester: need M n x n, J q x q, N n x q");
    }
    const std::size_t rows = m.rows();
    const std::size_t cols = j.rows();
    const auto pair = closest_pair(eigenvalues(m), eigenvalues(j));
    const double scale = std::max({1.0, m.norm_inf(), j.norm_inf()});
    if (pair.distance <= 1e-9 * scale) {
        throw SingularEquation("solve_discrete_sylvester: eigenvalue " + format_complex(pair.a) + " of M meets " +
                               format_complex(pair.b) + " of J");
    }
    const Mat k = kron(j.transpose(), Mat::identity(rows)) - kron(Mat::identity(cols), m);
    const double target = 1e-10 * (1.0 + n.norm_inf());
    return solve_vectorized(
        k, n, rows, cols, target, [&](const Mat& x) { return n - (x * j - m * x); }, "solve_discrete_sylvester");
}

}  // namespace corp
