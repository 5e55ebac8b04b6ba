#include <algorithm>
#include <cmath>
#include <numeric>

#include "corp/errors.hpp"
#include "corp/linalg.hpp"

namespace corp {

namespace {

double sign_of(double mag, double s) { return s >= 0.0 ? std::abs(mag) : -std::abs(mag); }

// Diagonal similarity by powers of two so row and column norms are comparable.
void balance(Mat& a) {
    constexpr double radix = 2.0;
    constexpr double sqrdx = radix * radix;
    const std::size_t n = a.rows();
    bool done = false;
    while (!done) {
        done = true;
        for (std::size_t i = 0; i < n; ++i) {
            double r = 0.0;
            double c = 0.0;
            for (std::size_t j = 0; j < n; ++j) {
                if (j == i) continue;
                c += std::abs(a(j, i));
                r += std::abs(a(i, j));
            }
            if (c == 0.0 || r == 0.0) continue;
            double g = r / radix;
            double f = 1.0;
            const double s = c + r;
            while (c < g) {
                f *= radix;
                c *= sqrdx;
            }
            g = r * radix;
            while (c > g) {
                f /= radix;
                c /= sqrdx;
            }
            if ((c + r) / f < 0.95 * s) {
                done = false;
                g = 1.0 / f;
                for (std::size_t j = 0; j < n; ++j) a(i, j) *= g;
                for (std::size_t j = 0; j < n; ++j) a(j, i) *= f;
            }
        }
    }
}

// Householder reduction to upper Hessenberg form, in place.
void hessenberg(Mat& a) {
    const std::size_t n = a.rows();
    if (n < 3) return;
    Vec v(n);
    for (std::size_t k = 0; k + 2 < n; ++k) {
        double norm = 0.0;
        for (std::size_t i = k + 1; i < n; ++i) norm += a(i, k) * a(i, k);
        norm = std::sqrt(norm);
        if (norm == 0.0) continue;
        const double alpha = -sign_of(norm, a(k + 1, k));
        double vnorm = 0.0;
        for (std::size_t i = k + 1; i < n; ++i) {
            v[i] = a(i, k);
            if (i == k + 1) v[i] -= alpha;
            vnorm += v[i] * v[i];
        }
        if (vnorm == 0.0) continue;
        vnorm = std::sqrt(vnorm);
        for (std::size_t i = k + 1; i < n; ++i) v[i] /= vnorm;

        for (std::size_t j = 0; j < n; ++j) {
            double s = 0.0;
            for (std::size_t i = k + 1; i < n; ++i) s += v[i] * a(i, j);
            for (std::size_t i = k + 1; i < n; ++i) a(i, j) -= 2.0 * v[i] * s;
        }
        for (std::size_t i = 0; i < n; ++i) {
            double s = 0.0;
            for (std::size_t j = k + 1; j < n; ++j) s += a(i, j) * v[j];
            for (std::size_t j = k + 1; j < n; ++j) a(i, j) -= 2.0 * s * v[j];
        }
        for (std::size_t i = k + 2; i < n; ++i) a(i, k) = 0.0;
    }
}

// Francis double-shift QR on an upper Hessenberg matrix (EISPACK hqr lineage).
void hessenberg_qr(Mat& a, std::vector<std::complex<double>>& out) {
    const int n = static_cast<int>(a.rows());
    const int max_iterations = 100 * n;
    int total_iterations = 0;
    out.assign(static_cast<std::size_t>(n), {});

    double anorm = 0.0;
    for (int i = 0; i < n; ++i)
        for (int j = std::max(i - 1, 0); j < n; ++j) anorm += std::abs(a(i, j));

    int nn = n - 1;
    double t = 0.0;
    while (nn >= 0) {
        int its = 0;
        int l = 0;
        do {
            for (l = nn; l >= 1; --l) {
                double s = std::abs(a(l - 1, l - 1)) + std::abs(a(l, l));
                if (s == 0.0) s = anorm;
                if (std::abs(a(l, l - 1)) + s == s) {
                    a(l, l - 1) = 0.0;
                    break;
                }
            }
            double x = a(nn, nn);
            if (l == nn) {
                out[nn] = {x + t, 0.0};
                --nn;
            } else {
                double y = a(nn - 1, nn - 1);
                double w = a(nn, nn - 1) * a(nn - 1, nn);
                if (l == nn - 1) {
                    const double p = 0.5 * (y - x);
                    const double q = p * p + w;
                    double z = std::sqrt(std::abs(q));
                    x += t;
                    if (q >= 0.0) {
                        z = p + sign_of(z, p);
                        out[nn - 1] = {x + z, 0.0};
                        out[nn] = {z != 0.0 ? x - w / z : x + z, 0.0};
                    } else {
                        out[nn - 1] = {x + p, z};
                        out[nn] = {x + p, -z};
                    }
                    nn -= 2;
                } else {
                    if (total_iterations >= max_iterations) {
                        throw NumericalFailure("eigenvalues: QR iteration did not converge",
                                               std::abs(a(nn, nn - 1)));
                    }
                    if (its > 0 && its % 10 == 0) {
                        // exceptional shift
                        t += x;
                        for (int i = 0; i <= nn; ++i) a(i, i) -= x;
                        const double s = std::abs(a(nn, nn - 1)) + std::abs(a(nn - 1, nn - 2));
                        y = x = 0.75 * s;
                        w = -0.4375 * s * s;
                    }
                    ++its;
                    ++total_iterations;
                    int m = nn - 2;
                    double p = 0.0, q = 0.0, r = 0.0, z = 0.0;
                    for (; m >= l; --m) {
                        z = a(m, m);
                        r = x - z;
                        double s = y - z;
                        p = (r * s - w) / a(m + 1, m) + a(m, m + 1);
                        q = a(m + 1, m + 1) - z - r - s;
                        r = a(m + 2, m + 1);
                        s = std::abs(p) + std::abs(q) + std::abs(r);
                        p /= s;
                        q /= s;
                        r /= s;
                        if (m == l) break;
                        const double u = std::abs(a(m, m - 1)) * (std::abs(q) + std::abs(r));
                        const double v =
                            std::abs(p) * (std::abs(a(m - 1, m - 1)) + std::abs(z) + std::abs(a(m + 1, m + 1)));
                        if (u + v == v) break;
                    }
                    for (int i = m + 2; i <= nn; ++i) {
                        a(i, i - 2) = 0.0;
                        if (i != m + 2) a(i, i - 3) = 0.0;
                    }
                    for (int k = m; k <= nn - 1; ++k) {
                        if (k != m) {
                            p = a(k, k - 1);
                            q = a(k + 1, k - 1);
                            r = 0.0;
                            if (k != nn - 1) r = a(k + 2, k - 1);
                            x = std::abs(p) + std::abs(q) + std::abs(r);
                            if (x != 0.0) {
                                p /= x;
                                q /= x;
                                r /= x;
                            }
                        }
                        const double s = sign_of(std::sqrt(p * p + q * q + r * r), p);
                        if (s == 0.0) continue;
                        if (k == m) {
                            if (l != m) a(k, k - 1) = -a(k, k - 1);
                        } else {
                            a(k, k - 1) = -s * x;
                        }
                        p += s;
                        x = p / s;
                        y = q / s;
                        z = r / s;
                        q /= p;
                        r /= p;
                        for (int j = k; j <= nn; ++j) {
                            p = a(k, j) + q * a(k + 1, j);
                            if (k != nn - 1) {
                                p += r * a(k + 2, j);
                                a(k + 2, j) -= p * z;
                            }
                            a(k + 1, j) -= p * y;
                            a(k, j) -= p * x;
                        }
                        const int mmin = nn < k + 3 ? nn : k + 3;
                        for (int i = l; i <= mmin; ++i) {
                            p = x * a(i, k) + y * a(i, k + 1);
                            if (k != nn - 1) {
                                p += z * a(i, k + 2);
                                a(i, k + 2) -= p * r;
                            }
                            a(i, k + 1) -= p * q;
                            a(i, k) -= p;
                        }
                    }
                }
            }
        } while (l < nn - 1);
    }
}

}  // namespace

std::vector<std::complex<double>> Spectrum::complex_values() const {
    std::vector<std::complex<double>> out;
    out.reserve(values.size());
    for (const auto& e : values) out.push_back(e.value);
    return out;
}

double Spectrum::max_modulus() const noexcept {
    double best = 0.0;
    for (const auto& e : values) best = std::max(best, e.modulus);
    return best;
}

double Spectrum::min_real() const noexcept {
    double best = HUGE_VAL;
    for (const auto& e : values) best = std::min(best, e.value.real());
    return best;
}

double Spectrum::max_real() const noexcept {
    double best = -HUGE_VAL;
    for (const auto& e : values) best = std::max(best, e.value.real());
    return best;
}

Spectrum eigenvalues(const Mat& a) {
    if (!a.is_square()) throw DimensionError("eigenvalues: matrix must be square");
    Mat work = a;
    balance(work);
    hessenberg(work);
    std::vector<std::complex<double>> values;
    hessenberg_qr(work, values);
    Spectrum spec;
    spec.values.reserve(values.size());
    for (const auto& v : values) spec.values.push_back({v, std::abs(v)});
    return spec;
}

std::vector<double> symmetric_eigenvalues(const Mat& a) {
    if (!a.is_square()) throw DimensionError("symmetric_eigenvalues: matrix must be square");
    const std::size_t n = a.rows();
    Mat m = a;
    const double scale = std::max(m.max_abs(), 1e-300);
    for (int sweep = 0; sweep < 100; ++sweep) {
        double off = 0.0;
        for (std::size_t p = 0; p < n; ++p)
            for (std::size_t q = p + 1; q < n; ++q) off += m(p, q) * m(p, q);
        if (std::sqrt(off) <= 1e-17 * scale) break;
        for (std::size_t p = 0; p < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                if (m(p, q) == 0.0) continue;
                const double theta = (m(q, q) - m(p, p)) / (2.0 * m(p, q));
                const double t = sign_of(1.0, theta) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (std::size_t k = 0; k < n; ++k) {
                    const double mkp = m(k, p);
                    const double mkq = m(k, q);
                    m(k, p) = c * mkp - s * mkq;
                    m(k, q) = s * mkp + c * mkq;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double mpk = m(p, k);
                    const double mqk = m(q, k);
                    m(p, k) = c * mpk - s * mqk;
                    m(q, k) = s * mpk + c * mqk;
                }
            }
        }
    }
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = m(i, i);
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<double> singular_values(const Mat& a) {
    Mat u = a.rows() >= a.cols() ? a : a.transpose();
    const std::size_t m = u.rows();
    const std::size_t n = u.cols();
    constexpr double eps = 2.220446049250313e-16;
    for (int sweep = 0; sweep < 80; ++sweep) {
        bool rotated = false;
        for (std::size_t p = 0; p < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                double alpha = 0.0, beta = 0.0, gamma = 0.0;
                for (std::size_t i = 0; i < m; ++i) {
                    alpha += u(i, p) * u(i, p);
                    beta += u(i, q) * u(i, q);
                    gamma += u(i, p) * u(i, q);
                }
                if (std::abs(gamma) <= eps * std::sqrt(alpha * beta) || gamma == 0.0) continue;
                rotated = true;
                const double zeta = (beta - alpha) / (2.0 * gamma);
                const double t = sign_of(1.0, zeta) / (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = c * t;
                for (std::size_t i = 0; i < m; ++i) {
                    const double up = u(i, p);
                    const double uq = u(i, q);
                    u(i, p) = c * up - s * uq;
                    u(i, q) = s * up + c * uq;
                }
            }
        }
        if (!rotated) break;
    }
    std::vector<double> out(n);
    for (std::size_t j = 0; j < n; ++j) {
        double s = 0.0;
        for (std::size_t i = 0; i < m; ++i) s += u(i, j) * u(i, j);
        out[j] = std::sqrt(s);
    }
    std::sort(out.begin(), out.end(), std::greater<>());
    return out;
}

double spectral_radius(const Mat& a) { return eigenvalues(a).max_modulus(); }

double sigma_max(const Mat& a) {
    if (a.empty()) return 0.0;
    const auto ev = symmetric_eigenvalues(a.transpose() * a);
    return std::sqrt(std::max(ev.back(), 0.0));
}

std::size_t rank(const Mat& a, double rel_tol) {
    if (a.empty()) return 0;
    const auto sv = singular_values(a);
    if (sv.front() == 0.0) return 0;
    const double cutoff = rel_tol * sv.front();
    return static_cast<std::size_t>(std::count_if(sv.begin(), sv.end(), [&](double s) { return s > cutoff; }));
}

std::size_t complex_rank(const Mat& re, const Mat& im, double rel_tol) {
    if (re.rows() != im.rows() || re.cols() != im.cols()) throw DimensionError("complex_rank: shape mismatch");
    // [[Re, -Im], [Im, Re]] has every singular value of Re + i Im twice.
    const Mat embed = assemble({{re, -im}, {im, re}});
    return rank(embed, rel_tol) / 2;
}

}  // namespace corp
