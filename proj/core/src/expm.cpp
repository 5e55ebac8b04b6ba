#include <cmath>

#include "corp/errors.hpp"
#include "corp/linalg.hpp"

namespace corp {

namespace {

// Pade(13) coefficients and the 1-norm bound up to which no scaling is needed
// (Higham, "The scaling and squaring method for the matrix exponential revisited").
constexpr double kPade13[] = {64764752532480000.0, 32382376266240000.0, 7771770303897600.0,
                              1187353796428800.0,  129060195264000.0,   10559470521600.0,
                              670442572800.0,      33522128640.0,       1323241920.0,
                              40840800.0,          960960.0,            16380.0,
                              182.0,               1.0};
constexpr double kTheta13 = 5.371920351148152;

}  // namespace

Mat mat_exp(const Mat& a, double t) {
    if (!a.is_square()) throw DimensionError("mat_exp: matrix must be square");
    if (!std::isfinite(t)) throw InvalidArgument("mat_exp: time must be finite");
    const std::size_t n = a.rows();
    if (n == 0) return {};

    Mat x = a * t;
    const double norm = x.norm_1();
    int squarings = 0;
    if (norm > kTheta13) {
        squarings = static_cast<int>(std::ceil(std::log2(norm / kTheta13)));
        x *= std::ldexp(1.0, -squarings);
    }

    const Mat id = Mat::identity(n);
    const Mat x2 = x * x;
    const Mat x4 = x2 * x2;
    const Mat x6 = x4 * x2;
    const double* b = kPade13;

    Mat u_inner = x6 * (b[13] * x6 + b[11] * x4 + b[9] * x2) + b[7] * x6 + b[5] * x4 + b[3] * x2 + b[1] * id;
    Mat u = x * u_inner;
    Mat v = x6 * (b[12] * x6 + b[10] * x4 + b[8] * x2) + b[6] * x6 + b[4] * x4 + b[2] * x2 + b[0] * id;

    Mat r = solve(v - u, v + u);
    for (int k = 0; k < squarings; ++k) r = r * r;
    return r;
}

Mat exp_convolution(const Mat& f, const Mat& g, const Mat& s, double h) {
    if (!f.is_square() || !s.is_square() || g.rows() != f.rows() || g.cols() != s.rows()) {
        throw DimensionError("exp_convolution: need F n x n, G n x s, S s x s");
    }
    if (!(h > 0.0)) throw InvalidArgument("exp_convolution: h must be positive");
    const std::size_t n = f.rows();
    const std::size_t q = s.rows();
    Mat aug(n + q, n + q);
    aug.set_block(0, 0, f);
    aug.set_block(0, n, g);
    aug.set_block(n, n, s);
    return mat_exp(aug, h).block(0, n, n, q);
}

}  // namespace corp
