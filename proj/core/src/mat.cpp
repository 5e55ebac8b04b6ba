#include "corp/mat.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>

#include "corp/errors.hpp"

namespace corp {

namespace {

void require_finite(std::span<const double> v) {
    for (double x : v) {
        if (!std::isfinite(x)) throw InvalidArgument("matrix entries must be finite");
    }
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

}  // namespace

Mat::Mat(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {
    if (!std::isfinite(fill)) throw InvalidArgument("matrix entries must be finite");
}

Mat::Mat(std::size_t rows, std::size_t cols, std::vector<double> row_major)
    : rows_(rows), cols_(cols), data_(std::move(row_major)) {
    if (data_.size() != rows * cols) {
        throw DimensionError("entry count " + std::to_string(data_.size()) + " != " +
                             std::to_string(rows) + "x" + std::to_string(cols));
    }
    require_finite(data_);
}

Mat::Mat(std::initializer_list<std::initializer_list<double>> rows) {
    rows_ = rows.size();
    cols_ = rows_ ? rows.begin()->size() : 0;
    data_.reserve(rows_ * cols_);
    for (const auto& r : rows) {
        if (r.size() != cols_) throw DimensionError("ragged matrix literal");
        data_.insert(data_.end(), r.begin(), r.end());
    }
    require_finite(data_);
}

Mat Mat::identity(std::size_t n) {
    Mat m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

Mat Mat::column(std::span<const double> v) { return Mat(v.size(), 1, {v.begin(), v.end()}); }

Mat Mat::row(std::span<const double> v) { return Mat(1, v.size(), {v.begin(), v.end()}); }

Mat Mat::diagonal(std::span<const double> d) {
    Mat m(d.size(), d.size());
    for (std::size_t i = 0; i < d.size(); ++i) m(i, i) = d[i];
    require_finite(d);
    return m;
}

Mat Mat::transpose() const {
    Mat t(cols_, rows_);
    for (std::size_t i = 0; i < rows_; ++i)
        for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
    return t;
}

Mat Mat::block(std::size_t r0, std::size_t c0, std::size_t nr, std::size_t nc) const {
    if (r0 + nr > rows_ || c0 + nc > cols_) throw DimensionError("block out of range");
    Mat b(nr, nc);
    for (std::size_t i = 0; i < nr; ++i)
        for (std::size_t j = 0; j < nc; ++j) b(i, j) = (*this)(r0 + i, c0 + j);
    return b;
}

void Mat::set_block(std::size_t r0, std::size_t c0, const Mat& b) {
    if (r0 + b.rows() > rows_ || c0 + b.cols() > cols_) throw DimensionError("block out of range");
    for (std::size_t i = 0; i < b.rows(); ++i)
        for (std::size_t j = 0; j < b.cols(); ++j) (*this)(r0 + i, c0 + j) = b(i, j);
}

double Mat::norm_inf() const noexcept {
    double best = 0.0;
    for (std::size_t i = 0; i < rows_; ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < cols_; ++j) s += std::abs((*this)(i, j));
        best = std::max(best, s);
    }
    return best;
}

double Mat::norm_1() const noexcept {
    double best = 0.0;
    for (std::size_t j = 0; j < cols_; ++j) {
        double s = 0.0;
        for (std::size_t i = 0; i < rows_; ++i) s += std::abs((*this)(i, j));
        best = std::max(best, s);
    }
    return best;
}

double Mat::max_abs() const noexcept {
    double best = 0.0;
    for (double x : data_) best = std::max(best, std::abs(x));
    return best;
}

bool Mat::all_finite() const noexcept {
    return std::all_of(data_.begin(), data_.end(), [](double x) { return std::isfinite(x); });
}

Mat& Mat::operator+=(const Mat& o) {
    if (rows_ != o.rows_ || cols_ != o.cols_) throw DimensionError("matrix sum shape mismatch");
    for (std::size_t k = 0; k < data_.size(); ++k) data_[k] += o.data_[k];
    return *this;
}

Mat& Mat::operator-=(const Mat& o) {
    if (rows_ != o.rows_ || cols_ != o.cols_) throw DimensionError("matrix difference shape mismatch");
    for (std::size_t k = 0; k < data_.size(); ++k) data_[k] -= o.data_[k];
    return *this;
}

Mat& Mat::operator*=(double s) noexcept {
    for (double& x : data_) x *= s;
    return *this;
}

Mat operator+(Mat a, const Mat& b) { return a += b; }
Mat operator-(Mat a, const Mat& b) { return a -= b; }
Mat operator-(Mat a) { return a *= -1.0; }
Mat operator*(Mat a, double s) { return a *= s; }
Mat operator*(double s, Mat a) { return a *= s; }

Mat operator*(const Mat& a, const Mat& b) {
    if (a.cols() != b.rows()) {
        throw DimensionError("product of " + std::to_string(a.rows()) + "x" + std::to_string(a.cols()) +
                             " and " + std::to_string(b.rows()) + "x" + std::to_string(b.cols()));
    }
    Mat c(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        for (std::size_t k = 0; k < a.cols(); ++k) {
            const double aik = a(i, k);
            if (aik == 0.0) continue;
            for (std::size_t j = 0; j < b.cols(); ++j) c(i, j) += aik * b(k, j);
        }
    }
    return c;
}

Vec operator*(const Mat& a, std::span<const double> v) {
    if (a.cols() != v.size()) throw DimensionError("matrix-vector shape mismatch");
    Vec out(a.rows(), 0.0);
    for (std::size_t i = 0; i < a.rows(); ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < a.cols(); ++j) s += a(i, j) * v[j];
        out[i] = s;
    }
    return out;
}

Mat assemble(std::initializer_list<std::initializer_list<Mat>> blocks) {
    std::size_t total_rows = 0;
    std::size_t total_cols = 0;
    bool first = true;
    for (const auto& row : blocks) {
        std::size_t h = row.begin()->rows();
        std::size_t w = 0;
        for (const auto& b : row) {
            if (b.rows() != h) throw DimensionError("assemble: block heights differ within a row");
            w += b.cols();
        }
        if (first) {
            total_cols = w;
            first = false;
        } else if (w != total_cols) {
            throw DimensionError("assemble: block rows differ in width");
        }
        total_rows += h;
    }
    Mat out(total_rows, total_cols);
    std::size_t r = 0;
    for (const auto& row : blocks) {
        std::size_t c = 0;
        for (const auto& b : row) {
            out.set_block(r, c, b);
            c += b.cols();
        }
        r += row.begin()->rows();
    }
    return out;
}

double norm_inf(std::span<const double> v) noexcept {
    double best = 0.0;
    for (double x : v) best = std::max(best, std::abs(x));
    return best;
}

double norm_2(std::span<const double> v) noexcept {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

Mat parse_mat(std::string_view text) {
    std::vector<double> values;
    std::size_t rows = 0;
    std::size_t cols = 0;
    text = trim(text);
    if (text.empty()) throw InvalidArgument("empty matrix text");
    while (true) {
        const auto semi = text.find(';');
        std::string_view row_text = trim(text.substr(0, semi));
        std::size_t count = 0;
        while (true) {
            const auto comma = row_text.find(',');
            std::string_view cell = trim(row_text.substr(0, comma));
            if (cell.empty()) throw InvalidArgument("empty matrix entry in row " + std::to_string(rows + 1));
            if (cell.front() == '+') cell.remove_prefix(1);
            double v = 0.0;
            const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
            if (ec != std::errc() || ptr != cell.data() + cell.size()) {
                throw InvalidArgument("cannot parse matrix entry '" + std::string(cell) + "'");
            }
            values.push_back(v);
            ++count;
            if (comma == std::string_view::npos) break;
            row_text.remove_prefix(comma + 1);
        }
        if (rows == 0) {
            cols = count;
        } else if (count != cols) {
            throw InvalidArgument("row " + std::to_string(rows + 1) + " has " + std::to_string(count) +
                                  " entries, expected " + std::to_string(cols));
        }
        ++rows;
        if (semi == std::string_view::npos) break;
        text.remove_prefix(semi + 1);
        if (trim(text).empty()) break;  // tolerate a trailing ';'
    }
    return Mat(rows, cols, std::move(values));
}

std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string format_mat(const Mat& m) {
    std::string out;
    for (std::size_t i = 0; i < m.rows(); ++i) {
        if (i) out += "; ";
        for (std::size_t j = 0; j < m.cols(); ++j) {
            if (j) out += ',';
            out += format_double(m(i, j));
        }
    }
    return out;
}

}  // namespace corp
