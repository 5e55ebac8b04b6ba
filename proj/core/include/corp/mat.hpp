#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace corp {

using Vec = std::vector<double>;

/// Dense real matrix, row-major. Entries are checked finite on construction.
class Mat {
public:
    Mat() = default;
    Mat(std::size_t rows, std::size_t cols, double fill = 0.0);
    Mat(std::size_t rows, std::size_t cols, std::vector<double> row_major);
    Mat(std::initializer_list<std::initializer_list<double>> rows);

    static Mat identity(std::size_t n);
    static Mat zeros(std::size_t rows, std::size_t cols) { return Mat(rows, cols); }
    static Mat column(std::span<const double> v);
    static Mat row(std::span<const double> v);
    static Mat diagonal(std::span<const double> d);

    [[nodiscard]] std::size_t rows() const noexcept { return rows_; }
    [[nodiscard]] std::size_t cols() const noexcept { return cols_; }
    [[nodiscard]] std::size_t size() const noexcept { return data_.size(); }
    [[nodiscard]] bool empty() const noexcept { return data_.empty(); }
    [[nodiscard]] bool is_square() const noexcept { return rows_ == cols_; }

    double& operator()(std::size_t i, std::size_t j) noexcept { return data_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const noexcept { return data_[i * cols_ + j]; }

    [[nodiscard]] std::span<const double> data() const noexcept { return data_; }
    [[nodiscard]] std::span<double> data() noexcept { return data_; }

    [[nodiscard]] Mat transpose() const;
    [[nodiscard]] Mat block(std::size_t r0, std::size_t c0, std::size_t nr, std::size_t nc) const;
    void set_block(std::size_t r0, std::size_t c0, const Mat& b);

    /// Max absolute row sum.
    [[nodiscard]] double norm_inf() const noexcept;
    /// Max absolute column sum.
    [[nodiscard]] double norm_1() const noexcept;
    [[nodiscard]] double max_abs() const noexcept;
    [[nodiscard]] bool all_finite() const noexcept;

    Mat& operator+=(const Mat& o);
    Mat& operator-=(const Mat& o);
    Mat& operator*=(double s) noexcept;

    friend bool operator==(const Mat&, const Mat&) = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

Mat operator+(Mat a, const Mat& b);
Mat operator-(Mat a, const Mat& b);
Mat operator-(Mat a);
Mat operator*(const Mat& a, const Mat& b);
Mat operator*(Mat a, double s);
Mat operator*(double s, Mat a);
Vec operator*(const Mat& a, std::span<const double> v);

/// Stack blocks row-wise; every row of blocks must agree in height and total width.
Mat assemble(std::initializer_list<std::initializer_list<Mat>> blocks);

double norm_inf(std::span<const double> v) noexcept;
double norm_2(std::span<const double> v) noexcept;

/// Parse `0,1,0; 0,0,1; -1,2,3` into a matrix. Throws InvalidArgument.
Mat parse_mat(std::string_view text);
/// Inverse of parse_mat using 17 significant digits, so values round-trip.
std::string format_mat(const Mat& m);
std::string format_double(double v);

}  // namespace corp
