#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

namespace exitlab {

// Row-major matrix; dimensions in this project are tiny (d <= 4).
struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> a;

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), a(r * c, 0.0) {}

    double& at(std::size_t i, std::size_t j) { return a[i * cols + j]; }
    double at(std::size_t i, std::size_t j) const { return a[i * cols + j]; }

    static Matrix identity(std::size_t n) {
        Matrix m(n, n);
        for (std::size_t i = 0; i < n; ++i) m.at(i, i) = 1.0;
        return m;
    }
};

inline Matrix rotation2d(double theta) {
    Matrix m(2, 2);
    m.at(0, 0) = std::cos(theta);
    m.at(0, 1) = -std::sin(theta);
    m.at(1, 0) = std::sin(theta);
    m.at(1, 1) = std::cos(theta);
    return m;
}

inline double squared_distance(std::span<const double> y, std::span<const double> c) {
    double s = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        const double d = y[i] - c[i];
        s += d * d;
    }
    return s;
}

inline double norm(std::span<const double> y) {
    double s = 0.0;
    for (double v : y) s += v * v;
    return std::sqrt(s);
}

inline double frobenius_norm(const Matrix& m) {
    double s = 0.0;
    for (double v : m.a) s += v * v;
    return std::sqrt(s);
}

// out = m * v
inline void matvec(const Matrix& m, std::span<const double> v, std::span<double> out) {
    for (std::size_t i = 0; i < m.rows; ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < m.cols; ++j) s += m.at(i, j) * v[j];
        out[i] = s;
    }
}

}  // namespace exitlab
