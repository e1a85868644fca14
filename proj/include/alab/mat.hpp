#pragma once

#include <cassert>
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace alab {

// Dense row-major matrix of doubles. Small and allocation-friendly; all the
// networks in this project are tiny, so there is no BLAS behind this.
struct Mat {
    int rows = 0;
    int cols = 0;
    std::vector<double> a;

    Mat() = default;
    Mat(int r, int c, double fill = 0.0) : rows(r), cols(c), a(static_cast<size_t>(r) * c, fill) {}

    double& operator()(int r, int c) { return a[static_cast<size_t>(r) * cols + c]; }
    double operator()(int r, int c) const { return a[static_cast<size_t>(r) * cols + c]; }

    std::span<double> row(int r) { return {a.data() + static_cast<size_t>(r) * cols, static_cast<size_t>(cols)}; }
    std::span<const double> row(int r) const {
        return {a.data() + static_cast<size_t>(r) * cols, static_cast<size_t>(cols)};
    }

    bool same_shape(const Mat& o) const { return rows == o.rows && cols == o.cols; }

    // Copy with row r replaced by v (length cols).
    Mat with_row(int r, std::span<const double> v) const {
        assert(r >= 0 && r < rows && static_cast<int>(v.size()) == cols);
        Mat out = *this;
        for (int c = 0; c < cols; ++c) out(r, c) = v[c];
        return out;
    }
};

inline bool operator==(const Mat& x, const Mat& y) {
    return x.rows == y.rows && x.cols == y.cols && x.a == y.a;
}

inline double dot(std::span<const double> x, std::span<const double> y) {
    assert(x.size() == y.size());
    double s = 0.0;
    for (size_t i = 0; i < x.size(); ++i) s += x[i] * y[i];
    return s;
}

inline bool all_finite(std::span<const double> x) {
    for (double v : x)
        if (!std::isfinite(v)) return false;
    return true;
}

inline bool all_finite(const Mat& m) { return all_finite(std::span<const double>(m.a)); }

}  // namespace alab
