#pragma once

#include <algorithm>
#include <complex>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace risnoma {

using Cx = std::complex<double>;

struct ShapeError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Thrown when a matrix is singular or too ill-conditioned to invert; carries
// the infinity-norm condition estimate (infinity for an exactly singular pivot).
struct SingularMatrixError : std::runtime_error {
    double condition;
    explicit SingularMatrixError(double cond)
        : std::runtime_error("matrix is singular or ill-conditioned (cond ~ " +
                             std::to_string(cond) + ")"),
          condition(cond) {}
};

// Dense row-major complex matrix. Small (<= tens of rows) by design.
class CMat {
public:
    CMat() = default;
    CMat(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), a_(rows * cols) {}
    CMat(std::size_t rows, std::size_t cols, std::vector<Cx> data)
        : rows_(rows), cols_(cols), a_(std::move(data)) {
        if (a_.size() != rows_ * cols_) throw ShapeError("CMat: data length != rows*cols");
    }

    static CMat identity(std::size_t n) {
        CMat m(n, n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

    Cx& operator()(std::size_t i, std::size_t j) { return a_[i * cols_ + j]; }
    const Cx& operator()(std::size_t i, std::size_t j) const { return a_[i * cols_ + j]; }

    const std::vector<Cx>& data() const { return a_; }
    std::vector<Cx>& data() { return a_; }

private:
    std::size_t rows_ = 0, cols_ = 0;
    std::vector<Cx> a_;
};

inline CMat matmul(const CMat& a, const CMat& b) {
    if (a.cols() != b.rows()) throw ShapeError("matmul: inner dimensions differ");
    CMat c(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        for (std::size_t k = 0; k < a.cols(); ++k) {
            const Cx aik = a(i, k);
            if (aik == Cx{}) continue;
            for (std::size_t j = 0; j < b.cols(); ++j) c(i, j) += aik * b(k, j);
        }
    }
    return c;
}

inline CMat conj_transpose(const CMat& a) {
    CMat r(a.cols(), a.rows());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) r(j, i) = std::conj(a(i, j));
    return r;
}

inline double inf_norm(const CMat& a) {
    double best = 0.0;
    for (std::size_t i = 0; i < a.rows(); ++i) {
        double row = 0.0;
        for (std::size_t j = 0; j < a.cols(); ++j) row += std::abs(a(i, j));
        if (row > best) best = row;
    }
    return best;
}

// max |a_ij - b_ij|
inline double max_abs_diff(const CMat& a, const CMat& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols())
        throw ShapeError("max_abs_diff: shapes differ");
    double best = 0.0;
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j)
            best = std::max(best, std::abs(a(i, j) - b(i, j)));
    return best;
}

// Gauss-Jordan inverse with partial pivoting. Throws SingularMatrixError when
// a pivot vanishes or the infinity-norm condition estimate exceeds cond_limit.
inline CMat invert(const CMat& a, double cond_limit = 1e12) {
    if (a.rows() != a.cols()) throw ShapeError("invert: matrix must be square");
    const std::size_t n = a.rows();
    CMat work = a;
    CMat inv = CMat::identity(n);

    for (std::size_t col = 0; col < n; ++col) {
        std::size_t pivot = col;
        double best = std::abs(work(col, col));
        for (std::size_t r = col + 1; r < n; ++r) {
            const double v = std::abs(work(r, col));
            if (v > best) {
                best = v;
                pivot = r;
            }
        }
        if (!(best > 0.0)) throw SingularMatrixError(std::numeric_limits<double>::infinity());
        if (pivot != col) {
            for (std::size_t j = 0; j < n; ++j) {
                std::swap(work(col, j), work(pivot, j));
                std::swap(inv(col, j), inv(pivot, j));
            }
        }
        const Cx d = work(col, col);
        for (std::size_t j = 0; j < n; ++j) {
            work(col, j) /= d;
            inv(col, j) /= d;
        }
        for (std::size_t r = 0; r < n; ++r) {
            if (r == col) continue;
            const Cx f = work(r, col);
            if (f == Cx{}) continue;
            for (std::size_t j = 0; j < n; ++j) {
                work(r, j) -= f * work(col, j);
                inv(r, j) -= f * inv(col, j);
            }
        }
    }

    const double cond = inf_norm(a) * inf_norm(inv);
    if (!(cond < cond_limit)) throw SingularMatrixError(cond);
    return inv;
}

}  // namespace risnoma
