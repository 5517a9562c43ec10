#include "ratelab/linalg.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>

namespace ratelab {

Matrix Matrix::transposed() const {
    Matrix t(n_);
    for (int i = 0; i < n_; ++i)
        for (int j = 0; j < n_; ++j) t(j, i) = (*this)(i, j);
    return t;
}

Matrix Matrix::symmetrized() const {
    Matrix s(n_);
    for (int i = 0; i < n_; ++i)
        for (int j = 0; j < n_; ++j) s(i, j) = 0.5 * ((*this)(i, j) + (*this)(j, i));
    return s;
}

double Matrix::max_abs() const {
    double m = 0.0;
    for (double x : a_) m = std::max(m, std::fabs(x));
    return m;
}

double Matrix::max_abs_diff(const Matrix& other) const {
    double m = 0.0;
    for (std::size_t i = 0; i < a_.size(); ++i)
        m = std::max(m, std::fabs(a_[i] - other.a_[i]));
    return m;
}

static Eigen::MatrixXd to_eigen(const Matrix& m) {
    const int n = m.dim();
    Eigen::MatrixXd e(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) e(i, j) = m(i, j);
    return e;
}

SymmetricEigen symmetric_eigen(const Matrix& m) {
    const int n = m.dim();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(to_eigen(m.symmetrized()));
    SymmetricEigen out;
    out.values.resize(n);
    out.vectors = Matrix(n);
    for (int i = 0; i < n; ++i) {
        out.values[i] = solver.eigenvalues()(i);
        for (int j = 0; j < n; ++j) out.vectors(j, i) = solver.eigenvectors()(j, i);
    }
    return out;
}

Matrix clamp_psd(const Matrix& m, double* changed) {
    const int n = m.dim();
    SymmetricEigen eg = symmetric_eigen(m);
    Matrix out(n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            double s = 0.0;
            for (int k = 0; k < n; ++k) {
                const double lam = std::max(eg.values[k], 0.0);
                s += eg.vectors(i, k) * lam * eg.vectors(j, k);
            }
            out(i, j) = s;
        }
    if (changed) *changed = out.max_abs_diff(m);
    return out;
}

Matrix psd_square_root(const Matrix& m) {
    const int n = m.dim();
    SymmetricEigen eg = symmetric_eigen(m);
    Matrix out(n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            const double lam = std::max(eg.values[j], 0.0);
            out(i, j) = eg.vectors(i, j) * std::sqrt(lam);
        }
    return out;
}

}  // namespace ratelab
