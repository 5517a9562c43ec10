#ifndef RATELAB_LINALG_HPP
#define RATELAB_LINALG_HPP

#include <cstddef>
#include <vector>

namespace ratelab {

// Dense square matrix, row-major. Dimensions here are the observable
// dimension N, typically 1 or 2.
class Matrix {
public:
    Matrix() = default;
    explicit Matrix(int n) : n_(n), a_(static_cast<std::size_t>(n) * n, 0.0) {}

    static Matrix identity(int n) {
        Matrix m(n);
        for (int i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }

    int dim() const { return n_; }
    double& operator()(int i, int j) { return a_[static_cast<std::size_t>(i) * n_ + j]; }
    double operator()(int i, int j) const { return a_[static_cast<std::size_t>(i) * n_ + j]; }
    const std::vector<double>& data() const { return a_; }
    std::vector<double>& data() { return a_; }

    Matrix transposed() const;
    Matrix symmetrized() const;  // (A + A^T)/2
    double max_abs() const;
    double max_abs_diff(const Matrix& other) const;

private:
    int n_ = 0;
    std::vector<double> a_;
};

struct SymmetricEigen {
    std::vector<double> values;  // ascending
    Matrix vectors;              // columns are eigenvectors
};

// Eigendecomposition of the symmetrized input.
SymmetricEigen symmetric_eigen(const Matrix& m);

// Symmetrize and clamp negative eigenvalues at zero. Returns the repaired
// matrix; `changed` receives the max-abs entry difference vs the input.
Matrix clamp_psd(const Matrix& m, double* changed = nullptr);

// B with B B^T = psd matrix, via spectral decomposition (handles singular
// matrices without jitter).
Matrix psd_square_root(const Matrix& m);

}  // namespace ratelab

#endif
