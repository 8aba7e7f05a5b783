#pragma once

#include <complex>
#include <initializer_list>
#include <vector>

namespace qmd {

using cplx = std::complex<double>;

// Structural predicates (Hermitian, unitary, PSD, trace-one) use 1e-10;
// plain floating comparisons use 1e-12. Matrices here are at most 8x8.
inline constexpr double kStructTol = 1e-10;
inline constexpr double kFloatTol = 1e-12;

// Dense complex matrix, row-major.
class CMatrix {
public:
    CMatrix() = default;
    CMatrix(int rows, int cols) : rows_(rows), cols_(cols), a_(static_cast<size_t>(rows) * cols) {}
    CMatrix(int rows, int cols, std::initializer_list<cplx> entries);

    static CMatrix identity(int n);
    static CMatrix zero(int rows, int cols) { return CMatrix(rows, cols); }

    int rows() const { return rows_; }
    int cols() const { return cols_; }

    cplx& operator()(int i, int j) { return a_[static_cast<size_t>(i) * cols_ + j]; }
    const cplx& operator()(int i, int j) const { return a_[static_cast<size_t>(i) * cols_ + j]; }

    CMatrix operator+(const CMatrix& o) const;
    CMatrix operator-(const CMatrix& o) const;
    CMatrix operator*(const CMatrix& o) const;
    CMatrix operator*(cplx s) const;
    CMatrix& operator+=(const CMatrix& o);

    CMatrix dagger() const;
    cplx trace() const;

    bool is_square() const { return rows_ == cols_; }
    bool is_finite() const;
    bool is_hermitian(double tol = kStructTol) const;
    bool is_unitary(double tol = kStructTol) const;
    double max_abs_diff(const CMatrix& o) const;
    double max_abs() const;

private:
    int rows_ = 0, cols_ = 0;
    std::vector<cplx> a_;
};

inline CMatrix operator*(cplx s, const CMatrix& m) { return m * s; }

// Complex column vector; pure states are unit-norm within 1e-12.
class CVector {
public:
    CVector() = default;
    explicit CVector(int dim) : a_(dim) {}
    CVector(std::initializer_list<cplx> entries) : a_(entries) {}

    int dim() const { return static_cast<int>(a_.size()); }
    cplx& operator[](int i) { return a_[i]; }
    const cplx& operator[](int i) const { return a_[i]; }

    double norm() const;
    CVector normalized() const;
    CMatrix outer() const; // |v><v|

private:
    std::vector<cplx> a_;
};

CVector operator*(const CMatrix& m, const CVector& v);
CVector kron(const CVector& a, const CVector& b);

CMatrix kron(const CMatrix& a, const CMatrix& b);
CMatrix commutator(const CMatrix& a, const CMatrix& b);
cplx trace(const CMatrix& a);

// Trace out all subsystems not in `keep`; dims are listed left factor first.
CMatrix partial_trace(const CMatrix& a, const std::vector<int>& dims, const std::vector<int>& keep);

// Tr[a† a]
double hs_norm_sq(const CMatrix& a);

struct EigResult {
    std::vector<double> values; // ascending
    CMatrix vectors;            // columns; a = V diag(values) V†
};

// Hermitian eigendecomposition: analytic for 2x2, cyclic Jacobi above.
EigResult hermitian_eig(const CMatrix& a);

// PSD square root via spectral decomposition; eigenvalues in (-1e-10, 0)
// are clamped to zero, anything below -1e-10 is an error.
CMatrix hermitian_sqrt(const CMatrix& a);

// exp(-i t h) for Hermitian h.
CMatrix hermitian_expm(const CMatrix& h, double t);

} // namespace qmd
