#include "qmd/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace qmd {

CMatrix::CMatrix(int rows, int cols, std::initializer_list<cplx> entries)
    : rows_(rows), cols_(cols), a_(entries) {
    if (static_cast<int>(a_.size()) != rows * cols)
        throw std::invalid_argument("CMatrix: initializer size does not match dimensions");
}

CMatrix CMatrix::identity(int n) {
    CMatrix m(n, n);
    for (int i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

CMatrix CMatrix::operator+(const CMatrix& o) const {
    if (rows_ != o.rows_ || cols_ != o.cols_) throw std::invalid_argument("matrix add: dimension mismatch");
    CMatrix r(rows_, cols_);
    for (size_t i = 0; i < a_.size(); ++i) r.a_[i] = a_[i] + o.a_[i];
    return r;
}

CMatrix CMatrix::operator-(const CMatrix& o) const {
    if (rows_ != o.rows_ || cols_ != o.cols_) throw std::invalid_argument("matrix sub: dimension mismatch");
    CMatrix r(rows_, cols_);
    for (size_t i = 0; i < a_.size(); ++i) r.a_[i] = a_[i] - o.a_[i];
    return r;
}

CMatrix CMatrix::operator*(const CMatrix& o) const {
    if (cols_ != o.rows_) throw std::invalid_argument("matrix mul: dimension mismatch");
    CMatrix r(rows_, o.cols_);
    for (int i = 0; i < rows_; ++i)
        for (int k = 0; k < cols_; ++k) {
            const cplx aik = (*this)(i, k);
            if (aik == 0.0) continue;
            for (int j = 0; j < o.cols_; ++j) r(i, j) += aik * o(k, j);
        }
    return r;
}

CMatrix CMatrix::operator*(cplx s) const {
    CMatrix r(rows_, cols_);
    for (size_t i = 0; i < a_.size(); ++i) r.a_[i] = a_[i] * s;
    return r;
}

CMatrix& CMatrix::operator+=(const CMatrix& o) {
    if (rows_ != o.rows_ || cols_ != o.cols_) throw std::invalid_argument("matrix add: dimension mismatch");
    for (size_t i = 0; i < a_.size(); ++i) a_[i] += o.a_[i];
    return *this;
}

CMatrix CMatrix::dagger() const {
    CMatrix r(cols_, rows_);
    for (int i = 0; i < rows_; ++i)
        for (int j = 0; j < cols_; ++j) r(j, i) = std::conj((*this)(i, j));
    return r;
}

cplx CMatrix::trace() const {
    if (!is_square()) throw std::invalid_argument("trace: matrix not square");
    cplx t = 0.0;
    for (int i = 0; i < rows_; ++i) t += (*this)(i, i);
    return t;
}

bool CMatrix::is_finite() const {
    return std::all_of(a_.begin(), a_.end(),
                       [](const cplx& z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); });
}

bool CMatrix::is_hermitian(double tol) const {
    if (!is_square()) return false;
    for (int i = 0; i < rows_; ++i)
        for (int j = i; j < cols_; ++j)
            if (std::abs((*this)(i, j) - std::conj((*this)(j, i))) > tol) return false;
    return true;
}

bool CMatrix::is_unitary(double tol) const {
    if (!is_square()) return false;
    return (dagger() * (*this)).max_abs_diff(identity(rows_)) <= tol;
}

double CMatrix::max_abs_diff(const CMatrix& o) const {
    if (rows_ != o.rows_ || cols_ != o.cols_) throw std::invalid_argument("max_abs_diff: dimension mismatch");
    double m = 0.0;
    for (size_t i = 0; i < a_.size(); ++i) m = std::max(m, std::abs(a_[i] - o.a_[i]));
    return m;
}

double CMatrix::max_abs() const {
    double m = 0.0;
    for (const cplx& z : a_) m = std::max(m, std::abs(z));
    return m;
}

double CVector::norm() const {
    double s = 0.0;
    for (const cplx& z : a_) s += std::norm(z);
    return std::sqrt(s);
}

CVector CVector::normalized() const {
    const double n = norm();
    if (n < 1e-300) throw std::invalid_argument("normalized: zero vector");
    CVector r(dim());
    for (int i = 0; i < dim(); ++i) r[i] = a_[i] / n;
    return r;
}

CMatrix CVector::outer() const {
    CMatrix r(dim(), dim());
    for (int i = 0; i < dim(); ++i)
        for (int j = 0; j < dim(); ++j) r(i, j) = a_[i] * std::conj(a_[j]);
    return r;
}

CVector operator*(const CMatrix& m, const CVector& v) {
    if (m.cols() != v.dim()) throw std::invalid_argument("matrix-vector: dimension mismatch");
    CVector r(m.rows());
    for (int i = 0; i < m.rows(); ++i) {
        cplx s = 0.0;
        for (int j = 0; j < m.cols(); ++j) s += m(i, j) * v[j];
        r[i] = s;
    }
    return r;
}

CVector kron(const CVector& a, const CVector& b) {
    CVector r(a.dim() * b.dim());
    for (int i = 0; i < a.dim(); ++i)
        for (int j = 0; j < b.dim(); ++j) r[i * b.dim() + j] = a[i] * b[j];
    return r;
}

CMatrix kron(const CMatrix& a, const CMatrix& b) {
    CMatrix r(a.rows() * b.rows(), a.cols() * b.cols());
    for (int i = 0; i < a.rows(); ++i)
        for (int j = 0; j < a.cols(); ++j) {
            const cplx aij = a(i, j);
            if (aij == 0.0) continue;
            for (int k = 0; k < b.rows(); ++k)
                for (int l = 0; l < b.cols(); ++l)
                    r(i * b.rows() + k, j * b.cols() + l) = aij * b(k, l);
        }
    return r;
}

CMatrix commutator(const CMatrix& a, const CMatrix& b) {
    if (!a.is_square() || !b.is_square() || a.rows() != b.rows())
        throw std::invalid_argument("commutator: need square matrices of equal dimension");
    return a * b - b * a;
}

cplx trace(const CMatrix& a) { return a.trace(); }

CMatrix partial_trace(const CMatrix& a, const std::vector<int>& dims, const std::vector<int>& keep) {
    const int total = std::accumulate(dims.begin(), dims.end(), 1, std::multiplies<int>());
    if (!a.is_square() || a.rows() != total)
        throw std::invalid_argument("partial_trace: subsystem dims inconsistent with matrix dimension");

    const int n = static_cast<int>(dims.size());
    std::vector<bool> kept(n, false);
    int kept_dim = 1;
    for (int k : keep) {
        if (k < 0 || k >= n || kept[k]) throw std::invalid_argument("partial_trace: bad keep set");
        kept[k] = true;
    }
    for (int s = 0; s < n; ++s)
        if (kept[s]) kept_dim *= dims[s];

    // strides of each subsystem in the full index (left factor most significant)
    std::vector<int> stride(n, 1);
    for (int s = n - 2; s >= 0; --s) stride[s] = stride[s + 1] * dims[s + 1];

    CMatrix r(kept_dim, kept_dim);
    std::vector<int> idx(n, 0);
    // enumerate all (row, col) pairs of the full matrix, accumulate where traced
    // subsystems agree
    for (int row = 0; row < total; ++row) {
        for (int col = 0; col < total; ++col) {
            bool diag_on_traced = true;
            int kr = 0, kc = 0;
            for (int s = 0; s < n; ++s) {
                const int ri = (row / stride[s]) % dims[s];
                const int ci = (col / stride[s]) % dims[s];
                if (kept[s]) {
                    kr = kr * dims[s] + ri;
                    kc = kc * dims[s] + ci;
                } else if (ri != ci) {
                    diag_on_traced = false;
                    break;
                }
            }
            if (diag_on_traced) r(kr, kc) += a(row, col);
        }
    }
    return r;
}

double hs_norm_sq(const CMatrix& a) {
    double s = 0.0;
    for (int i = 0; i < a.rows(); ++i)
        for (int j = 0; j < a.cols(); ++j) s += std::norm(a(i, j));
    return s;
}

namespace {

EigResult eig_2x2(const CMatrix& a) {
    const double p = a(0, 0).real(), q = a(1, 1).real();
    const cplx b = a(0, 1);
    EigResult r;
    r.vectors = CMatrix::identity(2);
    if (std::abs(b) < 1e-300) {
        r.values = {p, q};
        if (p > q) {
            r.values = {q, p};
            r.vectors = CMatrix(2, 2, {0.0, 1.0, 1.0, 0.0});
        }
        return r;
    }
    const double m = 0.5 * (p + q);
    const double d = std::sqrt(0.25 * (p - q) * (p - q) + std::norm(b));
    const double lo = m - d, hi = m + d;
    // eigenvector for lo: (b, lo - p), normalized
    CVector v_lo{b, cplx(lo - p, 0.0)};
    if (v_lo.norm() < 1e-150) v_lo = CVector{cplx(lo - q, 0.0), std::conj(b)};
    v_lo = v_lo.normalized();
    CVector v_hi{b, cplx(hi - p, 0.0)};
    if (v_hi.norm() < 1e-150) v_hi = CVector{cplx(hi - q, 0.0), std::conj(b)};
    v_hi = v_hi.normalized();
    r.values = {lo, hi};
    r.vectors = CMatrix(2, 2);
    r.vectors(0, 0) = v_lo[0];
    r.vectors(1, 0) = v_lo[1];
    r.vectors(0, 1) = v_hi[0];
    r.vectors(1, 1) = v_hi[1];
    return r;
}

double off_diag_norm(const CMatrix& a) {
    double s = 0.0;
    for (int i = 0; i < a.rows(); ++i)
        for (int j = 0; j < a.cols(); ++j)
            if (i != j) s += std::norm(a(i, j));
    return std::sqrt(s);
}

} // namespace

EigResult hermitian_eig(const CMatrix& a) {
    if (!a.is_square()) throw std::invalid_argument("hermitian_eig: matrix not square");
    if (!a.is_hermitian()) throw std::invalid_argument("hermitian_eig: matrix not Hermitian");
    const int n = a.rows();
    if (n == 1) {
        EigResult r;
        r.values = {a(0, 0).real()};
        r.vectors = CMatrix::identity(1);
        return r;
    }
    if (n == 2) return eig_2x2(a);

    // cyclic Jacobi with complex rotations
    CMatrix m = a;
    CMatrix v = CMatrix::identity(n);
    const double scale = std::max(m.max_abs(), 1.0);
    for (int sweep = 0; sweep < 60 && off_diag_norm(m) > 1e-14 * scale; ++sweep) {
        for (int p = 0; p < n - 1; ++p) {
            for (int q = p + 1; q < n; ++q) {
                const cplx apq = m(p, q);
                if (std::abs(apq) < 1e-300) continue;
                const double app = m(p, p).real(), aqq = m(q, q).real();
                const cplx phase = apq / std::abs(apq);
                const double theta = 0.5 * std::atan2(2.0 * std::abs(apq), aqq - app);
                const double c = std::cos(theta);
                const cplx s = std::sin(theta) * phase;
                // J acts on columns p,q: [c, s; -conj(s), c] (unitary)
                for (int i = 0; i < n; ++i) {
                    const cplx mip = m(i, p), miq = m(i, q);
                    m(i, p) = c * mip - std::conj(s) * miq;
                    m(i, q) = s * mip + c * miq;
                }
                for (int j = 0; j < n; ++j) {
                    const cplx mpj = m(p, j), mqj = m(q, j);
                    m(p, j) = c * mpj - s * mqj;
                    m(q, j) = std::conj(s) * mpj + c * mqj;
                }
                for (int i = 0; i < n; ++i) {
                    const cplx vip = v(i, p), viq = v(i, q);
                    v(i, p) = c * vip - std::conj(s) * viq;
                    v(i, q) = s * vip + c * viq;
                }
            }
        }
    }

    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int i, int j) { return m(i, i).real() < m(j, j).real(); });

    EigResult r;
    r.values.resize(n);
    r.vectors = CMatrix(n, n);
    for (int k = 0; k < n; ++k) {
        r.values[k] = m(order[k], order[k]).real();
        for (int i = 0; i < n; ++i) r.vectors(i, k) = v(i, order[k]);
    }
    return r;
}

CMatrix hermitian_sqrt(const CMatrix& a) {
    if (!a.is_hermitian()) throw std::invalid_argument("hermitian_sqrt: matrix not Hermitian");
    EigResult e = hermitian_eig(a);
    const int n = a.rows();
    CMatrix r(n, n);
    for (int k = 0; k < n; ++k) {
        double lam = e.values[k];
        if (lam < -kStructTol) throw std::domain_error("hermitian_sqrt: not PSD");
        if (lam < 0.0) lam = 0.0;
        const double s = std::sqrt(lam);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) r(i, j) += s * e.vectors(i, k) * std::conj(e.vectors(j, k));
    }
    return r;
}

CMatrix hermitian_expm(const CMatrix& h, double t) {
    if (!h.is_hermitian()) throw std::invalid_argument("hermitian_expm: generator not Hermitian");
    EigResult e = hermitian_eig(h);
    const int n = h.rows();
    CMatrix r(n, n);
    for (int k = 0; k < n; ++k) {
        const cplx ph = std::exp(cplx(0.0, -t * e.values[k]));
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) r(i, j) += ph * e.vectors(i, k) * std::conj(e.vectors(j, k));
    }
    return r;
}

} // namespace qmd
