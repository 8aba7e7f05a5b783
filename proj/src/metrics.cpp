#include "qmd/metrics.hpp"

#include <cmath>
#include <stdexcept>

namespace qmd {

namespace {
const cplx kI(0.0, 1.0);

void require_hermitian(const CMatrix& b, const char* who) {
    if (!b.is_hermitian()) throw std::invalid_argument(std::string(who) + ": observable not Hermitian");
}
} // namespace

CMatrix MomentOperators::o_a_n(int n) const {
    CMatrix r(povm.front().rows(), povm.front().cols());
    for (size_t m = 0; m < povm.size(); ++m) r += povm[m] * cplx(std::pow(outcomes[m], n));
    return r;
}

MomentOperators moment_operators(const MeasurementModel& model, const CMatrix& B) {
    MomentOperators mo;
    mo.O_B = CMatrix(model.dim(), model.dim());
    mo.O_B2 = CMatrix(model.dim(), model.dim());
    for (int m = 0; m < model.n_outcomes(); ++m) {
        mo.O_B += model.op(m).dagger() * B * model.op(m);
        mo.O_B2 += model.op(m).dagger() * B * B * model.op(m);
        mo.outcomes.push_back(model.outcome(m));
        mo.povm.push_back(model.povm_element(m));
    }
    return mo;
}

double qrms_disturbance_exact(const MeasurementModel& model, const CMatrix& B, const DensityOperator& rho) {
    require_hermitian(B, "qrms_disturbance_exact");
    const CMatrix sqrt_rho = hermitian_sqrt(rho.matrix());
    double s = 0.0;
    for (int m = 0; m < model.n_outcomes(); ++m) s += hs_norm_sq(commutator(model.op(m), B) * sqrt_rho);
    return s;
}

double qrms_error_exact(const MeasurementModel& model, const CMatrix& A, const DensityOperator& rho) {
    require_hermitian(A, "qrms_error_exact");
    const CMatrix sqrt_rho = hermitian_sqrt(rho.matrix());
    const CMatrix id = CMatrix::identity(A.rows());
    double s = 0.0;
    for (int m = 0; m < model.n_outcomes(); ++m)
        s += hs_norm_sq(model.op(m) * (id * cplx(model.outcome(m)) - A) * sqrt_rho);
    return s;
}

double qrms_disturbance_from_dilation(const IndirectModel& dil, const CMatrix& B, const DensityOperator& rho) {
    require_hermitian(B, "qrms_disturbance_from_dilation");
    const int pd = dil.probe_init.rows();
    const CMatrix b0 = kron(B, CMatrix::identity(pd));
    const CMatrix b_tau = dil.unitary.dagger() * b0 * dil.unitary;
    const CMatrix root = kron(hermitian_sqrt(rho.matrix()), hermitian_sqrt(dil.probe_init));
    return hs_norm_sq((b_tau - b0) * root);
}

double qrms_error_from_dilation(const IndirectModel& dil, const CMatrix& A, const DensityOperator& rho) {
    require_hermitian(A, "qrms_error_from_dilation");
    const int pd = dil.probe_init.rows();
    CMatrix meter(pd, pd);
    for (int m = 0; m < pd; ++m) meter(m, m) = dil.meter_labels[static_cast<size_t>(m)];
    const CMatrix a0 = kron(A, CMatrix::identity(pd));
    const CMatrix m_tau = dil.unitary.dagger() * kron(CMatrix::identity(A.rows()), meter) * dil.unitary;
    const CMatrix root = kron(hermitian_sqrt(rho.matrix()), hermitian_sqrt(dil.probe_init));
    return hs_norm_sq((m_tau - a0) * root);
}

double tsm_expansion_exact(const MeasurementModel& model, const CMatrix& B, const CVector& psi) {
    require_hermitian(B, "tsm_expansion_exact");
    const MomentOperators mo = moment_operators(model, B);
    const CVector b_psi = B * psi;
    CVector b_plus_psi(psi.dim());
    for (int i = 0; i < psi.dim(); ++i) b_plus_psi[i] = b_psi[i] + psi[i];

    auto expect = [](const CMatrix& op, const CVector& v) {
        cplx s = 0.0;
        for (int i = 0; i < v.dim(); ++i)
            for (int j = 0; j < v.dim(); ++j) s += std::conj(v[i]) * op(i, j) * v[j];
        return s.real();
    };

    return expect(B * B, psi) + expect(mo.O_B2, psi) + expect(mo.O_B, psi) + expect(mo.O_B, b_psi) -
           expect(mo.O_B, b_plus_psi);
}

std::pair<double, CMatrix> dec_channel_exact(const MeasurementModel& model, const CMatrix& B,
                                             const DensityOperator& rho, double theta) {
    require_hermitian(B, "dec_channel_exact");
    if (!std::isfinite(theta)) throw std::invalid_argument("dec_channel_exact: theta not finite");
    const int d = model.dim();
    const CMatrix v = hermitian_expm(kron(B, pauli(PauliAxis::Z)), theta);
    const CMatrix vdg = v.dagger();
    const CMatrix init = kron(rho.matrix(), ket_plus().outer());

    CMatrix out(2 * d, 2 * d);
    for (int m = 0; m < model.n_outcomes(); ++m) {
        const CMatrix k = vdg * kron(model.op(m), CMatrix::identity(2)) * v;
        out += k * init * k.dagger();
    }
    std::vector<int> dims{d, 2};
    const CMatrix probe = partial_trace(out, dims, {1});
    const CMatrix p_plus = ket_plus().outer();
    const double p = (p_plus * probe).trace().real();
    return {p, probe};
}

LocallyUniformResult locally_uniform_disturbance(const MeasurementModel& model, const CMatrix& B,
                                                 const DensityOperator& rho, const std::vector<double>& t_grid) {
    if (t_grid.empty()) throw std::invalid_argument("locally_uniform_disturbance: empty grid");
    LocallyUniformResult best{-1.0, t_grid.front()};
    for (double t : t_grid) {
        const CMatrix u = hermitian_expm(B, t);
        const DensityOperator rotated(u * rho.matrix() * u.dagger());
        const double val = qrms_disturbance_exact(model, B, rotated);
        if (val > best.value + kFloatTol) best = {val, t};
    }
    return best;
}

std::vector<double> default_orbit_grid() {
    std::vector<double> g(64);
    for (int i = 0; i < 64; ++i) g[static_cast<size_t>(i)] = M_PI * i / 64.0;
    return g;
}

double coherence_l1(const CMatrix& rho, const std::vector<CVector>& basis) {
    const int d = rho.rows();
    if (static_cast<int>(basis.size()) != d) throw std::invalid_argument("coherence_l1: basis size mismatch");
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) {
            cplx dot = 0.0;
            for (int k = 0; k < d; ++k) dot += std::conj(basis[static_cast<size_t>(i)][k]) * basis[static_cast<size_t>(j)][k];
            if (std::abs(dot - (i == j ? cplx(1.0) : cplx(0.0))) > kStructTol)
                throw std::invalid_argument("coherence_l1: basis not orthonormal");
        }
    double s = 0.0;
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) {
            if (i == j) continue;
            cplx e = 0.0;
            for (int k = 0; k < d; ++k)
                for (int l = 0; l < d; ++l)
                    e += std::conj(basis[static_cast<size_t>(i)][k]) * rho(k, l) * basis[static_cast<size_t>(j)][l];
            s += std::abs(e);
        }
    return s;
}

double coherence_l1_computational(const CMatrix& rho) {
    double s = 0.0;
    for (int i = 0; i < rho.rows(); ++i)
        for (int j = 0; j < rho.cols(); ++j)
            if (i != j) s += std::abs(rho(i, j));
    return s;
}

double decoherence_l1(const MeasurementModel& model, const CMatrix& B, const DensityOperator& rho_S, double theta) {
    const auto [p_plus, probe_out] = dec_channel_exact(model, B, rho_S, theta);
    (void)p_plus;
    return coherence_l1_computational(ket_plus().outer()) - coherence_l1_computational(probe_out);
}

} // namespace qmd
