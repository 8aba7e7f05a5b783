#include "qmd/states.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace qmd {

namespace {
const cplx kI(0.0, 1.0);
const double kInvSqrt2 = 1.0 / std::sqrt(2.0);
} // namespace

const char* to_string(PauliAxis a) {
    switch (a) {
        case PauliAxis::X: return "X";
        case PauliAxis::Y: return "Y";
        case PauliAxis::Z: return "Z";
    }
    return "?";
}

PauliAxis pauli_axis_from_string(const std::string& s) {
    if (s == "X" || s == "x") return PauliAxis::X;
    if (s == "Y" || s == "y") return PauliAxis::Y;
    if (s == "Z" || s == "z") return PauliAxis::Z;
    throw std::invalid_argument("unknown Pauli axis: " + s);
}

CMatrix pauli(PauliAxis which) {
    switch (which) {
        case PauliAxis::X: return CMatrix(2, 2, {0.0, 1.0, 1.0, 0.0});
        case PauliAxis::Y: return CMatrix(2, 2, {0.0, -kI, kI, 0.0});
        case PauliAxis::Z: return CMatrix(2, 2, {1.0, 0.0, 0.0, -1.0});
    }
    throw std::logic_error("pauli: bad axis");
}

CVector eigenstate(PauliAxis which, int sign) {
    if (sign != 1 && sign != -1) throw std::invalid_argument("eigenstate: sign must be +1 or -1");
    switch (which) {
        case PauliAxis::X: return sign > 0 ? ket_plus() : ket_minus();
        case PauliAxis::Y: return sign > 0 ? ket_plus_i() : ket_minus_i();
        case PauliAxis::Z: return sign > 0 ? ket0() : ket1();
    }
    throw std::logic_error("eigenstate: bad axis");
}

CVector ket0() { return CVector{1.0, 0.0}; }
CVector ket1() { return CVector{0.0, 1.0}; }
CVector ket_plus() { return CVector{kInvSqrt2, kInvSqrt2}; }
CVector ket_minus() { return CVector{kInvSqrt2, -kInvSqrt2}; }
CVector ket_plus_i() { return CVector{kInvSqrt2, kI * kInvSqrt2}; }
CVector ket_minus_i() { return CVector{kInvSqrt2, -kI * kInvSqrt2}; }

DensityOperator::DensityOperator(CMatrix m) : m_(std::move(m)) {
    if (!m_.is_square()) throw std::invalid_argument("DensityOperator: matrix not square");
    if (!m_.is_finite()) throw std::invalid_argument("DensityOperator: non-finite entries");
    if (!m_.is_hermitian()) throw std::invalid_argument("DensityOperator: not Hermitian");
    if (std::abs(m_.trace() - cplx(1.0)) > kStructTol)
        throw std::invalid_argument("DensityOperator: trace not 1");
    for (double lam : hermitian_eig(m_).values)
        if (lam < -kStructTol) throw std::invalid_argument("DensityOperator: negative eigenvalue");
}

MeasurementModel::MeasurementModel(std::vector<double> outcomes, std::vector<CMatrix> operators)
    : outcomes_(std::move(outcomes)), ops_(std::move(operators)) {
    if (ops_.empty() || ops_.size() != outcomes_.size())
        throw std::invalid_argument("MeasurementModel: need one operator per outcome");
    const int d = ops_.front().rows();
    CMatrix sum(d, d);
    for (const CMatrix& m : ops_) {
        if (m.rows() != d || m.cols() != d) throw std::invalid_argument("MeasurementModel: mixed dimensions");
        sum += m.dagger() * m;
    }
    if (sum.max_abs_diff(CMatrix::identity(d)) > kStructTol)
        throw std::invalid_argument("MeasurementModel: POVM completeness violated");
}

MeasurementModel projective_model(PauliAxis which) {
    const CMatrix p = pauli(which);
    const CMatrix id = CMatrix::identity(2);
    return MeasurementModel({+1.0, -1.0}, {(id + p) * cplx(0.5), (id - p) * cplx(0.5)});
}

std::vector<InstrumentBranch> apply_instrument(const MeasurementModel& model, const DensityOperator& rho) {
    if (model.dim() != rho.dim()) throw std::invalid_argument("apply_instrument: dimension mismatch");
    std::vector<InstrumentBranch> out;
    out.reserve(model.n_outcomes());
    for (int m = 0; m < model.n_outcomes(); ++m) {
        CMatrix post = model.op(m) * rho.matrix() * model.op(m).dagger();
        const double p = post.trace().real();
        InstrumentBranch b{model.outcome(m), p < 0 ? 0.0 : p, std::nullopt};
        if (b.probability >= 1e-14) b.state = DensityOperator(post * cplx(1.0 / b.probability));
        out.push_back(std::move(b));
    }
    return out;
}

} // namespace qmd
