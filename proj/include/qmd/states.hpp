#pragma once

#include "qmd/linalg.hpp"

#include <optional>
#include <utility>
#include <vector>

namespace qmd {

enum class PauliAxis { X, Y, Z };

const char* to_string(PauliAxis a);
PauliAxis pauli_axis_from_string(const std::string& s);

CMatrix pauli(PauliAxis which);

// Normalized eigenvector of the chosen Pauli; sign = +1 or -1.
CVector eigenstate(PauliAxis which, int sign);

CVector ket0();
CVector ket1();
CVector ket_plus();
CVector ket_minus();
CVector ket_plus_i();
CVector ket_minus_i();

// Hermitian, unit-trace, PSD within 1e-10; validated on construction.
class DensityOperator {
public:
    explicit DensityOperator(CMatrix m);
    static DensityOperator pure(const CVector& psi) { return DensityOperator(psi.outer()); }

    int dim() const { return m_.rows(); }
    const CMatrix& matrix() const { return m_; }

private:
    CMatrix m_;
};

// Finite family {M_m} with real outcome labels; sum_m M_m† M_m = I within 1e-10.
class MeasurementModel {
public:
    MeasurementModel(std::vector<double> outcomes, std::vector<CMatrix> operators);

    int n_outcomes() const { return static_cast<int>(ops_.size()); }
    int dim() const { return ops_.front().rows(); }
    double outcome(int m) const { return outcomes_[m]; }
    const CMatrix& op(int m) const { return ops_[m]; }
    CMatrix povm_element(int m) const { return ops_[m].dagger() * ops_[m]; }

private:
    std::vector<double> outcomes_;
    std::vector<CMatrix> ops_;
};

// Projective measurement of a Pauli: outcomes ±1, rank-1 projectors.
MeasurementModel projective_model(PauliAxis which);

// Outcomes with probability below 1e-14 carry no post-measurement state.
struct InstrumentBranch {
    double outcome;
    double probability;
    std::optional<DensityOperator> state;
};

std::vector<InstrumentBranch> apply_instrument(const MeasurementModel& model, const DensityOperator& rho);

} // namespace qmd
