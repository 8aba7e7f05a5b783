#pragma once

#include "qmd/builders.hpp"
#include "qmd/states.hpp"

#include <utility>
#include <vector>

namespace qmd {

struct MomentOperators {
    CMatrix O_B;  // sum_m M_m† B M_m
    CMatrix O_B2; // sum_m M_m† B² M_m
    std::vector<double> outcomes;
    std::vector<CMatrix> povm;

    CMatrix o_a_n(int n) const; // sum_m m^n Pi_m
};

MomentOperators moment_operators(const MeasurementModel& model, const CMatrix& B);

// eta²: sum_m || [M_m, B] sqrt(rho) ||²_HS
double qrms_disturbance_exact(const MeasurementModel& model, const CMatrix& B, const DensityOperator& rho);

// epsilon²: sum_m || M_m (m - A) sqrt(rho) ||²_HS
double qrms_error_exact(const MeasurementModel& model, const CMatrix& A, const DensityOperator& rho);

// Heisenberg-picture route through a dilation: || (B(tau) - B(0)) (sqrt(rho) ⊗ sqrt(sigma)) ||²_HS
double qrms_disturbance_from_dilation(const IndirectModel& dil, const CMatrix& B, const DensityOperator& rho);
double qrms_error_from_dilation(const IndirectModel& dil, const CMatrix& A, const DensityOperator& rho);

// Three-state expansion of eta² for pure input (unnormalized B|psi>, (B+I)|psi> terms).
double tsm_expansion_exact(const MeasurementModel& model, const CMatrix& B, const CVector& psi);

// Exact decoherence-probe channel: probe |+>, V = exp(-i theta B⊗Z), measurement,
// V†. Returns <P^X_+> in the probe output and the probe marginal.
std::pair<double, CMatrix> dec_channel_exact(const MeasurementModel& model, const CMatrix& B,
                                             const DensityOperator& rho, double theta);

// max over the grid of eta² on e^{-itB} rho e^{itB}; ties resolve to the first index.
struct LocallyUniformResult {
    double value;
    double argmax_t;
};
LocallyUniformResult locally_uniform_disturbance(const MeasurementModel& model, const CMatrix& B,
                                                 const DensityOperator& rho, const std::vector<double>& t_grid);

// 64 uniform points over [0, pi): the orbit of a Pauli generator has period pi
// in every expectation value.
std::vector<double> default_orbit_grid();

// sum of off-diagonal magnitudes in the given orthonormal basis
double coherence_l1(const CMatrix& rho, const std::vector<CVector>& basis);
double coherence_l1_computational(const CMatrix& rho);

// coherence lost by the probe across the decoherence channel
double decoherence_l1(const MeasurementModel& model, const CMatrix& B, const DensityOperator& rho_S, double theta);

} // namespace qmd
