#pragma once

#include "qmd/builders.hpp"
#include "qmd/metrics.hpp"
#include "qmd/mitigation.hpp"

#include <complex>
#include <map>
#include <optional>
#include <string>

namespace qmd {

enum class Method { TSM, WMM, DEC };
const char* to_string(Method m);
Method method_from_string(const std::string& s);

enum class DecReadout { probe_projection, probe_X };

// Disturbed observable; the shot-based protocols implement B = X (the paper
// fixtures) plus the trivial identity case.
enum class ObservableB { X, Identity };

struct MitigationPlan {
    std::optional<ConfusionMatrix> rem_per_qubit; // applied per measured qubit
    std::optional<ZneSchedule> zne;
};

struct EstimatorConfig {
    Method method = Method::DEC;
    PauliAxis measured = PauliAxis::Z;
    ObservableB disturbed = ObservableB::X;
    long long shots = 100000;
    uint64_t seed = 12345;
    double theta_w = 0.7353;
    double theta = 0.35;
    DecReadout readout_mode = DecReadout::probe_projection;
    bool analytic = false; // exact Born probabilities instead of sampling
    CVector input_state;   // system pure state; defaults to |+i>
    std::optional<NoiseModel> noise;
    MitigationPlan mitigation;

    CVector system_state() const;
    void validate() const;
};

struct RunResult {
    double eta_sq_hat = 0.0;
    // per-circuit outcome weights: counts when sampled, probabilities in analytic mode
    std::map<std::string, std::map<std::string, double>> raw_counts;
    long long discarded = 0;
    EstimatorConfig config;

    std::string to_json() const; // one JSON-lines record, schema v1
};

RunResult tsm_estimate(const EstimatorConfig& cfg);
RunResult wmm_estimate(const EstimatorConfig& cfg);
RunResult dec_estimate(const EstimatorConfig& cfg);
RunResult run_estimator(const EstimatorConfig& cfg);

// Weak joint distribution of B before/after the measurement realized by `dil`:
// p_w(b_i, b_f) = Tr[(P_bf ⊗ I) U (P_bi ⊗ I) (rho ⊗ sigma) U†].
struct WjdEntry {
    double b_i, b_f;
    cplx value;
};
std::vector<WjdEntry> wjd_exact(const CMatrix& B, const DensityOperator& rho, const IndirectModel& dil);

// sum over (b_f - b_i)^2 Re p_w — the disturbance reconstructed from the WJD
double wjd_disturbance(const std::vector<WjdEntry>& wjd);

// Weak conditional probability of P_bi given post-selection on P_bf.
cplx weak_value(const IndirectModel& dil, const CMatrix& p_bi, const CMatrix& p_bf, const DensityOperator& rho);

// spectral projections of a Hermitian observable, eigenvalues grouped within 1e-10
std::vector<std::pair<double, CMatrix>> spectral_projections(const CMatrix& B);

} // namespace qmd
