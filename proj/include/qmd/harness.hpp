#pragma once

#include "qmd/estimators.hpp"

#include <string>
#include <vector>

namespace qmd {

struct Stats {
    double mean, sd, bias, rmse;
};

// Population-style statistics with divisor n; rmse² = sd² + bias² exactly.
Stats stats(const std::vector<double>& values, double theoretical);

struct EstimateSummary {
    Method method;
    PauliAxis measured;
    std::string noise_label;      // "none" or profile name
    std::string mitigation_label; // "none" or "rem+zne" etc.
    double mean, sd, bias, rmse;
    int n_iterations;
    long long shots_total;
    double theoretical;
    double theta, theta_w;
    uint64_t base_seed;
    std::vector<uint64_t> seeds;
    std::vector<double> values;

    std::string to_json() const;
};

std::string summaries_to_csv(const std::vector<EstimateSummary>& rows, bool times_1e3 = false);

// Theoretical values for the paper fixtures (projective X/Y/Z, B = X).
double theoretical_disturbance(PauliAxis measured);

struct TableConfig {
    std::vector<Method> methods{Method::TSM, Method::WMM, Method::DEC};
    std::vector<PauliAxis> measurements{PauliAxis::X, PauliAxis::Y, PauliAxis::Z};
    long long shots_total = 100000; // per measuring device, split across iterations
    int n_iterations = 10;
    uint64_t base_seed = 20240811;
    double theta = 0.35;
    double theta_w = 0.7353;
    bool analytic = false;
    std::optional<NoiseModel> noise;
    std::string noise_label = "none";
    MitigationPlan mitigation;
    std::string mitigation_label = "none";
    int threads = 0; // 0 = hardware concurrency
};

std::vector<EstimateSummary> run_table(const TableConfig& cfg);

// One estimator ensemble (n_iterations runs, seeds base+i).
EstimateSummary run_cell(const TableConfig& cfg, Method method, PauliAxis measured);

struct SweepCell {
    double theta;
    double mean, sd;
    std::vector<double> values;
};

struct FitResult {
    std::string kind; // "linear" or "quadratic"
    std::vector<double> coefficients;
    double intercept;
    double residual_sum_sq;
};

struct SweepRecord {
    std::vector<SweepCell> cells;
    std::vector<FitResult> fits;

    const FitResult& fit(const std::string& kind) const;
};

struct ThetaSweepConfig {
    PauliAxis measured = PauliAxis::Z;
    std::vector<double> thetas{0.05, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};
    long long shots_total = 100000;
    int n_iterations = 10;
    uint64_t base_seed = 20240811;
    bool analytic = false;
    std::optional<NoiseModel> noise;
    MitigationPlan mitigation;
    int threads = 0;
};

// DEC-only coupling sweep with linear and quadratic fits in theta.
SweepRecord run_theta_sweep(const ThetaSweepConfig& cfg);

struct ThetaWSweepConfig {
    PauliAxis measured = PauliAxis::Z;
    std::vector<double> theta_ws{0.76, 0.772, 0.78};
    long long shots_total = 100000;
    int n_iterations = 10;
    uint64_t base_seed = 20240811;
    bool analytic = false;
    std::optional<NoiseModel> noise;
};

struct ThetaWSweepRecord {
    std::vector<double> theta_ws;
    std::vector<double> means;
    std::vector<double> sds;
    double intercept; // linear extrapolation in cos(2 theta_w) to zero strength
};

ThetaWSweepRecord run_thetaw_sweep(const ThetaWSweepConfig& cfg);

// Exact-value report: disturbance table, WJD tables, locally uniform values, coherence.
std::string run_exact_report();

// Synthetic noise stand-in for hardware runs: depolarizing 0.001/0.01 and
// T1-like asymmetric readout (P(1|0)=0.02, P(0|1)=0.20).
NoiseModel default_synthetic_noise();

enum ExitCode { kOk = 0, kConfigError = 2, kStarvation = 3, kNumericalFailure = 4 };

} // namespace qmd
