#pragma once

#include "qmd/circuit.hpp"

#include <functional>
#include <string>
#include <vector>

namespace qmd {

// Column-stochastic map from ideal to observed outcome distributions:
// entry(obs, ideal) = P(observed | ideal), p_noisy = C p_ideal.
class ConfusionMatrix {
public:
    ConfusionMatrix() = default;
    ConfusionMatrix(int n_outcomes, std::vector<double> entries);

    static ConfusionMatrix identity(int n_outcomes);
    // joint matrix over k qubits from per-qubit 2x2 calibrations (slot 0 leftmost)
    static ConfusionMatrix from_per_qubit(const std::vector<ConfusionMatrix>& per_qubit);
    // per-qubit matrix implied by a noise model's readout rows
    static ConfusionMatrix from_noise_readout(const NoiseModel& noise, int qubit);

    int n_outcomes() const { return n_; }
    double operator()(int obs, int ideal) const { return e_[static_cast<size_t>(obs) * n_ + ideal]; }
    double& at(int obs, int ideal) { return e_[static_cast<size_t>(obs) * n_ + ideal]; }

    double condition_number() const;

    std::string to_csv() const;
    static ConfusionMatrix from_csv(const std::string& text);

private:
    int n_ = 0;
    std::vector<double> e_;
};

// Prepare-and-measure each computational basis state under the noise model;
// columns are the empirical observed distributions.
ConfusionMatrix detector_tomography(int n_qubits, long long shots, uint64_t seed, const NoiseModel& noise);

// argmin over the probability simplex of ||C p - p_noisy||_2 (active-set QP).
std::vector<double> rem_apply(const ConfusionMatrix& c, const std::vector<double>& p_noisy);

// g -> g (g† g)^((scale-1)/2) on every gate; measurements untouched;
// the noiseless unitary is unchanged while the gate count scales by `scale`.
Circuit fold_circuit(const Circuit& c, int scale_factor, uint64_t seed);

// Extrapolation-to-zero weights: Lagrange basis values at 0. They satisfy
// sum beta = 1 and sum beta alpha^k = 0 for k = 1..n-1.
std::vector<double> richardson_coefficients(const std::vector<double>& alphas);

struct ZneSchedule {
    std::vector<int> scale_factors{1, 3, 5, 7, 9};
    enum class Extrapolator { richardson, linear, quadratic } extrapolator = Extrapolator::richardson;
    int repeats = 5;

    void validate() const;
    static ZneSchedule from_config_text(const std::string& text);
    static ZneSchedule load(const std::string& path);
};

// Runs the closure `repeats` times per scale factor (fresh seeds), averages,
// and extrapolates the series to zero scale.
double zne_estimate(const std::function<double(int scale, uint64_t seed)>& run, const ZneSchedule& schedule,
                    uint64_t seed);

// least-squares polynomial fit y ~ sum_k coeff_k x^k; returns coefficients (low degree first)
std::vector<double> polyfit(const std::vector<double>& x, const std::vector<double>& y, int degree);

} // namespace qmd
