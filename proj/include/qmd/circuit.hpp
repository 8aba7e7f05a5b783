#pragma once

#include "qmd/linalg.hpp"
#include "qmd/states.hpp"

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace qmd {

enum class GateKind { H, X, S, Sdg, RX, RZ, CNOT, Custom };

struct GateOp {
    GateKind kind;
    std::vector<int> wires;       // CNOT: {control, target}
    double angle = 0.0;           // RX/RZ, half-angle convention exp(-i angle P / 2)
    std::optional<CMatrix> matrix; // Custom only
};

struct MeasureOp {
    int wire;
    int slot; // classical register position
};

struct PostSelectOp {
    int slot;
    int required; // 0 or 1, matched against the recorded bit
};

using CircuitEvent = std::variant<GateOp, MeasureOp, PostSelectOp>;

struct Circuit {
    int n_qubits = 0;
    std::vector<CircuitEvent> events;

    // register slots unique; post-selection only on already-measured slots
    void validate() const;
    int register_width() const;
    int gate_count() const;
};

// Per-gate depolarizing rates plus per-qubit readout confusion.
// readout[q][true][observed]; rows sum to 1. Empty readout = ideal.
struct NoiseModel {
    double depol_1q = 0.0;
    double depol_2q = 0.0;
    std::vector<std::array<std::array<double, 2>, 2>> readout;

    void validate() const;
    std::array<std::array<double, 2>, 2> readout_for(int qubit) const;
    static NoiseModel from_config_text(const std::string& text);
    static NoiseModel load(const std::string& path);
};

CMatrix gate_matrix(const GateOp& g); // on the gate's own wires
CMatrix gate_unitary(const GateOp& g, int n_qubits);
GateOp gate_dagger(const GateOp& g);

// Product of gate unitaries in circuit order; measurement events are an error.
CMatrix unitary_of_circuit(const Circuit& c);

struct Branch {
    double prob;
    CMatrix state; // conditional state, unit trace
    std::string record;
    bool discarded;
};

std::vector<Branch> evolve_branches(const Circuit& c, const DensityOperator& rho_in,
                                    const NoiseModel* noise = nullptr);

// Unconditional output state over kept branches (error if everything is discarded).
DensityOperator evolve(const Circuit& c, const DensityOperator& rho_in, const NoiseModel* noise = nullptr);

struct OutcomeDistribution {
    std::map<std::string, double> probs; // recorded register -> probability (kept shots)
    double discarded = 0.0;
};

OutcomeDistribution exact_distribution(const Circuit& c, const DensityOperator& rho_in,
                                       const NoiseModel* noise = nullptr);

struct SampleResult {
    std::map<std::string, long long> counts;
    long long discarded = 0;
    long long shots = 0;

    std::map<std::string, double> distribution() const;
};

struct PostSelectionStarved : std::runtime_error {
    long long shots, discarded;
    PostSelectionStarved(long long shots_, long long discarded_)
        : std::runtime_error("post-selection discarded all " + std::to_string(shots_) + " shots"),
          shots(shots_), discarded(discarded_) {}
};

// Deterministic given seed; readout confusion applied per measured qubit
// before recording; post-selected mismatches are discarded and counted.
SampleResult sample_counts(const Circuit& c, const DensityOperator& rho_in, long long shots,
                           uint64_t seed, const NoiseModel* noise = nullptr);

// depolarizing channel: with probability p the wires are replaced by I/2^k
CMatrix apply_depolarizing(const CMatrix& state, const std::vector<int>& wires, double p, int n_qubits);

// JSON-lines round trip: header line {"v":1,"n_qubits":n}, then one event per line.
std::string circuit_to_jsonl(const Circuit& c);
Circuit circuit_from_jsonl(const std::string& text);

} // namespace qmd
