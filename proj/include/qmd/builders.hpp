#pragma once

#include "qmd/circuit.hpp"

#include <array>

namespace qmd {

// Wire conventions shared by all builders:
//   wire 0 = measured system S, wire 1 = apparatus probe P (starts |0>),
//   wire 2 = extra qubit when present (weak probe P' or the three-state ancilla).

// Two-qubit block realizing the projective measurement of a Pauli via a probe:
// X: H-CNOT-H, Y: S†,(H-CNOT-H),S on the system, Z: bare CNOT. Wire 0 = S, wire 1 = probe.
// Probe readout 0 maps to outcome +1.
Circuit indirect_measurement_block(PauliAxis which);

// Dilation (probe space, probe state, interaction, meter) of the same measurement.
struct IndirectModel {
    CMatrix unitary;                  // on S ⊗ probe
    CMatrix probe_init;               // probe density matrix
    std::vector<double> meter_labels; // label per computational probe outcome
};
IndirectModel indirect_model(PauliAxis which);

// Extract {M_m} from a dilation with a pure |0> probe: M_m = (I ⊗ <m|) U (I ⊗ |0>).
MeasurementModel model_from_dilation(const IndirectModel& dil, int system_dim);

// exp(-i theta X⊗Z) on (S, P') built from H, CNOT, RZ(2 theta), CNOT, H. Wire 0 = S, wire 1 = P'.
Circuit weak_interaction_block(double theta);
Circuit weak_interaction_block_dagger(double theta);

// Weak measurement coupling W(theta_w) on (S, P'): RX(2 theta_w) and S on the probe,
// then the control structure H-CNOT-H on the system. Probe POVM is (I ± cos(2 theta_w) X)/2.
Circuit weak_measurement_block(double theta_w);

// Three-state protocol: per input-branch circuit plus its register layout.
// Branch 0: plain input; branch 1: X applied; branch 2: (I+X)/sqrt2 via an
// ancilla post-selected on 0. Outcomes: slot_m = apparatus, slot_b = final X readout.
struct TsmBranch {
    Circuit circuit;
    int slot_m;
    int slot_b;
    int slot_postselect; // -1 when absent
};
struct TsmCircuits {
    std::array<TsmBranch, 3> branch;
};
TsmCircuits build_tsm_circuits(PauliAxis measured);

// Weak-measurement protocol circuit: weak coupling to P', apparatus measurement,
// strong X readout of the system.
struct WmmCircuit {
    Circuit circuit;
    int slot_weak;   // x_i
    int slot_m;      // apparatus outcome (marginalized by the estimator)
    int slot_strong; // x_f
};
WmmCircuit build_wmm_circuit(PauliAxis measured, double theta_w);

// Decoherence-probe protocol circuit: V(theta) on (S,P'), apparatus measurement,
// V†(theta), probe read in the X basis (H then Z readout; outcome 0 = +).
struct DecCircuit {
    Circuit circuit;
    int slot_m;
    int slot_probe;
};
DecCircuit build_dec_circuit(PauliAxis measured, double theta);

} // namespace qmd
