#include "qmd/builders.hpp"

namespace qmd {

namespace {

void append_remapped(Circuit& dst, const Circuit& block, const std::vector<int>& wire_map) {
    for (const CircuitEvent& ev : block.events) {
        if (const auto* g = std::get_if<GateOp>(&ev)) {
            GateOp ng = *g;
            for (int& w : ng.wires) w = wire_map[static_cast<size_t>(w)];
            dst.events.push_back(std::move(ng));
        } else {
            throw std::logic_error("append_remapped: blocks are gate-only");
        }
    }
}

void gate(Circuit& c, GateKind k, std::vector<int> wires, double angle = 0.0) {
    c.events.push_back(GateOp{k, std::move(wires), angle, std::nullopt});
}

} // namespace

Circuit indirect_measurement_block(PauliAxis which) {
    Circuit c;
    c.n_qubits = 2;
    switch (which) {
        case PauliAxis::X:
            gate(c, GateKind::H, {0});
            gate(c, GateKind::CNOT, {0, 1});
            gate(c, GateKind::H, {0});
            break;
        case PauliAxis::Y:
            gate(c, GateKind::Sdg, {0});
            gate(c, GateKind::H, {0});
            gate(c, GateKind::CNOT, {0, 1});
            gate(c, GateKind::H, {0});
            gate(c, GateKind::S, {0});
            break;
        case PauliAxis::Z:
            gate(c, GateKind::CNOT, {0, 1});
            break;
    }
    return c;
}

IndirectModel indirect_model(PauliAxis which) {
    IndirectModel m;
    m.unitary = unitary_of_circuit(indirect_measurement_block(which));
    m.probe_init = ket0().outer();
    m.meter_labels = {+1.0, -1.0};
    return m;
}

MeasurementModel model_from_dilation(const IndirectModel& dil, int system_dim) {
    const int probe_dim = dil.unitary.rows() / system_dim;
    std::vector<CMatrix> ops;
    std::vector<double> labels;
    for (int m = 0; m < probe_dim; ++m) {
        CMatrix op(system_dim, system_dim);
        for (int i = 0; i < system_dim; ++i)
            for (int j = 0; j < system_dim; ++j) op(i, j) = dil.unitary(i * probe_dim + m, j * probe_dim + 0);
        ops.push_back(std::move(op));
        labels.push_back(dil.meter_labels[static_cast<size_t>(m)]);
    }
    return MeasurementModel(std::move(labels), std::move(ops));
}

Circuit weak_interaction_block(double theta) {
    Circuit c;
    c.n_qubits = 2;
    gate(c, GateKind::H, {0});
    gate(c, GateKind::CNOT, {0, 1});
    gate(c, GateKind::RZ, {1}, 2.0 * theta);
    gate(c, GateKind::CNOT, {0, 1});
    gate(c, GateKind::H, {0});
    return c;
}

Circuit weak_interaction_block_dagger(double theta) { return weak_interaction_block(-theta); }

Circuit weak_measurement_block(double theta_w) {
    Circuit c;
    c.n_qubits = 2;
    gate(c, GateKind::RX, {1}, 2.0 * theta_w);
    gate(c, GateKind::S, {1});
    gate(c, GateKind::H, {0});
    gate(c, GateKind::CNOT, {0, 1});
    gate(c, GateKind::H, {0});
    return c;
}

TsmCircuits build_tsm_circuits(PauliAxis measured) {
    const Circuit meas = indirect_measurement_block(measured);
    TsmCircuits out;
    for (int br = 0; br < 3; ++br) {
        TsmBranch& b = out.branch[static_cast<size_t>(br)];
        Circuit& c = b.circuit;
        c.n_qubits = br == 2 ? 3 : 2;
        b.slot_postselect = -1;
        int slot = 0;
        if (br == 1) gate(c, GateKind::X, {0});
        if (br == 2) {
            // (I+X)/sqrt2 on the system: H, CNOT to the ancilla, H, keep ancilla reading 0
            gate(c, GateKind::H, {0});
            gate(c, GateKind::CNOT, {0, 2});
            gate(c, GateKind::H, {0});
            b.slot_postselect = slot;
            c.events.push_back(MeasureOp{2, slot++});
            c.events.push_back(PostSelectOp{b.slot_postselect, 0});
        }
        append_remapped(c, meas, {0, 1});
        b.slot_m = slot;
        c.events.push_back(MeasureOp{1, slot++});
        gate(c, GateKind::H, {0}); // X-basis readout of the disturbed observable
        b.slot_b = slot;
        c.events.push_back(MeasureOp{0, slot++});
        c.validate();
    }
    return out;
}

WmmCircuit build_wmm_circuit(PauliAxis measured, double theta_w) {
    WmmCircuit out;
    Circuit& c = out.circuit;
    c.n_qubits = 3; // 0 = S, 1 = P, 2 = P'
    append_remapped(c, weak_measurement_block(theta_w), {0, 2});
    out.slot_weak = 0;
    c.events.push_back(MeasureOp{2, 0});
    append_remapped(c, indirect_measurement_block(measured), {0, 1});
    out.slot_m = 1;
    c.events.push_back(MeasureOp{1, 1});
    c.events.push_back(GateOp{GateKind::H, {0}, 0.0, std::nullopt});
    out.slot_strong = 2;
    c.events.push_back(MeasureOp{0, 2});
    c.validate();
    return out;
}

DecCircuit build_dec_circuit(PauliAxis measured, double theta) {
    DecCircuit out;
    Circuit& c = out.circuit;
    c.n_qubits = 3; // 0 = S, 1 = P, 2 = P'
    c.events.push_back(GateOp{GateKind::H, {2}, 0.0, std::nullopt}); // probe |+>
    append_remapped(c, weak_interaction_block(theta), {0, 2});
    append_remapped(c, indirect_measurement_block(measured), {0, 1});
    out.slot_m = 0;
    c.events.push_back(MeasureOp{1, 0});
    append_remapped(c, weak_interaction_block_dagger(theta), {0, 2});
    c.events.push_back(GateOp{GateKind::H, {2}, 0.0, std::nullopt}); // X-basis probe readout
    out.slot_probe = 1;
    c.events.push_back(MeasureOp{2, 1});
    c.validate();
    return out;
}

} // namespace qmd
