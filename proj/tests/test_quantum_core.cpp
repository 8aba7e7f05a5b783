#include "qmd/builders.hpp"
#include "qmd/circuit.hpp"
#include "qmd/rng.hpp"
#include "test_util.hpp"

#include <doctest.h>

#include <cmath>

using namespace qmd;

namespace {

DensityOperator with_probes(const CVector& psi, int n_qubits) {
    CMatrix rho = psi.outer();
    for (int q = 1; q < n_qubits; ++q) rho = kron(rho, ket0().outer());
    return DensityOperator(rho);
}

double total_variation(const std::map<std::string, double>& a, const std::map<std::string, double>& b) {
    double tv = 0.0;
    for (const auto& [k, v] : a) {
        const auto it = b.find(k);
        tv += std::abs(v - (it == b.end() ? 0.0 : it->second));
    }
    for (const auto& [k, v] : b)
        if (!a.count(k)) tv += v;
    return 0.5 * tv;
}

} // namespace

TEST_CASE("paulis and eigenstates") {
    for (PauliAxis a : {PauliAxis::X, PauliAxis::Y, PauliAxis::Z})
        for (int sign : {+1, -1}) {
            const CVector v = eigenstate(a, sign);
            const CVector pv = pauli(a) * v;
            for (int i = 0; i < 2; ++i) CHECK(std::abs(pv[i] - cplx(sign) * v[i]) < kFloatTol);
            CHECK(v.norm() == doctest::Approx(1.0).epsilon(1e-13));
        }
    // |+> = (|0> + |1>)/sqrt2
    CHECK(std::abs(eigenstate(PauliAxis::X, +1)[0] - cplx(1.0 / std::sqrt(2.0))) < kFloatTol);
    CHECK(std::abs(eigenstate(PauliAxis::X, +1)[1] - cplx(1.0 / std::sqrt(2.0))) < kFloatTol);
    // <+i| X |+i> = 0
    const CVector pi = ket_plus_i();
    const CVector xpi = pauli(PauliAxis::X) * pi;
    cplx dot = 0.0;
    for (int i = 0; i < 2; ++i) dot += std::conj(pi[i]) * xpi[i];
    CHECK(std::abs(dot) < kFloatTol);
}

TEST_CASE("projective models") {
    const MeasurementModel mz = projective_model(PauliAxis::Z);
    CHECK(mz.outcome(0) == 1.0);
    CHECK(mz.outcome(1) == -1.0);
    CHECK(mz.op(0).max_abs_diff(ket0().outer()) < kFloatTol);
    CHECK(mz.op(1).max_abs_diff(ket1().outer()) < kFloatTol);

    for (PauliAxis a : {PauliAxis::X, PauliAxis::Y, PauliAxis::Z}) {
        const MeasurementModel m = projective_model(a);
        CMatrix sum(2, 2);
        for (int k = 0; k < 2; ++k) sum += m.povm_element(k);
        CHECK(sum.max_abs_diff(CMatrix::identity(2)) < kStructTol);
    }
    const MeasurementModel mx = projective_model(PauliAxis::X);
    CHECK(commutator(mx.op(0), pauli(PauliAxis::X)).max_abs() < kFloatTol);
    CHECK(commutator(mx.op(1), pauli(PauliAxis::X)).max_abs() < kFloatTol);
}

TEST_CASE("instrument application") {
    const MeasurementModel mz = projective_model(PauliAxis::Z);
    const auto on_zero = apply_instrument(mz, DensityOperator::pure(ket0()));
    CHECK(on_zero[0].probability == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(on_zero[0].state->matrix().max_abs_diff(ket0().outer()) < kStructTol);
    CHECK(on_zero[1].probability < 1e-14);
    CHECK(!on_zero[1].state.has_value());

    const auto on_plus_i = apply_instrument(mz, DensityOperator::pure(ket_plus_i()));
    CHECK(on_plus_i[0].probability == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(on_plus_i[1].probability == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(on_plus_i[0].state->matrix().max_abs_diff(ket0().outer()) < kStructTol);
    CHECK(on_plus_i[1].state->matrix().max_abs_diff(ket1().outer()) < kStructTol);

    const auto x_probs = apply_instrument(projective_model(PauliAxis::X), DensityOperator::pure(ket_plus_i()));
    CHECK(x_probs[0].probability == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(x_probs[1].probability == doctest::Approx(0.5).epsilon(1e-12));

    CHECK_THROWS_AS(apply_instrument(mz, DensityOperator(kron(ket0().outer(), ket0().outer()))),
                    std::invalid_argument);
}

TEST_CASE("circuit unitaries and evolve") {
    Circuit h;
    h.n_qubits = 1;
    h.events.push_back(GateOp{GateKind::H, {0}, 0.0, std::nullopt});
    CHECK(evolve(h, DensityOperator::pure(ket0())).matrix().max_abs_diff(ket_plus().outer()) < kStructTol);

    Circuit measured = h;
    measured.events.push_back(MeasureOp{0, 0});
    CHECK_THROWS_AS(unitary_of_circuit(measured), std::invalid_argument);

    // gate-only circuits: evolve equals conjugation by the circuit unitary
    SplitMix64 rng(21);
    Circuit c;
    c.n_qubits = 2;
    c.events = {GateOp{GateKind::H, {0}, 0.0, std::nullopt},
                GateOp{GateKind::CNOT, {0, 1}, 0.0, std::nullopt},
                GateOp{GateKind::RZ, {1}, 0.8, std::nullopt},
                GateOp{GateKind::RX, {0}, -0.3, std::nullopt},
                GateOp{GateKind::Sdg, {1}, 0.0, std::nullopt}};
    const CMatrix u = unitary_of_circuit(c);
    CHECK(u.is_unitary());
    const CVector psi = test::random_pure_state(4, rng);
    const DensityOperator in(psi.outer());
    CHECK(evolve(c, in).matrix().max_abs_diff(u * psi.outer() * u.dagger()) < kStructTol);
    CHECK(std::abs(evolve(c, in).matrix().trace() - cplx(1.0)) < kStructTol);

    // CNOT with reversed wire order
    Circuit rev;
    rev.n_qubits = 2;
    rev.events = {GateOp{GateKind::CNOT, {1, 0}, 0.0, std::nullopt}};
    CMatrix expect(4, 4);
    expect(0, 0) = expect(1, 3) = expect(2, 2) = expect(3, 1) = 1.0;
    CHECK(unitary_of_circuit(rev).max_abs_diff(expect) < kFloatTol);
}

TEST_CASE("depolarizing channel limits") {
    SplitMix64 rng(22);
    const CVector psi = test::random_pure_state(4, rng);
    const CMatrix rho = psi.outer();
    CHECK(apply_depolarizing(rho, {0}, 0.0, 2).max_abs_diff(rho) == 0.0);

    // p = 1 on one qubit: its marginal is maximally mixed, the other keeps its marginal
    const CMatrix out = apply_depolarizing(rho, {0}, 1.0, 2);
    CHECK(partial_trace(out, {2, 2}, {0}).max_abs_diff(CMatrix::identity(2) * cplx(0.5)) < kStructTol);
    CHECK(partial_trace(out, {2, 2}, {1}).max_abs_diff(partial_trace(rho, {2, 2}, {1})) < kStructTol);
    CHECK(std::abs(out.trace() - cplx(1.0)) < kStructTol);
}

TEST_CASE("sampling") {
    Circuit mz;
    mz.n_qubits = 1;
    mz.events.push_back(MeasureOp{0, 0});

    const SampleResult det = sample_counts(mz, DensityOperator::pure(ket0()), 1000, 42);
    CHECK(det.counts.at("0") == 1000);
    CHECK(det.discarded == 0);

    const SampleResult coin = sample_counts(mz, DensityOperator::pure(ket_plus()), 100000, 42);
    CHECK(std::abs(coin.counts.at("0") / 100000.0 - 0.5) < 0.01);

    // determinism
    const SampleResult again = sample_counts(mz, DensityOperator::pure(ket_plus()), 100000, 42);
    CHECK(again.counts == coin.counts);

    // readout confusion [[0.9,0.1],[0.2,0.8]] on |0>: ~10% flips
    NoiseModel nm;
    nm.readout.assign(1, {{{0.9, 0.1}, {0.2, 0.8}}});
    const SampleResult flipped = sample_counts(mz, DensityOperator::pure(ket0()), 100000, 7, &nm);
    CHECK(std::abs(flipped.counts.at("1") / 100000.0 - 0.1) < 0.01);
}

TEST_CASE("sampled distribution converges to the exact one") {
    // protocol fixtures at 1e5 shots: total variation below 2e-2
    const DecCircuit dec = build_dec_circuit(PauliAxis::Z, 0.35);
    const WmmCircuit wmm = build_wmm_circuit(PauliAxis::Y, 0.7353);
    int salt = 0;
    for (const Circuit* c : {&dec.circuit, &wmm.circuit}) {
        const DensityOperator rho_in = with_probes(ket_plus_i(), c->n_qubits);
        const OutcomeDistribution exact = exact_distribution(*c, rho_in);
        const SampleResult sampled = sample_counts(*c, rho_in, 100000, 1000 + static_cast<uint64_t>(salt++));
        CHECK(total_variation(exact.probs, sampled.distribution()) < 2e-2);
    }
}

TEST_CASE("post-selection bookkeeping") {
    // three-state generator, third branch on |+i>: discard fraction 1/2
    const TsmCircuits tsm = build_tsm_circuits(PauliAxis::Z);
    const Circuit& b3 = tsm.branch[2].circuit;
    const DensityOperator rho_in = with_probes(ket_plus_i(), b3.n_qubits);
    const OutcomeDistribution exact = exact_distribution(b3, rho_in);
    CHECK(exact.discarded == doctest::Approx(0.5).epsilon(1e-10));

    const SampleResult sampled = sample_counts(b3, rho_in, 100000, 5);
    CHECK(std::abs(static_cast<double>(sampled.discarded) / 100000.0 - 0.5) < 0.01);

    // all shots discarded: (I+X)|-> = 0
    const TsmCircuits tsx = build_tsm_circuits(PauliAxis::X);
    const DensityOperator minus_in = with_probes(ket_minus(), tsx.branch[2].circuit.n_qubits);
    CHECK_THROWS_AS(sample_counts(tsx.branch[2].circuit, minus_in, 100, 6), PostSelectionStarved);
}

TEST_CASE("circuit validation") {
    Circuit c;
    c.n_qubits = 2;
    c.events = {MeasureOp{0, 0}, MeasureOp{1, 0}};
    CHECK_THROWS_AS(c.validate(), std::invalid_argument); // duplicate slot

    Circuit ps;
    ps.n_qubits = 1;
    ps.events = {PostSelectOp{0, 0}};
    CHECK_THROWS_AS(ps.validate(), std::invalid_argument); // unmeasured slot

    Circuit nan_gate;
    nan_gate.n_qubits = 1;
    nan_gate.events = {GateOp{GateKind::RZ, {0}, std::nan(""), std::nullopt}};
    CHECK_THROWS_AS(nan_gate.validate(), std::invalid_argument);
}

TEST_CASE("noise model config") {
    const NoiseModel nm = NoiseModel::from_config_text(
        "# synthetic profile\ndepol_1q = 0.001\ndepol_2q = 0.01\nreadout = 0.02 0.2\n");
    CHECK(nm.depol_1q == 0.001);
    CHECK(nm.depol_2q == 0.01);
    CHECK(nm.readout_for(0)[0][1] == doctest::Approx(0.02));
    CHECK(nm.readout_for(0)[1][0] == doctest::Approx(0.2));
    CHECK(nm.readout_for(2)[1][1] == doctest::Approx(0.8));

    CHECK_THROWS_AS(NoiseModel::from_config_text("depol_1q = 1.5\n"), std::invalid_argument);
    CHECK_THROWS_AS(NoiseModel::from_config_text("readout = 0.5 0.6 0.7\n"), std::invalid_argument);
}

TEST_CASE("circuit jsonl round trip") {
    const WmmCircuit wmm = build_wmm_circuit(PauliAxis::Y, 0.7353);
    const std::string text = circuit_to_jsonl(wmm.circuit);
    const Circuit back = circuit_from_jsonl(text);
    CHECK(back.n_qubits == wmm.circuit.n_qubits);
    CHECK(back.events.size() == wmm.circuit.events.size());
    // equality of behaviour: identical exact distributions
    const DensityOperator rho_in = with_probes(ket_plus_i(), 3);
    const OutcomeDistribution a = exact_distribution(wmm.circuit, rho_in);
    const OutcomeDistribution b = exact_distribution(back, rho_in);
    CHECK(total_variation(a.probs, b.probs) < 1e-12);
    // serialization is stable
    CHECK(circuit_to_jsonl(back) == text);
}
