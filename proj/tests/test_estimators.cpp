#include "qmd/estimators.hpp"
#include "qmd/harness.hpp"
#include "qmd/rng.hpp"
#include "test_util.hpp"

#include <doctest.h>

#include <cmath>

using namespace qmd;

namespace {

const CMatrix kX = pauli(PauliAxis::X);
const DensityOperator kRhoPlusI = DensityOperator::pure(ket_plus_i());

EstimatorConfig analytic_config(Method m, PauliAxis measured) {
    EstimatorConfig cfg;
    cfg.method = m;
    cfg.measured = measured;
    cfg.analytic = true;
    return cfg;
}

// dilation of a two-outcome PVM: P0 ⊗ I + P1 ⊗ X on (S, probe)
IndirectModel dilation_from_pvm(const CMatrix& p0, const CMatrix& p1) {
    IndirectModel dil;
    dil.unitary = kron(p0, CMatrix::identity(2)) + kron(p1, pauli(PauliAxis::X));
    dil.probe_init = ket0().outer();
    dil.meter_labels = {+1.0, -1.0};
    return dil;
}

// independent channel-algebra oracle for the finite-strength weak-measurement
// protocol: Kraus K_± = cos(tw) P^X_± + sin(tw) P^X_∓ on the system, then the
// apparatus, then a strong X readout
double wmm_backaction_oracle(PauliAxis measured, double theta_w, const DensityOperator& rho) {
    const CMatrix p_plus = ket_plus().outer(), p_minus = ket_minus().outer();
    const CMatrix k_plus = p_plus * cplx(std::cos(theta_w)) + p_minus * cplx(std::sin(theta_w));
    const CMatrix k_minus = p_plus * cplx(std::sin(theta_w)) + p_minus * cplx(std::cos(theta_w));
    const MeasurementModel model = projective_model(measured);
    double corr = 0.0;
    for (int xi = 0; xi < 2; ++xi) {
        const CMatrix& k = xi == 0 ? k_plus : k_minus;
        for (int m = 0; m < 2; ++m) {
            const CMatrix evolved = model.op(m) * k * rho.matrix() * k.dagger() * model.op(m).dagger();
            for (int xf = 0; xf < 2; ++xf) {
                const CMatrix& pf = xf == 0 ? p_plus : p_minus;
                const double p = (pf * evolved).trace().real();
                corr += (xi == 0 ? 1.0 : -1.0) * (xf == 0 ? 1.0 : -1.0) * p;
            }
        }
    }
    return 2.0 * (1.0 - corr / std::cos(2.0 * theta_w));
}

} // namespace

TEST_CASE("analytic mode reproduces the exact values") {
    for (PauliAxis a : {PauliAxis::X, PauliAxis::Y, PauliAxis::Z}) {
        const double exact = qrms_disturbance_exact(projective_model(a), kX, kRhoPlusI);

        CHECK(std::abs(tsm_estimate(analytic_config(Method::TSM, a)).eta_sq_hat - exact) < kStructTol);

        // the probe estimator carries its documented finite-theta deviation
        EstimatorConfig dec = analytic_config(Method::DEC, a);
        const double p_exact = dec_channel_exact(projective_model(a), kX, kRhoPlusI, dec.theta).first;
        CHECK(std::abs(dec_estimate(dec).eta_sq_hat - (1.0 - p_exact) / (dec.theta * dec.theta)) < kStructTol);

        // finite-strength weak measurement agrees with the back-action oracle,
        // which is itself exactly unbiased for these fixtures
        EstimatorConfig wmm = analytic_config(Method::WMM, a);
        const double oracle = wmm_backaction_oracle(a, wmm.theta_w, kRhoPlusI);
        CHECK(std::abs(wmm_estimate(wmm).eta_sq_hat - oracle) < kStructTol);
        CHECK(std::abs(oracle - exact) < kStructTol);
    }
}

TEST_CASE("weak-measurement strength extrapolation") {
    // linear fit in cos(2 theta_w) over three strengths converges to the exact value
    for (PauliAxis a : {PauliAxis::Y, PauliAxis::Z}) {
        std::vector<double> xs, ys;
        for (double tw : {0.76, 0.772, 0.78}) {
            EstimatorConfig cfg = analytic_config(Method::WMM, a);
            cfg.theta_w = tw;
            xs.push_back(std::cos(2.0 * tw));
            ys.push_back(wmm_estimate(cfg).eta_sq_hat);
        }
        const double intercept = polyfit(xs, ys, 1)[0];
        CHECK(std::abs(intercept - qrms_disturbance_exact(projective_model(a), kX, kRhoPlusI)) < 1e-9);
    }
}

TEST_CASE("decoherence-probe readout modes agree") {
    for (DecReadout mode : {DecReadout::probe_projection, DecReadout::probe_X}) {
        EstimatorConfig cfg = analytic_config(Method::DEC, PauliAxis::Z);
        cfg.theta = 0.1;
        cfg.readout_mode = mode;
        const double exact = (1.0 - dec_channel_exact(projective_model(PauliAxis::Z), kX, kRhoPlusI, 0.1).first) / 0.01;
        CHECK(std::abs(dec_estimate(cfg).eta_sq_hat - exact) < kStructTol);
    }
}

TEST_CASE("identity observable is undisturbed") {
    EstimatorConfig cfg = analytic_config(Method::TSM, PauliAxis::Z);
    cfg.disturbed = ObservableB::Identity;
    CHECK(tsm_estimate(cfg).eta_sq_hat == 0.0);
}

TEST_CASE("weak joint distribution") {
    for (PauliAxis a : {PauliAxis::X, PauliAxis::Y, PauliAxis::Z}) {
        const IndirectModel dil = indirect_model(a);
        const auto wjd = wjd_exact(kX, kRhoPlusI, dil);

        // marginal over b_i equals the strong distribution of b_f
        for (double bf : {+1.0, -1.0}) {
            cplx marginal = 0.0;
            for (const WjdEntry& e : wjd)
                if (e.b_f == bf) marginal += e.value;
            const CMatrix pf = bf > 0 ? ket_plus().outer() : ket_minus().outer();
            const CMatrix evolved = dil.unitary * kron(kRhoPlusI.matrix(), dil.probe_init) * dil.unitary.dagger();
            const cplx strong = (kron(pf, CMatrix::identity(2)) * evolved).trace();
            CHECK(std::abs(marginal - strong) < kFloatTol);
        }

        // reconstruction of the exact disturbance
        CHECK(std::abs(wjd_disturbance(wjd) - qrms_disturbance_exact(projective_model(a), kX, kRhoPlusI)) <
              kStructTol);
    }

    // commuting case: all entries real and nonnegative (joint spectral oracle)
    const auto wjd_comm = wjd_exact(kX, kRhoPlusI, indirect_model(PauliAxis::X));
    for (const WjdEntry& e : wjd_comm) {
        CHECK(std::abs(e.value.imag()) < kFloatTol);
        CHECK(e.value.real() >= -kFloatTol);
    }

    // random instruments reconstruct as well
    SplitMix64 rng(41);
    for (int rep = 0; rep < 10; ++rep) {
        const IndirectModel dil = test::random_instrument_dilation(rng);
        const MeasurementModel model = model_from_dilation(dil, 2);
        const DensityOperator rho(test::random_pure_state(2, rng).outer());
        CHECK(std::abs(wjd_disturbance(wjd_exact(kX, rho, dil)) - qrms_disturbance_exact(model, kX, rho)) <
              kStructTol);
    }
}

TEST_CASE("weak values") {
    const IndirectModel dil = indirect_model(PauliAxis::Z);
    const CMatrix id = CMatrix::identity(2);
    const CMatrix p_plus = ket_plus().outer(), p_minus = ket_minus().outer();

    CHECK(std::abs(weak_value(dil, id, p_plus, kRhoPlusI) - cplx(1.0)) < kFloatTol);

    const cplx sum = weak_value(dil, p_plus, p_minus, kRhoPlusI) + weak_value(dil, p_minus, p_minus, kRhoPlusI);
    CHECK(std::abs(sum - cplx(1.0)) < kFloatTol);

    // p_w(b_i, b_f) = weak value * p(b_f)
    const auto wjd = wjd_exact(kX, kRhoPlusI, dil);
    for (const WjdEntry& e : wjd) {
        const CMatrix pi = e.b_i > 0 ? p_plus : p_minus;
        const CMatrix pf = e.b_f > 0 ? p_plus : p_minus;
        const CMatrix evolved = dil.unitary * kron(kRhoPlusI.matrix(), dil.probe_init) * dil.unitary.dagger();
        const cplx p_bf = (kron(pf, CMatrix::identity(2)) * evolved).trace();
        CHECK(std::abs(weak_value(dil, pi, pf, kRhoPlusI) * p_bf - e.value) < kFloatTol);
    }

    // an anomalous fixture: rotated apparatus axis makes Re of a weak value
    // leave [0, 1] (search over tilt angles and input states)
    bool found = false;
    for (double beta = 0.1; beta < 1.5 && !found; beta += 0.1) {
        const CMatrix axis = kX * cplx(std::sin(2.0 * beta)) + pauli(PauliAxis::Z) * cplx(std::cos(2.0 * beta));
        const CMatrix p0 = (id + axis) * cplx(0.5), p1 = (id - axis) * cplx(0.5);
        const IndirectModel tilted = dilation_from_pvm(p0, p1);
        for (const CVector& psi : {ket_plus_i(), ket0(), ket_minus_i()}) {
            const DensityOperator rho(psi.outer());
            for (const CMatrix* pf : {&p_plus, &p_minus}) {
                try {
                    const double re = weak_value(tilted, p_plus, *pf, rho).real();
                    if (re < -0.01 || re > 1.01) found = true;
                } catch (const std::domain_error&) {
                }
            }
        }
    }
    CHECK(found);

    // vanishing post-selection probability
    CHECK_THROWS_AS(weak_value(dilation_from_pvm(ket0().outer(), ket1().outer()), p_plus, ket1().outer(),
                               DensityOperator::pure(ket0())),
                    std::domain_error);
}

TEST_CASE("correlator bound keeps the estimate in range") {
    // |sum x_i x_f p| <= 1, so eta^2 lies in 2(1 ∓ 1/cos 2 theta_w)
    const double tw = 0.7353;
    const double bound = 1.0 / std::cos(2.0 * tw);
    SplitMix64 rng(42);
    for (int rep = 0; rep < 8; ++rep) {
        EstimatorConfig cfg;
        cfg.method = Method::WMM;
        cfg.measured = rep % 2 ? PauliAxis::Y : PauliAxis::Z;
        cfg.theta_w = tw;
        cfg.shots = 50 + static_cast<long long>(rng.next_u64() % 200);
        cfg.seed = rng.next_u64();
        const double eta = wmm_estimate(cfg).eta_sq_hat;
        CHECK(eta >= 2.0 * (1.0 - bound) - kFloatTol);
        CHECK(eta <= 2.0 * (1.0 + bound) + kFloatTol);
    }
}

TEST_CASE("apparatus outcome relabeling leaves the statistics alone") {
    // DEC and WMM marginalize over m; flipping the recorded m bit changes nothing
    const DecCircuit dec = build_dec_circuit(PauliAxis::Y, 0.35);
    const DensityOperator rho_in(kron(kron(ket_plus_i().outer(), ket0().outer()), ket0().outer()));
    const OutcomeDistribution dist = exact_distribution(dec.circuit, rho_in);
    auto p_plus_of = [&](bool flip_m) {
        double p = 0.0;
        for (const auto& [rec, w] : dist.probs) {
            std::string r = rec;
            if (flip_m) r[static_cast<size_t>(dec.slot_m)] = r[static_cast<size_t>(dec.slot_m)] == '0' ? '1' : '0';
            if (r[static_cast<size_t>(dec.slot_probe)] == '0') p += w;
        }
        return p;
    };
    CHECK(p_plus_of(false) == doctest::Approx(p_plus_of(true)).epsilon(1e-14));
}

TEST_CASE("shot-noise scaling") {
    // per-run SD shrinks like shots^(-1/2) within a factor 1.5 per decade
    for (Method m : {Method::TSM, Method::WMM, Method::DEC}) {
        std::vector<double> sds;
        for (long long shots : {1000LL, 10000LL, 100000LL}) {
            std::vector<double> values;
            for (int i = 0; i < 30; ++i) {
                EstimatorConfig cfg;
                cfg.method = m;
                cfg.measured = PauliAxis::Y;
                cfg.shots = shots;
                cfg.seed = 7000 + static_cast<uint64_t>(i);
                values.push_back(run_estimator(cfg).eta_sq_hat);
            }
            sds.push_back(stats(values, 2.0).sd);
        }
        for (size_t i = 1; i < sds.size(); ++i) {
            const double ratio = sds[i - 1] / sds[i];
            CHECK(ratio > std::sqrt(10.0) / 1.5);
            CHECK(ratio < std::sqrt(10.0) * 1.5);
        }
    }
}

TEST_CASE("config validation") {
    EstimatorConfig cfg;
    cfg.method = Method::WMM;
    cfg.theta_w = M_PI / 4.0; // cos(2 theta_w) = 0
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);

    EstimatorConfig dec;
    dec.method = Method::DEC;
    dec.theta = 1e-7; // theta^2 underflow
    CHECK_THROWS_AS(dec.validate(), std::invalid_argument);

    EstimatorConfig bad_shots;
    bad_shots.shots = 0;
    CHECK_THROWS_AS(bad_shots.validate(), std::invalid_argument);
}

TEST_CASE("post-selection starvation surfaces from the estimator") {
    // nearly |->: the (I+X)-branch acceptance is sin^2(1e-4), so a short run
    // discards every shot
    const double eps = 1e-4;
    CVector nearly_minus(2);
    for (int i = 0; i < 2; ++i) nearly_minus[i] = std::cos(eps) * ket_minus()[i] + std::sin(eps) * ket_plus()[i];
    EstimatorConfig cfg;
    cfg.method = Method::TSM;
    cfg.measured = PauliAxis::X;
    cfg.input_state = nearly_minus;
    cfg.shots = 300;
    cfg.seed = 99;
    CHECK_THROWS_AS(tsm_estimate(cfg), PostSelectionStarved);

    // the exactly-degenerate state drops the zero-weight branch instead
    EstimatorConfig degenerate = cfg;
    degenerate.input_state = ket_minus();
    degenerate.analytic = true;
    CHECK(std::abs(tsm_estimate(degenerate).eta_sq_hat) < kStructTol);
}

TEST_CASE("run results serialize as versioned json lines") {
    EstimatorConfig cfg = analytic_config(Method::DEC, PauliAxis::Z);
    const RunResult rr = dec_estimate(cfg);
    const std::string line = rr.to_json();
    CHECK(line.find("\"v\":1") != std::string::npos);
    CHECK(line.find("\"method\":\"DEC\"") != std::string::npos);
    CHECK(line.find("eta_sq_hat") != std::string::npos);
    CHECK(line.find('\n') == std::string::npos);
}
