#include "qmd/harness.hpp"
#include "qmd/rng.hpp"
#include "test_util.hpp"

#include <doctest.h>

#include <cmath>

using namespace qmd;

TEST_CASE("statistics") {
    const Stats all_two = stats({2.0, 2.0, 2.0}, 2.0);
    CHECK(all_two.mean == 2.0);
    CHECK(all_two.sd == 0.0);
    CHECK(all_two.bias == 0.0);
    CHECK(all_two.rmse == 0.0);

    // hand arithmetic with the divisor-n convention
    const Stats pair = stats({1.0, 3.0}, 2.0);
    CHECK(pair.mean == 2.0);
    CHECK(pair.sd == 1.0);
    CHECK(pair.bias == 0.0);
    CHECK(pair.rmse == 1.0);

    // rmse^2 = sd^2 + bias^2 exactly on random samples
    SplitMix64 rng(61);
    for (int rep = 0; rep < 20; ++rep) {
        std::vector<double> values;
        for (int i = 0; i < 7; ++i) values.push_back(4.0 * rng.next_double() - 1.0);
        const Stats st = stats(values, 0.7);
        CHECK(std::abs(st.rmse * st.rmse - st.sd * st.sd - st.bias * st.bias) < 1e-12);
    }

    CHECK_THROWS_AS(stats({}, 0.0), std::invalid_argument);
}

TEST_CASE("theoretical values") {
    CHECK(theoretical_disturbance(PauliAxis::X) == 0.0);
    CHECK(theoretical_disturbance(PauliAxis::Y) == 2.0);
    CHECK(theoretical_disturbance(PauliAxis::Z) == 2.0);
}

TEST_CASE("analytic table reproduces the theoretical column on commuting cells") {
    TableConfig cfg;
    cfg.analytic = true;
    cfg.n_iterations = 2;
    cfg.threads = 1;
    const std::vector<EstimateSummary> rows = run_table(cfg);
    REQUIRE(rows.size() == 9);
    for (const EstimateSummary& r : rows) {
        CHECK(std::abs(r.rmse * r.rmse - r.sd * r.sd - r.bias * r.bias) < 1e-12);
        if (r.measured == PauliAxis::X && (r.method == Method::TSM || r.method == Method::DEC)) {
            CHECK(std::abs(r.mean) < kStructTol);
            CHECK(r.sd < kStructTol);
        }
        if (r.method == Method::TSM && r.measured != PauliAxis::X) CHECK(std::abs(r.mean - 2.0) < kStructTol);
    }
}

TEST_CASE("single-iteration cells degenerate cleanly") {
    TableConfig cfg;
    cfg.n_iterations = 1;
    cfg.shots_total = 2000;
    const EstimateSummary s = run_cell(cfg, Method::DEC, PauliAxis::Y);
    CHECK(s.sd == 0.0);
    CHECK(s.rmse == doctest::Approx(std::abs(s.bias)).epsilon(1e-12));
}

TEST_CASE("deterministic outputs") {
    TableConfig cfg;
    cfg.shots_total = 5000;
    cfg.n_iterations = 5;
    cfg.methods = {Method::DEC, Method::WMM};
    cfg.measurements = {PauliAxis::Y};
    cfg.noise = default_synthetic_noise();
    cfg.noise_label = "synthetic";

    const std::vector<EstimateSummary> a = run_table(cfg);
    const std::vector<EstimateSummary> b = run_table(cfg);
    CHECK(summaries_to_csv(a) == summaries_to_csv(b));
    REQUIRE(a.size() == b.size());
    for (size_t i = 0; i < a.size(); ++i) CHECK(a[i].to_json() == b[i].to_json());

    // csv header is the documented schema
    CHECK(summaries_to_csv(a).rfind("method,measured,noise,mitigation,mean,sd,bias,rmse,shots,iterations,theta,"
                                    "theta_w,seed\n", 0) == 0);
}

TEST_CASE("coupling sweep in analytic mode tracks the exact channel") {
    ThetaSweepConfig cfg;
    cfg.analytic = true;
    cfg.n_iterations = 1;
    cfg.threads = 1;
    const SweepRecord rec = run_theta_sweep(cfg);
    REQUIRE(rec.cells.size() == cfg.thetas.size());

    const MeasurementModel mz = projective_model(PauliAxis::Z);
    const DensityOperator rho = DensityOperator::pure(ket_plus_i());
    std::vector<double> xs, oracle;
    for (const SweepCell& c : rec.cells) {
        const double p = dec_channel_exact(mz, pauli(PauliAxis::X), rho, c.theta).first;
        CHECK(std::abs(c.mean - (1.0 - p) / (c.theta * c.theta)) < 1e-10);
        xs.push_back(c.theta);
        oracle.push_back((1.0 - p) / (c.theta * c.theta));
    }
    // the quadratic fit through the sweep agrees with the fit through the oracle curve
    const double oracle_intercept = polyfit(xs, oracle, 2)[0];
    CHECK(std::abs(rec.fit("quadratic").intercept - oracle_intercept) < 1e-9);

    // on a small-coupling grid the quadratic intercept recovers the disturbance
    ThetaSweepConfig small = cfg;
    small.thetas = {0.05, 0.1, 0.15, 0.2, 0.25, 0.3, 0.35, 0.4, 0.45};
    const SweepRecord rec_small = run_theta_sweep(small);
    CHECK(std::abs(rec_small.fit("quadratic").intercept - 2.0) < 0.05);
    CHECK(rec_small.fit("quadratic").residual_sum_sq < rec_small.fit("linear").residual_sum_sq);

    ThetaSweepConfig too_few = cfg;
    too_few.thetas = {0.1, 0.2};
    CHECK_THROWS_AS(run_theta_sweep(too_few), std::invalid_argument);
}

TEST_CASE("noisy sweep inflates the small-coupling cells") {
    ThetaSweepConfig cfg;
    cfg.thetas = {0.05, 0.35, 0.7};
    cfg.shots_total = 50000;
    cfg.n_iterations = 5;
    cfg.noise = default_synthetic_noise();
    cfg.threads = 2;
    const SweepRecord rec = run_theta_sweep(cfg);
    CHECK(rec.cells.front().sd > rec.cells.back().sd);
    CHECK(std::abs(rec.cells.front().mean - 2.0) > std::abs(rec.cells.back().mean - 2.0));
}

TEST_CASE("weak-strength sweep extrapolates to the exact value in analytic mode") {
    ThetaWSweepConfig cfg;
    cfg.analytic = true;
    cfg.n_iterations = 1;
    const ThetaWSweepRecord rec = run_thetaw_sweep(cfg);
    CHECK(std::abs(rec.intercept - 2.0) < 1e-9);
}

TEST_CASE("exact report carries the headline numbers") {
    const std::string report = run_exact_report();
    CHECK(report.find("projective X: eta^2 = 0") != std::string::npos);
    CHECK(report.find("projective Y: eta^2 = 2") != std::string::npos);
    CHECK(report.find("reconstructed eta^2") != std::string::npos);
    CHECK(report.find("D_l1") != std::string::npos);
}

TEST_CASE("synthetic noise preset shape") {
    const NoiseModel nm = default_synthetic_noise();
    CHECK(nm.depol_1q == 0.001);
    CHECK(nm.depol_2q == 0.01);
    CHECK(nm.readout_for(0)[0][1] == doctest::Approx(0.02));
    CHECK(nm.readout_for(0)[1][0] == doctest::Approx(0.20));
    nm.validate();
}
