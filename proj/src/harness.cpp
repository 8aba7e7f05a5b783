#include "qmd/harness.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <iomanip>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace qmd {

using json = nlohmann::json;

Stats stats(const std::vector<double>& values, double theoretical) {
    if (values.empty()) throw std::invalid_argument("stats: empty sample");
    const double n = static_cast<double>(values.size());
    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= n;
    double var = 0.0, msq = 0.0;
    for (double v : values) {
        var += (v - mean) * (v - mean);
        msq += (v - theoretical) * (v - theoretical);
    }
    return {mean, std::sqrt(var / n), mean - theoretical, std::sqrt(msq / n)};
}

double theoretical_disturbance(PauliAxis measured) {
    return measured == PauliAxis::X ? 0.0 : 2.0;
}

std::string EstimateSummary::to_json() const {
    json j;
    j["v"] = 1;
    j["method"] = to_string(method);
    j["measured"] = to_string(measured);
    j["noise"] = noise_label;
    j["mitigation"] = mitigation_label;
    j["mean"] = mean;
    j["sd"] = sd;
    j["bias"] = bias;
    j["rmse"] = rmse;
    j["iterations"] = n_iterations;
    j["shots"] = shots_total;
    j["theoretical"] = theoretical;
    j["theta"] = theta;
    j["theta_w"] = theta_w;
    j["seed"] = base_seed;
    j["values"] = values;
    return j.dump();
}

std::string summaries_to_csv(const std::vector<EstimateSummary>& rows, bool times_1e3) {
    std::ostringstream out;
    out << "method,measured,noise,mitigation,mean,sd,bias,rmse,shots,iterations,theta,theta_w,seed\n";
    out << std::setprecision(17);
    const double scale = times_1e3 ? 1e3 : 1.0;
    for (const EstimateSummary& r : rows) {
        out << to_string(r.method) << ',' << to_string(r.measured) << ',' << r.noise_label << ','
            << r.mitigation_label << ',' << r.mean << ',' << r.sd * scale << ',' << r.bias * scale << ','
            << r.rmse * scale << ',' << r.shots_total << ',' << r.n_iterations << ',' << r.theta << ','
            << r.theta_w << ',' << r.base_seed << '\n';
    }
    return out.str();
}

namespace {

EstimatorConfig cell_config(const TableConfig& cfg, Method method, PauliAxis measured, uint64_t seed,
                            long long shots_per_iter) {
    EstimatorConfig ec;
    ec.method = method;
    ec.measured = measured;
    ec.shots = shots_per_iter;
    ec.seed = seed;
    ec.theta = cfg.theta;
    ec.theta_w = cfg.theta_w;
    ec.analytic = cfg.analytic;
    ec.noise = cfg.noise;
    ec.mitigation = cfg.mitigation;
    return ec;
}

void run_parallel(int n_tasks, int threads, const std::function<void(int)>& task) {
    if (threads <= 0) threads = static_cast<int>(std::thread::hardware_concurrency());
    threads = std::max(1, std::min(threads, n_tasks));
    if (threads == 1) {
        for (int i = 0; i < n_tasks; ++i) task(i);
        return;
    }
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    pool.reserve(static_cast<size_t>(threads));
    for (int t = 0; t < threads; ++t)
        pool.emplace_back([&] {
            for (int i = next.fetch_add(1); i < n_tasks; i = next.fetch_add(1)) task(i);
        });
    for (std::thread& th : pool) th.join();
}

} // namespace

EstimateSummary run_cell(const TableConfig& cfg, Method method, PauliAxis measured) {
    if (cfg.n_iterations < 1) throw std::invalid_argument("run_cell: need at least one iteration");
    const long long shots_per_iter = std::max<long long>(1, cfg.shots_total / cfg.n_iterations);

    std::vector<double> values(static_cast<size_t>(cfg.n_iterations));
    std::vector<uint64_t> seeds(static_cast<size_t>(cfg.n_iterations));
    run_parallel(cfg.n_iterations, cfg.threads, [&](int i) {
        const uint64_t seed = cfg.base_seed + static_cast<uint64_t>(i);
        seeds[static_cast<size_t>(i)] = seed;
        values[static_cast<size_t>(i)] =
            run_estimator(cell_config(cfg, method, measured, seed, shots_per_iter)).eta_sq_hat;
    });

    const double theo = theoretical_disturbance(measured);
    const Stats st = stats(values, theo);
    EstimateSummary s;
    s.method = method;
    s.measured = measured;
    s.noise_label = cfg.noise_label;
    s.mitigation_label = cfg.mitigation_label;
    s.mean = st.mean;
    s.sd = st.sd;
    s.bias = st.bias;
    s.rmse = st.rmse;
    s.n_iterations = cfg.n_iterations;
    s.shots_total = cfg.shots_total;
    s.theoretical = theo;
    s.theta = cfg.theta;
    s.theta_w = cfg.theta_w;
    s.base_seed = cfg.base_seed;
    s.seeds = std::move(seeds);
    s.values = std::move(values);
    return s;
}

std::vector<EstimateSummary> run_table(const TableConfig& cfg) {
    struct CellId {
        Method m;
        PauliAxis a;
    };
    std::vector<CellId> cells;
    for (PauliAxis a : cfg.measurements)
        for (Method m : cfg.methods) cells.push_back({m, a});

    std::vector<EstimateSummary> out(cells.size());
    // iterations already fan out inside run_cell; run cells serially to keep
    // thread usage bounded and output order fixed
    for (size_t i = 0; i < cells.size(); ++i) out[i] = run_cell(cfg, cells[i].m, cells[i].a);
    return out;
}

const FitResult& SweepRecord::fit(const std::string& kind) const {
    for (const FitResult& f : fits)
        if (f.kind == kind) return f;
    throw std::invalid_argument("SweepRecord: no fit of kind " + kind);
}

SweepRecord run_theta_sweep(const ThetaSweepConfig& cfg) {
    if (cfg.thetas.size() < 3) throw std::invalid_argument("run_theta_sweep: need at least 3 grid points");
    for (size_t i = 1; i < cfg.thetas.size(); ++i)
        if (cfg.thetas[i] <= cfg.thetas[i - 1])
            throw std::invalid_argument("run_theta_sweep: theta grid must be strictly increasing");

    TableConfig tc;
    tc.shots_total = cfg.shots_total;
    tc.n_iterations = cfg.n_iterations;
    tc.base_seed = cfg.base_seed;
    tc.analytic = cfg.analytic;
    tc.noise = cfg.noise;
    tc.mitigation = cfg.mitigation;
    tc.threads = 1;

    SweepRecord rec;
    rec.cells.resize(cfg.thetas.size());
    run_parallel(static_cast<int>(cfg.thetas.size()), cfg.threads, [&](int i) {
        TableConfig cell_cfg = tc;
        cell_cfg.theta = cfg.thetas[static_cast<size_t>(i)];
        const EstimateSummary s = run_cell(cell_cfg, Method::DEC, cfg.measured);
        rec.cells[static_cast<size_t>(i)] = {cell_cfg.theta, s.mean, s.sd, s.values};
    });

    std::vector<double> xs, ys;
    for (const SweepCell& c : rec.cells) {
        xs.push_back(c.theta);
        ys.push_back(c.mean);
    }
    for (int degree : {1, 2}) {
        FitResult f;
        f.kind = degree == 1 ? "linear" : "quadratic";
        f.coefficients = polyfit(xs, ys, degree);
        f.intercept = f.coefficients[0];
        f.residual_sum_sq = 0.0;
        for (size_t i = 0; i < xs.size(); ++i) {
            double pred = 0.0, p = 1.0;
            for (double c : f.coefficients) {
                pred += c * p;
                p *= xs[i];
            }
            f.residual_sum_sq += (ys[i] - pred) * (ys[i] - pred);
        }
        rec.fits.push_back(std::move(f));
    }
    return rec;
}

ThetaWSweepRecord run_thetaw_sweep(const ThetaWSweepConfig& cfg) {
    ThetaWSweepRecord rec;
    TableConfig tc;
    tc.shots_total = cfg.shots_total;
    tc.n_iterations = cfg.n_iterations;
    tc.base_seed = cfg.base_seed;
    tc.analytic = cfg.analytic;
    tc.noise = cfg.noise;
    tc.threads = 1;
    std::vector<double> xs;
    for (double tw : cfg.theta_ws) {
        TableConfig cell_cfg = tc;
        cell_cfg.theta_w = tw;
        const EstimateSummary s = run_cell(cell_cfg, Method::WMM, cfg.measured);
        rec.theta_ws.push_back(tw);
        rec.means.push_back(s.mean);
        rec.sds.push_back(s.sd);
        xs.push_back(std::cos(2.0 * tw));
    }
    rec.intercept = polyfit(xs, rec.means, 1)[0];
    return rec;
}

NoiseModel default_synthetic_noise() {
    NoiseModel nm;
    nm.depol_1q = 0.001;
    nm.depol_2q = 0.01;
    nm.readout.assign(1, {{{0.98, 0.02}, {0.20, 0.80}}});
    return nm;
}

std::string run_exact_report() {
    std::ostringstream out;
    out << std::setprecision(12);
    const DensityOperator rho = DensityOperator::pure(ket_plus_i());
    const CMatrix B = pauli(PauliAxis::X);

    out << "exact QRMS disturbance, input |+i>, disturbed observable X\n";
    for (PauliAxis a : {PauliAxis::X, PauliAxis::Y, PauliAxis::Z}) {
        const MeasurementModel model = projective_model(a);
        out << "  projective " << to_string(a) << ": eta^2 = " << qrms_disturbance_exact(model, B, rho) << "\n";
    }

    out << "\nweak joint distributions p_w(b_i, b_f)  [Re highlighted]\n";
    for (PauliAxis a : {PauliAxis::X, PauliAxis::Y, PauliAxis::Z}) {
        out << "  projective " << to_string(a) << ":\n";
        const auto wjd = wjd_exact(B, rho, indirect_model(a));
        for (const WjdEntry& e : wjd)
            out << "    b_i=" << std::showpos << e.b_i << " b_f=" << e.b_f << std::noshowpos
                << "  Re=" << e.value.real() << "  Im=" << e.value.imag() << "\n";
        out << "    reconstructed eta^2 = " << wjd_disturbance(wjd) << "\n";
    }

    out << "\nlocally uniform disturbance (64-point orbit grid)\n";
    const auto grid = default_orbit_grid();
    for (PauliAxis a : {PauliAxis::X, PauliAxis::Y, PauliAxis::Z}) {
        const auto lu = locally_uniform_disturbance(projective_model(a), B, rho, grid);
        out << "  projective " << to_string(a) << ": max eta^2 = " << lu.value << " at t = " << lu.argmax_t << "\n";
    }

    out << "\nprobe decoherence identity D_l1 = 2 (1 - <P^X_+>)\n";
    for (double theta : {0.1, 0.35, 0.7}) {
        const auto [p_plus, probe] = dec_channel_exact(projective_model(PauliAxis::Z), B, rho, theta);
        (void)probe;
        out << "  theta=" << theta << ": D_l1 = " << decoherence_l1(projective_model(PauliAxis::Z), B, rho, theta)
            << ", 2(1-p+) = " << 2.0 * (1.0 - p_plus) << "\n";
    }
    return out.str();
}

} // namespace qmd
