#include "qmd/harness.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

namespace fs = std::filesystem;
using namespace qmd;

namespace {

struct GlobalOpts {
    uint64_t seed = 20240811;
    long long shots = 100000;
    int iterations = 10;
    std::string noise_file;
    std::string out_dir;
    std::string format = "csv";
    std::string config_file;
    bool analytic = false;
    bool synthetic_noise = false;
    bool mitigate = false;
    int threads = 0;
    double theta = 0.35;
    double theta_w = 0.7353;
    std::string measured = "Z";
    std::string zne_file;
};

// config file mirrors the CLI flags as key = value lines; CLI overrides file
void apply_config_file(GlobalOpts& g, CLI::App& app) {
    if (g.config_file.empty()) return;
    std::ifstream in(g.config_file);
    if (!in) throw CLI::ValidationError("--config", "cannot open " + g.config_file);
    std::string line;
    while (std::getline(in, line)) {
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        const auto eq = line.find('=');
        if (eq == std::string::npos) continue;
        auto trim = [](std::string s) {
            const auto b = s.find_first_not_of(" \t\r");
            const auto e = s.find_last_not_of(" \t\r");
            return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
        };
        const std::string key = trim(line.substr(0, eq)), val = trim(line.substr(eq + 1));
        if (key.empty()) continue;
        CLI::Option* opt = app.get_option_no_throw("--" + key);
        if (!opt) throw CLI::ValidationError("--config", "unknown key " + key);
        if (opt->count() == 0) opt->add_result(val)->run_callback();
    }
}

std::optional<NoiseModel> resolve_noise(const GlobalOpts& g) {
    if (!g.noise_file.empty()) return NoiseModel::load(g.noise_file);
    if (g.synthetic_noise) return default_synthetic_noise();
    return std::nullopt;
}

MitigationPlan resolve_mitigation(const GlobalOpts& g, const std::optional<NoiseModel>& noise) {
    MitigationPlan plan;
    if (!g.mitigate) return plan;
    const NoiseModel nm = noise.value_or(NoiseModel{});
    plan.rem_per_qubit = detector_tomography(1, 1000000, g.seed ^ 0xCA11B7A7E5ULL, nm);
    plan.zne = g.zne_file.empty() ? ZneSchedule{} : ZneSchedule::load(g.zne_file);
    return plan;
}

void write_or_print(const GlobalOpts& g, const std::string& name, const std::string& payload) {
    if (g.out_dir.empty()) {
        std::cout << payload;
        return;
    }
    fs::create_directories(g.out_dir);
    const fs::path path = fs::path(g.out_dir) / name;
    std::ofstream out(path, std::ios::binary);
    out << payload;
    std::cout << "wrote " << path.string() << "\n";
}

void emit_summaries(const GlobalOpts& g, const std::vector<EstimateSummary>& rows, const std::string& stem) {
    if (g.format == "jsonl") {
        std::string payload;
        for (const EstimateSummary& r : rows) payload += r.to_json() + "\n";
        write_or_print(g, stem + ".jsonl", payload);
    } else {
        write_or_print(g, stem + ".csv", summaries_to_csv(rows));
    }
}

TableConfig base_table_config(const GlobalOpts& g) {
    TableConfig tc;
    tc.shots_total = g.shots;
    tc.n_iterations = g.iterations;
    tc.base_seed = g.seed;
    tc.theta = g.theta;
    tc.theta_w = g.theta_w;
    tc.analytic = g.analytic;
    tc.noise = resolve_noise(g);
    tc.noise_label = tc.noise ? (g.noise_file.empty() ? "synthetic" : g.noise_file) : "none";
    tc.mitigation = resolve_mitigation(g, tc.noise);
    tc.mitigation_label = g.mitigate ? "rem+zne" : "none";
    tc.threads = g.threads;
    return tc;
}

int run_single(const GlobalOpts& g, Method method) {
    const TableConfig tc = base_table_config(g);
    const EstimateSummary s = run_cell(tc, method, pauli_axis_from_string(g.measured));
    emit_summaries(g, {s}, std::string("run_") + to_string(method));
    std::cout << to_string(method) << "/" << g.measured << ": mean=" << s.mean << " sd=" << s.sd
              << " bias=" << s.bias << " rmse=" << s.rmse << "\n";
    return kOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"quantum measurement disturbance toolkit"};
    app.require_subcommand(1);

    GlobalOpts g;
    app.add_option("--seed", g.seed, "base seed; iteration i uses seed+i");
    app.add_option("--shots", g.shots, "total shots per measuring device, split across iterations");
    app.add_option("--iterations", g.iterations, "number of runs per ensemble");
    app.add_option("--noise", g.noise_file, "noise profile file (depol_1q, depol_2q, readout)");
    app.add_option("--out", g.out_dir, "output directory");
    app.add_option("--format", g.format, "csv or jsonl")->check(CLI::IsMember({"csv", "jsonl"}));
    app.add_option("--config", g.config_file, "config file mirroring these flags (CLI wins)");
    app.add_flag("--analytic", g.analytic, "use exact Born probabilities instead of sampling");
    app.add_flag("--synthetic-noise", g.synthetic_noise, "use the built-in synthetic noise preset");
    app.add_flag("--mitigate", g.mitigate, "apply readout-error mitigation and zero-noise extrapolation");
    app.add_option("--threads", g.threads, "worker threads (0 = auto)");
    app.add_option("--theta", g.theta, "DEC coupling strength");
    app.add_option("--theta-w", g.theta_w, "weak-measurement coupling strength");
    app.add_option("--measured", g.measured, "measured Pauli (X, Y or Z)");
    app.add_option("--zne", g.zne_file, "ZNE schedule file (scale_factors, extrapolator, repeats)");

    CLI::App* cmd_exact = app.add_subcommand("exact", "print exact disturbance values, WJD tables and coherence");
    CLI::App* cmd_tsm = app.add_subcommand("tsm", "run the three-state estimator ensemble");
    CLI::App* cmd_wmm = app.add_subcommand("wmm", "run the weak-measurement estimator ensemble");
    CLI::App* cmd_dec = app.add_subcommand("dec", "run the decoherence-probe estimator ensemble");
    CLI::App* cmd_table = app.add_subcommand("table", "run the full methods x measurements table");
    CLI::App* cmd_sweep_t = app.add_subcommand("sweep-theta", "DEC coupling sweep with linear/quadratic fits");
    CLI::App* cmd_sweep_tw = app.add_subcommand("sweep-thetaw", "WMM strength sweep with extrapolation in cos(2 theta_w)");
    CLI::App* cmd_calibrate = app.add_subcommand("calibrate", "detector tomography; emits a confusion-matrix CSV");
    CLI::App* cmd_mitigate = app.add_subcommand("mitigate", "paired raw vs mitigated ensembles under noise");

    int calib_qubits = 1;
    cmd_calibrate->add_option("--qubits", calib_qubits, "register size to calibrate");
    std::string mit_method = "DEC";
    cmd_mitigate->add_option("--method", mit_method, "estimator to compare (TSM, WMM or DEC)");

    CLI11_PARSE(app, argc, argv);

    try {
        apply_config_file(g, app);

        if (cmd_exact->parsed()) {
            write_or_print(g, "exact.txt", run_exact_report());
            return kOk;
        }
        if (cmd_tsm->parsed()) return run_single(g, Method::TSM);
        if (cmd_wmm->parsed()) return run_single(g, Method::WMM);
        if (cmd_dec->parsed()) return run_single(g, Method::DEC);
        if (cmd_table->parsed()) {
            const std::vector<EstimateSummary> rows = run_table(base_table_config(g));
            emit_summaries(g, rows, "table");
            for (const EstimateSummary& r : rows)
                std::cout << to_string(r.method) << "/" << to_string(r.measured) << ": mean=" << r.mean
                          << " sd=" << r.sd << " bias=" << r.bias << " rmse=" << r.rmse << "\n";
            return kOk;
        }
        if (cmd_sweep_t->parsed()) {
            ThetaSweepConfig sc;
            sc.measured = pauli_axis_from_string(g.measured);
            sc.shots_total = g.shots;
            sc.n_iterations = g.iterations;
            sc.base_seed = g.seed;
            sc.analytic = g.analytic;
            sc.noise = resolve_noise(g);
            sc.mitigation = resolve_mitigation(g, sc.noise);
            sc.threads = g.threads;
            const SweepRecord rec = run_theta_sweep(sc);
            std::ostringstream csv;
            csv << "theta,mean,sd\n" << std::setprecision(17);
            for (const SweepCell& c : rec.cells) csv << c.theta << ',' << c.mean << ',' << c.sd << '\n';
            write_or_print(g, "sweep_theta.csv", csv.str());
            for (const FitResult& f : rec.fits)
                std::cout << f.kind << " fit: intercept=" << f.intercept << " rss=" << f.residual_sum_sq << "\n";
            return kOk;
        }
        if (cmd_sweep_tw->parsed()) {
            ThetaWSweepConfig sc;
            sc.measured = pauli_axis_from_string(g.measured);
            sc.shots_total = g.shots;
            sc.n_iterations = g.iterations;
            sc.base_seed = g.seed;
            sc.analytic = g.analytic;
            sc.noise = resolve_noise(g);
            const ThetaWSweepRecord rec = run_thetaw_sweep(sc);
            std::ostringstream csv;
            csv << "theta_w,mean,sd\n" << std::setprecision(17);
            for (size_t i = 0; i < rec.theta_ws.size(); ++i)
                csv << rec.theta_ws[i] << ',' << rec.means[i] << ',' << rec.sds[i] << '\n';
            write_or_print(g, "sweep_thetaw.csv", csv.str());
            std::cout << "intercept at zero strength: " << rec.intercept << "\n";
            return kOk;
        }
        if (cmd_calibrate->parsed()) {
            const NoiseModel nm = resolve_noise(g).value_or(NoiseModel{});
            const ConfusionMatrix c = detector_tomography(calib_qubits, g.shots, g.seed, nm);
            write_or_print(g, "confusion.csv", c.to_csv());
            return kOk;
        }
        if (cmd_mitigate->parsed()) {
            GlobalOpts raw = g;
            raw.mitigate = false;
            if (!raw.synthetic_noise && raw.noise_file.empty()) raw.synthetic_noise = true;
            GlobalOpts mit = raw;
            mit.mitigate = true;
            const Method method = method_from_string(mit_method);
            const PauliAxis axis = pauli_axis_from_string(g.measured);
            const EstimateSummary b = run_cell(base_table_config(raw), method, axis);
            const EstimateSummary m = run_cell(base_table_config(mit), method, axis);
            emit_summaries(g, {b, m}, "mitigate");
            std::cout << "raw:       mean=" << b.mean << " sd=" << b.sd << " rmse=" << b.rmse << "\n";
            std::cout << "mitigated: mean=" << m.mean << " sd=" << m.sd << " rmse=" << m.rmse << "\n";
            return kOk;
        }
    } catch (const PostSelectionStarved& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kStarvation;
    } catch (const std::domain_error& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return kNumericalFailure;
    } catch (const std::exception& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kConfigError;
    }
    return kConfigError;
}
