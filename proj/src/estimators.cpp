#include "qmd/estimators.hpp"

#include "qmd/rng.hpp"

#include <json.hpp>

#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace qmd {

using json = nlohmann::json;

namespace {

uint64_t derive_seed(uint64_t base, uint64_t salt) {
    SplitMix64 g(base ^ (salt * 0xD1B54A32D192ED03ULL + 0x2545F4914F6CDD1DULL));
    return g.next_u64();
}

CVector system_input(const EstimatorConfig& cfg) { return cfg.system_state(); }

DensityOperator compose_input(const CVector& psi_s, int n_qubits) {
    CMatrix rho = psi_s.outer();
    for (int q = 1; q < n_qubits; ++q) rho = kron(rho, ket0().outer());
    return DensityOperator(rho);
}

struct ExecResult {
    std::map<std::string, double> weights; // record -> probability (kept), sums to 1
    double discard_fraction = 0.0;
    std::map<std::string, double> raw; // counts when sampled, probabilities otherwise
};

Circuit strip_postselect(const Circuit& c, std::vector<std::pair<int, int>>& conditions) {
    Circuit out;
    out.n_qubits = c.n_qubits;
    for (const CircuitEvent& ev : c.events) {
        if (const auto* ps = std::get_if<PostSelectOp>(&ev))
            conditions.emplace_back(ps->slot, ps->required);
        else
            out.events.push_back(ev);
    }
    return out;
}

std::map<std::string, double> apply_rem_joint(const Circuit& c, const std::map<std::string, double>& probs,
                                              const ConfusionMatrix& per_qubit) {
    const int width = c.register_width();
    const int n = 1 << width;
    ConfusionMatrix joint = ConfusionMatrix::from_per_qubit(
        std::vector<ConfusionMatrix>(static_cast<size_t>(width), per_qubit));
    std::vector<double> p(static_cast<size_t>(n), 0.0);
    for (const auto& [rec, w] : probs) p[std::stoul(rec, nullptr, 2)] += w;
    const std::vector<double> fixed = rem_apply(joint, p);
    std::map<std::string, double> out;
    for (int i = 0; i < n; ++i) {
        if (fixed[static_cast<size_t>(i)] <= 0.0) continue;
        std::string rec(static_cast<size_t>(width), '0');
        for (int b = 0; b < width; ++b)
            if ((i >> (width - 1 - b)) & 1) rec[static_cast<size_t>(b)] = '1';
        out[rec] = fixed[static_cast<size_t>(i)];
    }
    return out;
}

// One circuit execution: optional folding, exact or sampled distribution,
// optional readout-error mitigation, then classical post-selection.
ExecResult execute_circuit(const Circuit& circuit, const DensityOperator& rho_in, const EstimatorConfig& cfg,
                           long long shots, int fold_scale, uint64_t seed, long long* discarded_accum) {
    std::vector<std::pair<int, int>> conditions;
    const bool rem = cfg.mitigation.rem_per_qubit.has_value();
    Circuit work = rem ? strip_postselect(circuit, conditions) : circuit;
    if (fold_scale > 1) work = fold_circuit(work, fold_scale, seed);

    const NoiseModel* noise = cfg.noise ? &*cfg.noise : nullptr;

    ExecResult res;
    std::map<std::string, double> probs;
    if (cfg.analytic) {
        const OutcomeDistribution dist = exact_distribution(work, rho_in, noise);
        probs = dist.probs;
        res.discard_fraction = dist.discarded;
        res.raw = probs;
    } else {
        const SampleResult sr = sample_counts(work, rho_in, shots, seed, noise);
        for (const auto& [rec, cnt] : sr.counts) {
            probs[rec] = static_cast<double>(cnt) / static_cast<double>(sr.shots);
            res.raw[rec] = static_cast<double>(cnt);
        }
        res.discard_fraction = static_cast<double>(sr.discarded) / static_cast<double>(sr.shots);
        if (discarded_accum) *discarded_accum += sr.discarded;
    }

    // normalize what the branch evolution left unnormalized (sampled: kept fraction)
    double kept = 0.0;
    for (const auto& [rec, w] : probs) kept += w;
    if (kept <= 0.0) throw PostSelectionStarved(shots, shots);
    for (auto& [rec, w] : probs) w /= kept;

    if (rem) {
        probs = apply_rem_joint(work, probs, *cfg.mitigation.rem_per_qubit);
        // post-selection applied classically after mitigation
        double cond_kept = 0.0;
        std::map<std::string, double> conditioned;
        for (const auto& [rec, w] : probs) {
            bool ok = true;
            for (const auto& [slot, req] : conditions)
                if (rec[static_cast<size_t>(slot)] != static_cast<char>('0' + req)) { ok = false; break; }
            if (ok) {
                conditioned[rec] = w;
                cond_kept += w;
            }
        }
        if (cond_kept <= 1e-12) throw PostSelectionStarved(shots, shots);
        for (auto& [rec, w] : conditioned) w /= cond_kept;
        res.discard_fraction += (1.0 - cond_kept);
        if (discarded_accum && !cfg.analytic)
            *discarded_accum += static_cast<long long>(std::llround((1.0 - cond_kept) * static_cast<double>(shots)));
        probs = std::move(conditioned);
    }
    res.weights = std::move(probs);
    return res;
}

double sign_of(char bit) { return bit == '0' ? +1.0 : -1.0; }

double slot_mean(const std::map<std::string, double>& weights, int slot) {
    double s = 0.0;
    for (const auto& [rec, w] : weights) s += sign_of(rec[static_cast<size_t>(slot)]) * w;
    return s;
}

} // namespace

const char* to_string(Method m) {
    switch (m) {
        case Method::TSM: return "TSM";
        case Method::WMM: return "WMM";
        case Method::DEC: return "DEC";
    }
    return "?";
}

Method method_from_string(const std::string& s) {
    if (s == "TSM" || s == "tsm") return Method::TSM;
    if (s == "WMM" || s == "wmm") return Method::WMM;
    if (s == "DEC" || s == "dec") return Method::DEC;
    throw std::invalid_argument("unknown method: " + s);
}

CVector EstimatorConfig::system_state() const {
    return input_state.dim() == 0 ? ket_plus_i() : input_state;
}

void EstimatorConfig::validate() const {
    if (shots < 1) throw std::invalid_argument("EstimatorConfig: shots must be >= 1");
    if (method == Method::WMM) {
        if (!(theta_w > 0.0 && theta_w < M_PI / 2.0))
            throw std::invalid_argument("EstimatorConfig: theta_w must lie in (0, pi/2)");
        if (std::abs(std::cos(2.0 * theta_w)) < 1e-6)
            throw std::invalid_argument("EstimatorConfig: divisor underflow, cos(2 theta_w) too small");
        if (disturbed != ObservableB::X)
            throw std::invalid_argument("EstimatorConfig: the weak-measurement protocol requires B = X");
    }
    if (method == Method::DEC) {
        if (!(theta > 0.0 && theta < M_PI / 2.0))
            throw std::invalid_argument("EstimatorConfig: theta must lie in (0, pi/2)");
        if (theta * theta < 1e-12) throw std::invalid_argument("EstimatorConfig: theta^2 underflow");
    }
    if (noise) noise->validate();
    if (mitigation.zne) mitigation.zne->validate();
}

std::string RunResult::to_json() const {
    json j;
    j["v"] = 1;
    j["method"] = to_string(config.method);
    j["measured"] = to_string(config.measured);
    j["eta_sq_hat"] = eta_sq_hat;
    j["shots"] = config.shots;
    j["seed"] = config.seed;
    j["analytic"] = config.analytic;
    j["theta"] = config.theta;
    j["theta_w"] = config.theta_w;
    j["discarded"] = discarded;
    json counts;
    for (const auto& [name, cmap] : raw_counts) {
        json c;
        for (const auto& [rec, v] : cmap) c[rec] = v;
        counts[name] = c;
    }
    j["counts"] = counts;
    return j.dump();
}

RunResult tsm_estimate(const EstimatorConfig& cfg) {
    if (cfg.method != Method::TSM) throw std::invalid_argument("tsm_estimate: config method mismatch");
    cfg.validate();
    RunResult rr;
    rr.config = cfg;

    const CVector psi = system_input(cfg);
    if (cfg.disturbed == ObservableB::Identity) {
        // [M_m, I] = 0: the expansion collapses to 1 + 1 + 1 + 1 - 4 with b = 1.
        rr.eta_sq_hat = 0.0;
        return rr;
    }

    const CMatrix B = pauli(PauliAxis::X);
    const CVector b_psi = B * psi;
    CVector bi_psi(psi.dim());
    for (int i = 0; i < psi.dim(); ++i) bi_psi[i] = b_psi[i] + psi[i];
    const double norm_b = b_psi.norm() * b_psi.norm();
    const double norm_bi = bi_psi.norm() * bi_psi.norm();

    const TsmCircuits circuits = build_tsm_circuits(cfg.measured);
    // the three circuit jobs share the per-run device budget
    const long long branch_shots = std::max<long long>(1, cfg.shots / 3);

    auto value_at_scale = [&](int scale, uint64_t salt, bool record_raw) {
        double e1_b = 0.0, e1_b2 = 0.0, e2_b = 0.0, e3_b = 0.0;
        for (int br = 0; br < 3; ++br) {
            if (br == 1 && norm_b < 1e-12) continue; // B annihilates the input
            if (br == 2 && norm_bi < 1e-12) continue;
            const TsmBranch& tb = circuits.branch[static_cast<size_t>(br)];
            const DensityOperator rho_in = compose_input(psi, tb.circuit.n_qubits);
            const ExecResult ex = execute_circuit(tb.circuit, rho_in, cfg, branch_shots, scale,
                                                  derive_seed(cfg.seed, salt * 8 + static_cast<uint64_t>(br)),
                                                  record_raw ? &rr.discarded : nullptr);
            const double eb = slot_mean(ex.weights, tb.slot_b);
            if (br == 0) {
                e1_b = eb;
                for (const auto& [rec, w] : ex.weights) {
                    const double b = sign_of(rec[static_cast<size_t>(tb.slot_b)]);
                    e1_b2 += b * b * w;
                }
            } else if (br == 1) {
                e2_b = eb;
            } else {
                e3_b = eb;
            }
            if (record_raw) rr.raw_counts["branch" + std::to_string(br)] = ex.raw;
        }
        // <psi|B^2|psi> equals ||B psi||^2; norm factors come from the declared state
        return norm_b + e1_b2 + e1_b + norm_b * e2_b - norm_bi * e3_b;
    };

    if (cfg.mitigation.zne) {
        rr.eta_sq_hat = zne_estimate([&](int scale, uint64_t seed) { return value_at_scale(scale, seed, false); },
                                     *cfg.mitigation.zne, cfg.seed);
        value_at_scale(1, 0, true); // keep the unscaled counts for the record
    } else {
        rr.eta_sq_hat = value_at_scale(1, 0, true);
    }
    return rr;
}

RunResult wmm_estimate(const EstimatorConfig& cfg) {
    if (cfg.method != Method::WMM) throw std::invalid_argument("wmm_estimate: config method mismatch");
    cfg.validate();
    RunResult rr;
    rr.config = cfg;

    const CVector psi = system_input(cfg);
    const WmmCircuit wc = build_wmm_circuit(cfg.measured, cfg.theta_w);
    const DensityOperator rho_in = compose_input(psi, wc.circuit.n_qubits);
    const double divisor = std::cos(2.0 * cfg.theta_w);

    auto value_at_scale = [&](int scale, uint64_t salt, bool record_raw) {
        const ExecResult ex = execute_circuit(wc.circuit, rho_in, cfg, cfg.shots, scale,
                                              derive_seed(cfg.seed, salt), record_raw ? &rr.discarded : nullptr);
        double corr = 0.0; // joint <x_i x_f>, apparatus outcome marginalized
        for (const auto& [rec, w] : ex.weights)
            corr += sign_of(rec[static_cast<size_t>(wc.slot_weak)]) * sign_of(rec[static_cast<size_t>(wc.slot_strong)]) * w;
        if (record_raw) rr.raw_counts["main"] = ex.raw;
        return 2.0 * (1.0 - corr / divisor);
    };

    if (cfg.mitigation.zne) {
        rr.eta_sq_hat = zne_estimate([&](int scale, uint64_t seed) { return value_at_scale(scale, seed, false); },
                                     *cfg.mitigation.zne, cfg.seed);
        value_at_scale(1, 0, true);
    } else {
        rr.eta_sq_hat = value_at_scale(1, 0, true);
    }
    return rr;
}

RunResult dec_estimate(const EstimatorConfig& cfg) {
    if (cfg.method != Method::DEC) throw std::invalid_argument("dec_estimate: config method mismatch");
    cfg.validate();
    RunResult rr;
    rr.config = cfg;

    const CVector psi = system_input(cfg);
    const DecCircuit dc = build_dec_circuit(cfg.measured, cfg.theta);
    const DensityOperator rho_in = compose_input(psi, dc.circuit.n_qubits);
    const double theta_sq = cfg.theta * cfg.theta;

    auto value_at_scale = [&](int scale, uint64_t salt, bool record_raw) {
        const ExecResult ex = execute_circuit(dc.circuit, rho_in, cfg, cfg.shots, scale,
                                              derive_seed(cfg.seed, salt), record_raw ? &rr.discarded : nullptr);
        double p_plus = 0.0;
        for (const auto& [rec, w] : ex.weights)
            if (rec[static_cast<size_t>(dc.slot_probe)] == '0') p_plus += w;
        if (record_raw) rr.raw_counts["main"] = ex.raw;
        if (cfg.readout_mode == DecReadout::probe_X) {
            const double x_mean = 2.0 * p_plus - 1.0;
            return (1.0 - x_mean) / (2.0 * theta_sq);
        }
        return (1.0 - p_plus) / theta_sq;
    };

    if (cfg.mitigation.zne) {
        rr.eta_sq_hat = zne_estimate([&](int scale, uint64_t seed) { return value_at_scale(scale, seed, false); },
                                     *cfg.mitigation.zne, cfg.seed);
        value_at_scale(1, 0, true);
    } else {
        rr.eta_sq_hat = value_at_scale(1, 0, true);
    }
    return rr;
}

RunResult run_estimator(const EstimatorConfig& cfg) {
    switch (cfg.method) {
        case Method::TSM: return tsm_estimate(cfg);
        case Method::WMM: return wmm_estimate(cfg);
        case Method::DEC: return dec_estimate(cfg);
    }
    throw std::logic_error("run_estimator: bad method");
}

std::vector<std::pair<double, CMatrix>> spectral_projections(const CMatrix& B) {
    if (!B.is_hermitian()) throw std::invalid_argument("spectral_projections: observable not Hermitian");
    const EigResult e = hermitian_eig(B);
    std::vector<std::pair<double, CMatrix>> out;
    const int n = B.rows();
    for (int k = 0; k < n; ++k) {
        CMatrix proj(n, n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) proj(i, j) = e.vectors(i, k) * std::conj(e.vectors(j, k));
        bool merged = false;
        for (auto& [val, p] : out)
            if (std::abs(val - e.values[static_cast<size_t>(k)]) <= kStructTol) {
                p += proj;
                merged = true;
                break;
            }
        if (!merged) out.emplace_back(e.values[static_cast<size_t>(k)], proj);
    }
    return out;
}

std::vector<WjdEntry> wjd_exact(const CMatrix& B, const DensityOperator& rho, const IndirectModel& dil) {
    const int pd = dil.probe_init.rows();
    const CMatrix init = kron(rho.matrix(), dil.probe_init);
    const auto projections = spectral_projections(B);
    std::vector<WjdEntry> out;
    for (const auto& [b_i, p_i] : projections) {
        const CMatrix pre = dil.unitary * kron(p_i, CMatrix::identity(pd)) * init * dil.unitary.dagger();
        for (const auto& [b_f, p_f] : projections) {
            const cplx v = (kron(p_f, CMatrix::identity(pd)) * pre).trace();
            out.push_back({b_i, b_f, v});
        }
    }
    return out;
}

double wjd_disturbance(const std::vector<WjdEntry>& wjd) {
    double s = 0.0;
    for (const WjdEntry& e : wjd) s += (e.b_f - e.b_i) * (e.b_f - e.b_i) * e.value.real();
    return s;
}

cplx weak_value(const IndirectModel& dil, const CMatrix& p_bi, const CMatrix& p_bf, const DensityOperator& rho) {
    const int pd = dil.probe_init.rows();
    const CMatrix init = kron(rho.matrix(), dil.probe_init);
    const CMatrix evolved = dil.unitary * init * dil.unitary.dagger();
    const CMatrix post = kron(p_bf, CMatrix::identity(pd));
    const cplx denom = (post * evolved).trace();
    if (std::abs(denom) <= 1e-14) throw std::domain_error("weak_value: vanishing post-selection probability");
    const cplx numer = (post * dil.unitary * kron(p_bi, CMatrix::identity(pd)) * init * dil.unitary.dagger()).trace();
    return numer / denom;
}

} // namespace qmd
