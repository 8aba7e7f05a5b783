#include "qmd/mitigation.hpp"

#include "qmd/rng.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace qmd {

namespace {

// Gaussian elimination with partial pivoting for small dense real systems.
std::vector<double> solve_linear(std::vector<std::vector<double>> a, std::vector<double> b) {
    const int n = static_cast<int>(b.size());
    for (int col = 0; col < n; ++col) {
        int piv = col;
        for (int r = col + 1; r < n; ++r)
            if (std::abs(a[r][col]) > std::abs(a[piv][col])) piv = r;
        if (std::abs(a[piv][col]) < 1e-14) throw std::domain_error("solve_linear: singular system");
        std::swap(a[piv], a[col]);
        std::swap(b[piv], b[col]);
        for (int r = 0; r < n; ++r) {
            if (r == col) continue;
            const double f = a[r][col] / a[col][col];
            if (f == 0.0) continue;
            for (int k = col; k < n; ++k) a[r][k] -= f * a[col][k];
            b[r] -= f * b[col];
        }
    }
    std::vector<double> x(n);
    for (int i = 0; i < n; ++i) x[static_cast<size_t>(i)] = b[i] / a[i][i];
    return x;
}

} // namespace

ConfusionMatrix::ConfusionMatrix(int n_outcomes, std::vector<double> entries)
    : n_(n_outcomes), e_(std::move(entries)) {
    if (static_cast<int>(e_.size()) != n_ * n_) throw std::invalid_argument("ConfusionMatrix: bad entry count");
    for (double v : e_)
        if (v < -kFloatTol || v > 1.0 + kFloatTol) throw std::invalid_argument("ConfusionMatrix: entry outside [0,1]");
    for (int ideal = 0; ideal < n_; ++ideal) {
        double col = 0.0;
        for (int obs = 0; obs < n_; ++obs) col += (*this)(obs, ideal);
        if (std::abs(col - 1.0) > kStructTol)
            throw std::invalid_argument("ConfusionMatrix: ideal->observed columns must sum to 1");
    }
}

ConfusionMatrix ConfusionMatrix::identity(int n_outcomes) {
    std::vector<double> e(static_cast<size_t>(n_outcomes) * n_outcomes, 0.0);
    for (int i = 0; i < n_outcomes; ++i) e[static_cast<size_t>(i) * n_outcomes + i] = 1.0;
    return ConfusionMatrix(n_outcomes, std::move(e));
}

ConfusionMatrix ConfusionMatrix::from_per_qubit(const std::vector<ConfusionMatrix>& per_qubit) {
    if (per_qubit.empty()) throw std::invalid_argument("from_per_qubit: empty");
    int n = 1;
    for (const auto& c : per_qubit) n *= c.n_outcomes();
    std::vector<double> e(static_cast<size_t>(n) * n, 0.0);
    for (int obs = 0; obs < n; ++obs)
        for (int ideal = 0; ideal < n; ++ideal) {
            double p = 1.0;
            int o = obs, i = ideal;
            for (auto it = per_qubit.rbegin(); it != per_qubit.rend(); ++it) {
                const int k = it->n_outcomes();
                p *= (*it)(o % k, i % k);
                o /= k;
                i /= k;
            }
            e[static_cast<size_t>(obs) * n + ideal] = p;
        }
    return ConfusionMatrix(n, std::move(e));
}

ConfusionMatrix ConfusionMatrix::from_noise_readout(const NoiseModel& noise, int qubit) {
    const auto r = noise.readout_for(qubit);
    // noise rows are [true][observed]; confusion entries are (obs, ideal)
    return ConfusionMatrix(2, {r[0][0], r[1][0], r[0][1], r[1][1]});
}

double ConfusionMatrix::condition_number() const {
    // singular values via the eigenvalues of CᵀC
    CMatrix ctc(n_, n_);
    for (int i = 0; i < n_; ++i)
        for (int j = 0; j < n_; ++j) {
            double s = 0.0;
            for (int k = 0; k < n_; ++k) s += (*this)(k, i) * (*this)(k, j);
            ctc(i, j) = s;
        }
    const auto eig = hermitian_eig(ctc);
    const double lo = std::max(eig.values.front(), 0.0), hi = std::max(eig.values.back(), 0.0);
    if (lo <= 0.0) return std::numeric_limits<double>::infinity();
    return std::sqrt(hi / lo);
}

std::string ConfusionMatrix::to_csv() const {
    std::ostringstream out;
    out.precision(17);
    for (int obs = 0; obs < n_; ++obs) {
        for (int ideal = 0; ideal < n_; ++ideal) {
            if (ideal) out << ',';
            out << (*this)(obs, ideal);
        }
        out << '\n';
    }
    return out.str();
}

ConfusionMatrix ConfusionMatrix::from_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    std::vector<std::vector<double>> rows;
    while (std::getline(in, line)) {
        if (line.find_first_not_of(" \t\r,") == std::string::npos) continue;
        std::vector<double> row;
        std::istringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) row.push_back(std::stod(cell));
        rows.push_back(std::move(row));
    }
    const int n = static_cast<int>(rows.size());
    std::vector<double> e;
    for (const auto& row : rows) {
        if (static_cast<int>(row.size()) != n) throw std::invalid_argument("ConfusionMatrix: csv not square");
        e.insert(e.end(), row.begin(), row.end());
    }
    return ConfusionMatrix(n, std::move(e));
}

ConfusionMatrix detector_tomography(int n_qubits, long long shots, uint64_t seed, const NoiseModel& noise) {
    if (shots < 1) throw std::invalid_argument("detector_tomography: shots must be >= 1");
    const int n = 1 << n_qubits;
    std::vector<double> e(static_cast<size_t>(n) * n, 0.0);
    for (int basis = 0; basis < n; ++basis) {
        Circuit c;
        c.n_qubits = n_qubits;
        for (int q = 0; q < n_qubits; ++q)
            if ((basis >> (n_qubits - 1 - q)) & 1) c.events.push_back(GateOp{GateKind::X, {q}, 0.0, std::nullopt});
        for (int q = 0; q < n_qubits; ++q) c.events.push_back(MeasureOp{q, q});

        CVector k0 = ket0();
        CMatrix rho = k0.outer();
        for (int q = 1; q < n_qubits; ++q) rho = kron(rho, k0.outer());

        const SampleResult res = sample_counts(c, DensityOperator(rho), shots, seed + static_cast<uint64_t>(basis), &noise);
        for (const auto& [rec, cnt] : res.counts) {
            const int obs = static_cast<int>(std::stoul(rec, nullptr, 2));
            e[static_cast<size_t>(obs) * n + basis] += static_cast<double>(cnt) / static_cast<double>(shots);
        }
    }
    return ConfusionMatrix(n, std::move(e));
}

std::vector<double> rem_apply(const ConfusionMatrix& c, const std::vector<double>& p_noisy) {
    const int n = c.n_outcomes();
    if (static_cast<int>(p_noisy.size()) != n) throw std::invalid_argument("rem_apply: dimension mismatch");
    const double total = std::accumulate(p_noisy.begin(), p_noisy.end(), 0.0);
    if (std::abs(total - 1.0) > 1e-6) throw std::invalid_argument("rem_apply: input does not sum to 1");
    if (c.condition_number() > 1e8) throw std::domain_error("rem_apply: confusion matrix ill-conditioned");

    // minimize ||C p - q||² with sum p = 1, p >= 0.
    // Active-set on the nonnegativity constraints; the equality is kept via a
    // Lagrange multiplier row in the KKT system.
    std::vector<std::vector<double>> ctc(static_cast<size_t>(n), std::vector<double>(static_cast<size_t>(n), 0.0));
    std::vector<double> ctq(static_cast<size_t>(n), 0.0);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            double s = 0.0;
            for (int k = 0; k < n; ++k) s += c(k, i) * c(k, j);
            ctc[static_cast<size_t>(i)][static_cast<size_t>(j)] = s;
        }
    for (int i = 0; i < n; ++i) {
        double s = 0.0;
        for (int k = 0; k < n; ++k) s += c(k, i) * p_noisy[static_cast<size_t>(k)];
        ctq[static_cast<size_t>(i)] = s;
    }

    std::vector<bool> active(static_cast<size_t>(n), false); // pinned to zero
    for (int iter = 0; iter < 4 * n + 8; ++iter) {
        std::vector<int> free;
        for (int i = 0; i < n; ++i)
            if (!active[static_cast<size_t>(i)]) free.push_back(i);
        if (free.empty()) throw std::domain_error("rem_apply: empty feasible support");

        const int f = static_cast<int>(free.size());
        // KKT: [2 CᵀC_ff  1; 1ᵀ 0] [p_f; lambda] = [2 Cᵀq_f; 1]
        std::vector<std::vector<double>> kkt(static_cast<size_t>(f + 1), std::vector<double>(static_cast<size_t>(f + 1), 0.0));
        std::vector<double> rhs(static_cast<size_t>(f + 1), 0.0);
        for (int a = 0; a < f; ++a) {
            for (int b = 0; b < f; ++b)
                kkt[static_cast<size_t>(a)][static_cast<size_t>(b)] =
                    2.0 * ctc[static_cast<size_t>(free[static_cast<size_t>(a)])][static_cast<size_t>(free[static_cast<size_t>(b)])];
            kkt[static_cast<size_t>(a)][static_cast<size_t>(f)] = 1.0;
            kkt[static_cast<size_t>(f)][static_cast<size_t>(a)] = 1.0;
            rhs[static_cast<size_t>(a)] = 2.0 * ctq[static_cast<size_t>(free[static_cast<size_t>(a)])];
        }
        rhs[static_cast<size_t>(f)] = 1.0;
        const std::vector<double> sol = solve_linear(kkt, rhs);

        // most negative coordinate joins the active set
        int worst = -1;
        double worst_val = -1e-12;
        for (int a = 0; a < f; ++a)
            if (sol[static_cast<size_t>(a)] < worst_val) {
                worst_val = sol[static_cast<size_t>(a)];
                worst = a;
            }
        if (worst >= 0) {
            active[static_cast<size_t>(free[static_cast<size_t>(worst)])] = true;
            continue;
        }

        std::vector<double> p(static_cast<size_t>(n), 0.0);
        for (int a = 0; a < f; ++a) p[static_cast<size_t>(free[static_cast<size_t>(a)])] = std::max(sol[static_cast<size_t>(a)], 0.0);
        // dual feasibility of the pinned coordinates: gradient + lambda >= 0
        const double lambda = sol[static_cast<size_t>(f)];
        bool ok = true;
        for (int i = 0; i < n && ok; ++i) {
            if (!active[static_cast<size_t>(i)]) continue;
            double grad = -2.0 * ctq[static_cast<size_t>(i)];
            for (int j = 0; j < n; ++j) grad += 2.0 * ctc[static_cast<size_t>(i)][static_cast<size_t>(j)] * p[static_cast<size_t>(j)];
            if (grad + lambda < -1e-9) {
                active[static_cast<size_t>(i)] = false;
                ok = false;
            }
        }
        if (!ok) continue;

        const double sum = std::accumulate(p.begin(), p.end(), 0.0);
        for (double& v : p) v /= sum;
        return p;
    }
    throw std::domain_error("rem_apply: active-set iteration failed to converge");
}

Circuit fold_circuit(const Circuit& c, int scale_factor, uint64_t seed) {
    if (scale_factor < 1 || scale_factor % 2 == 0)
        throw std::invalid_argument("fold_circuit: scale factor must be an odd positive integer");
    (void)seed; // the odd-integer schedule folds every gate uniformly
    if (scale_factor == 1) return c;
    const int pairs = (scale_factor - 1) / 2;
    Circuit out;
    out.n_qubits = c.n_qubits;
    for (const CircuitEvent& ev : c.events) {
        out.events.push_back(ev);
        if (const auto* g = std::get_if<GateOp>(&ev)) {
            for (int k = 0; k < pairs; ++k) {
                out.events.push_back(gate_dagger(*g));
                out.events.push_back(*g);
            }
        }
    }
    return out;
}

std::vector<double> richardson_coefficients(const std::vector<double>& alphas) {
    const int n = static_cast<int>(alphas.size());
    if (n == 0) throw std::invalid_argument("richardson_coefficients: empty nodes");
    for (int i = 0; i < n; ++i) {
        if (alphas[static_cast<size_t>(i)] <= 0.0) throw std::invalid_argument("richardson_coefficients: nodes must be positive");
        for (int j = i + 1; j < n; ++j)
            if (std::abs(alphas[static_cast<size_t>(i)] - alphas[static_cast<size_t>(j)]) < 1e-12)
                throw std::invalid_argument("richardson_coefficients: duplicate nodes");
    }
    std::vector<double> beta(static_cast<size_t>(n), 1.0);
    for (int k = 0; k < n; ++k)
        for (int i = 0; i < n; ++i)
            if (i != k) beta[static_cast<size_t>(k)] *= alphas[static_cast<size_t>(i)] / (alphas[static_cast<size_t>(i)] - alphas[static_cast<size_t>(k)]);
    return beta;
}

void ZneSchedule::validate() const {
    if (scale_factors.empty()) throw std::invalid_argument("ZneSchedule: empty scale factors");
    int prev = 0;
    for (int s : scale_factors) {
        if (s <= prev) throw std::invalid_argument("ZneSchedule: scale factors must be strictly increasing");
        if (s % 2 == 0) throw std::invalid_argument("ZneSchedule: scale factors must be odd");
        prev = s;
    }
    if (repeats < 1) throw std::invalid_argument("ZneSchedule: repeats must be >= 1");
}

ZneSchedule ZneSchedule::from_config_text(const std::string& text) {
    ZneSchedule z;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        const auto eq = line.find('=');
        if (eq == std::string::npos) continue;
        std::string key = line.substr(0, eq);
        key.erase(std::remove_if(key.begin(), key.end(), [](unsigned char ch) { return std::isspace(ch); }), key.end());
        std::istringstream vals(line.substr(eq + 1));
        if (key == "scale_factors") {
            z.scale_factors.clear();
            int s;
            while (vals >> s) z.scale_factors.push_back(s);
        } else if (key == "extrapolator") {
            std::string w;
            vals >> w;
            if (w == "richardson") z.extrapolator = Extrapolator::richardson;
            else if (w == "linear") z.extrapolator = Extrapolator::linear;
            else if (w == "quadratic") z.extrapolator = Extrapolator::quadratic;
            else throw std::invalid_argument("ZneSchedule: unknown extrapolator " + w);
        } else if (key == "repeats") {
            vals >> z.repeats;
        } else if (!key.empty()) {
            throw std::invalid_argument("ZneSchedule: unknown key " + key);
        }
    }
    z.validate();
    return z;
}

ZneSchedule ZneSchedule::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("ZneSchedule: cannot open " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return from_config_text(ss.str());
}

std::vector<double> polyfit(const std::vector<double>& x, const std::vector<double>& y, int degree) {
    if (x.size() != y.size() || static_cast<int>(x.size()) < degree + 1)
        throw std::invalid_argument("polyfit: need at least degree+1 points");
    const int k = degree + 1;
    std::vector<std::vector<double>> ata(static_cast<size_t>(k), std::vector<double>(static_cast<size_t>(k), 0.0));
    std::vector<double> atb(static_cast<size_t>(k), 0.0);
    for (size_t r = 0; r < x.size(); ++r) {
        std::vector<double> pow(static_cast<size_t>(k), 1.0);
        for (int c = 1; c < k; ++c) pow[static_cast<size_t>(c)] = pow[static_cast<size_t>(c - 1)] * x[r];
        for (int i = 0; i < k; ++i) {
            for (int j = 0; j < k; ++j) ata[static_cast<size_t>(i)][static_cast<size_t>(j)] += pow[static_cast<size_t>(i)] * pow[static_cast<size_t>(j)];
            atb[static_cast<size_t>(i)] += pow[static_cast<size_t>(i)] * y[r];
        }
    }
    return solve_linear(ata, atb);
}

double zne_estimate(const std::function<double(int scale, uint64_t seed)>& run, const ZneSchedule& schedule,
                    uint64_t seed) {
    schedule.validate();
    std::vector<double> scales, means;
    uint64_t stream = seed;
    for (int s : schedule.scale_factors) {
        double acc = 0.0;
        for (int r = 0; r < schedule.repeats; ++r) acc += run(s, stream++);
        scales.push_back(static_cast<double>(s));
        means.push_back(acc / schedule.repeats);
    }
    switch (schedule.extrapolator) {
        case ZneSchedule::Extrapolator::richardson: {
            const std::vector<double> beta = richardson_coefficients(scales);
            double v = 0.0;
            for (size_t i = 0; i < beta.size(); ++i) v += beta[i] * means[i];
            return v;
        }
        case ZneSchedule::Extrapolator::linear:
            return polyfit(scales, means, 1)[0];
        case ZneSchedule::Extrapolator::quadratic:
            return polyfit(scales, means, 2)[0];
    }
    throw std::logic_error("zne_estimate: bad extrapolator");
}

} // namespace qmd
