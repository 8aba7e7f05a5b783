#include "qmd/circuit.hpp"

#include "qmd/rng.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace qmd {

using json = nlohmann::json;

namespace {
const cplx kI(0.0, 1.0);

// qubit 0 is the leftmost tensor factor = most significant bit
int bit_of(int index, int wire, int n) { return (index >> (n - 1 - wire)) & 1; }
} // namespace

void Circuit::validate() const {
    std::set<int> slots;
    for (const CircuitEvent& ev : events) {
        if (const auto* g = std::get_if<GateOp>(&ev)) {
            std::set<int> w(g->wires.begin(), g->wires.end());
            if (w.size() != g->wires.size()) throw std::invalid_argument("circuit: duplicate wires in gate");
            for (int q : g->wires)
                if (q < 0 || q >= n_qubits) throw std::invalid_argument("circuit: wire out of range");
            if (!std::isfinite(g->angle)) throw std::invalid_argument("circuit: non-finite gate angle");
        } else if (const auto* m = std::get_if<MeasureOp>(&ev)) {
            if (m->wire < 0 || m->wire >= n_qubits) throw std::invalid_argument("circuit: measured wire out of range");
            if (!slots.insert(m->slot).second) throw std::invalid_argument("circuit: duplicate register slot");
        } else if (const auto* p = std::get_if<PostSelectOp>(&ev)) {
            if (!slots.count(p->slot)) throw std::invalid_argument("circuit: post-selection on unmeasured slot");
            if (p->required != 0 && p->required != 1)
                throw std::invalid_argument("circuit: post-selection outcome must be 0 or 1");
        }
    }
}

int Circuit::register_width() const {
    int w = 0;
    for (const CircuitEvent& ev : events)
        if (const auto* m = std::get_if<MeasureOp>(&ev)) w = std::max(w, m->slot + 1);
    return w;
}

int Circuit::gate_count() const {
    int n = 0;
    for (const CircuitEvent& ev : events)
        if (std::holds_alternative<GateOp>(ev)) ++n;
    return n;
}

void NoiseModel::validate() const {
    if (depol_1q < 0 || depol_1q > 1 || depol_2q < 0 || depol_2q > 1)
        throw std::invalid_argument("NoiseModel: depolarizing probabilities must be in [0,1]");
    for (const auto& r : readout)
        for (const auto& row : r) {
            if (row[0] < 0 || row[1] < 0) throw std::invalid_argument("NoiseModel: negative readout probability");
            if (std::abs(row[0] + row[1] - 1.0) > kFloatTol)
                throw std::invalid_argument("NoiseModel: confusion rows must sum to 1");
        }
}

std::array<std::array<double, 2>, 2> NoiseModel::readout_for(int qubit) const {
    if (readout.empty()) return {{{1.0, 0.0}, {0.0, 1.0}}};
    if (readout.size() == 1) return readout[0];
    if (qubit < 0 || qubit >= static_cast<int>(readout.size()))
        throw std::invalid_argument("NoiseModel: no readout row for qubit");
    return readout[static_cast<size_t>(qubit)];
}

NoiseModel NoiseModel::from_config_text(const std::string& text) {
    NoiseModel nm;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        const auto eq = line.find('=');
        if (eq == std::string::npos) continue;
        std::string key = line.substr(0, eq);
        key.erase(std::remove_if(key.begin(), key.end(), [](unsigned char c) { return std::isspace(c); }), key.end());
        std::istringstream vals(line.substr(eq + 1));
        if (key == "depol_1q") {
            vals >> nm.depol_1q;
        } else if (key == "depol_2q") {
            vals >> nm.depol_2q;
        } else if (key == "readout") {
            std::vector<double> v;
            double x;
            while (vals >> x) v.push_back(x);
            std::array<std::array<double, 2>, 2> r{};
            if (v.size() == 1) { // symmetric flip probability
                r = {{{1.0 - v[0], v[0]}, {v[0], 1.0 - v[0]}}};
            } else if (v.size() == 2) { // p(read 1 | 0), p(read 0 | 1)
                r = {{{1.0 - v[0], v[0]}, {v[1], 1.0 - v[1]}}};
            } else if (v.size() == 4) { // row-major [true][observed]
                r = {{{v[0], v[1]}, {v[2], v[3]}}};
            } else {
                throw std::invalid_argument("NoiseModel: readout needs 1, 2 or 4 numbers");
            }
            nm.readout.assign(1, r);
        } else if (!key.empty()) {
            throw std::invalid_argument("NoiseModel: unknown key " + key);
        }
    }
    nm.validate();
    return nm;
}

NoiseModel NoiseModel::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("NoiseModel: cannot open " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return from_config_text(ss.str());
}

CMatrix gate_matrix(const GateOp& g) {
    const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
    switch (g.kind) {
        case GateKind::H: return CMatrix(2, 2, {inv_sqrt2, inv_sqrt2, inv_sqrt2, -inv_sqrt2});
        case GateKind::X: return pauli(PauliAxis::X);
        case GateKind::S: return CMatrix(2, 2, {1.0, 0.0, 0.0, kI});
        case GateKind::Sdg: return CMatrix(2, 2, {1.0, 0.0, 0.0, -kI});
        case GateKind::RX: {
            const double c = std::cos(g.angle / 2.0), s = std::sin(g.angle / 2.0);
            return CMatrix(2, 2, {c, -kI * s, -kI * s, c});
        }
        case GateKind::RZ: {
            const cplx e0 = std::exp(-kI * (g.angle / 2.0)), e1 = std::exp(kI * (g.angle / 2.0));
            return CMatrix(2, 2, {e0, 0.0, 0.0, e1});
        }
        case GateKind::CNOT: {
            CMatrix m(4, 4);
            m(0, 0) = m(1, 1) = 1.0;
            m(2, 3) = m(3, 2) = 1.0;
            return m;
        }
        case GateKind::Custom:
            if (!g.matrix) throw std::invalid_argument("custom gate without matrix");
            return *g.matrix;
    }
    throw std::logic_error("gate_matrix: bad kind");
}

GateOp gate_dagger(const GateOp& g) {
    GateOp d = g;
    switch (g.kind) {
        case GateKind::H:
        case GateKind::X:
        case GateKind::CNOT: break;
        case GateKind::S: d.kind = GateKind::Sdg; break;
        case GateKind::Sdg: d.kind = GateKind::S; break;
        case GateKind::RX:
        case GateKind::RZ: d.angle = -g.angle; break;
        case GateKind::Custom: d.matrix = g.matrix->dagger(); break;
    }
    return d;
}

CMatrix gate_unitary(const GateOp& g, int n_qubits) {
    const CMatrix local = gate_matrix(g);
    const int k = static_cast<int>(g.wires.size());
    if (local.rows() != (1 << k)) throw std::invalid_argument("gate_unitary: wire count mismatch");
    const int dim = 1 << n_qubits;
    CMatrix u(dim, dim);
    for (int col = 0; col < dim; ++col) {
        int lc = 0;
        for (int w = 0; w < k; ++w) lc = (lc << 1) | bit_of(col, g.wires[w], n_qubits);
        for (int lr = 0; lr < (1 << k); ++lr) {
            const cplx v = local(lr, lc);
            if (v == 0.0) continue;
            int row = col;
            for (int w = 0; w < k; ++w) {
                const int bit = (lr >> (k - 1 - w)) & 1;
                const int shift = n_qubits - 1 - g.wires[w];
                row = (row & ~(1 << shift)) | (bit << shift);
            }
            u(row, col) += v;
        }
    }
    return u;
}

CMatrix unitary_of_circuit(const Circuit& c) {
    c.validate();
    CMatrix u = CMatrix::identity(1 << c.n_qubits);
    for (const CircuitEvent& ev : c.events) {
        const auto* g = std::get_if<GateOp>(&ev);
        if (!g) throw std::invalid_argument("unitary_of_circuit: circuit contains measurement events");
        u = gate_unitary(*g, c.n_qubits) * u;
    }
    return u;
}

CMatrix apply_depolarizing(const CMatrix& state, const std::vector<int>& wires, double p, int n_qubits) {
    if (p <= 0.0) return state;
    // maximally-mixed replacement on the wires: (1-p) rho + p (I/2^k ⊗ Tr_wires rho)
    const int n = n_qubits;
    std::vector<int> dims(n, 2), keep;
    for (int q = 0; q < n; ++q)
        if (std::find(wires.begin(), wires.end(), q) == wires.end()) keep.push_back(q);
    const CMatrix rest = partial_trace(state, dims, keep);
    const int k = static_cast<int>(wires.size());

    // rebuild I/2^k on `wires` interleaved with `rest` on the kept wires
    const int dim = 1 << n;
    CMatrix mixed(dim, dim);
    for (int row = 0; row < dim; ++row)
        for (int col = 0; col < dim; ++col) {
            bool wires_diag = true;
            for (int q : wires)
                if (bit_of(row, q, n) != bit_of(col, q, n)) { wires_diag = false; break; }
            if (!wires_diag) continue;
            int rr = 0, rc = 0;
            for (int q : keep) {
                rr = (rr << 1) | bit_of(row, q, n);
                rc = (rc << 1) | bit_of(col, q, n);
            }
            mixed(row, col) = rest(rr, rc) / static_cast<double>(1 << k);
        }
    return state * cplx(1.0 - p) + mixed * cplx(p);
}

std::vector<Branch> evolve_branches(const Circuit& c, const DensityOperator& rho_in, const NoiseModel* noise) {
    c.validate();
    if (noise) noise->validate();
    if (rho_in.dim() != (1 << c.n_qubits))
        throw std::invalid_argument("evolve: input state dimension mismatch");

    const int width = c.register_width();
    std::vector<Branch> branches{{1.0, rho_in.matrix(), std::string(static_cast<size_t>(width), '_'), false}};

    for (const CircuitEvent& ev : c.events) {
        if (const auto* g = std::get_if<GateOp>(&ev)) {
            const CMatrix u = gate_unitary(*g, c.n_qubits);
            const double p_dep = noise ? (g->wires.size() >= 2 ? noise->depol_2q : noise->depol_1q) : 0.0;
            for (Branch& b : branches) {
                if (b.discarded) continue;
                b.state = u * b.state * u.dagger();
                if (p_dep > 0.0) b.state = apply_depolarizing(b.state, g->wires, p_dep, c.n_qubits);
            }
        } else if (const auto* m = std::get_if<MeasureOp>(&ev)) {
            const auto conf =
                noise ? noise->readout_for(m->wire) : std::array<std::array<double, 2>, 2>{{{1, 0}, {0, 1}}};
            std::vector<Branch> next;
            next.reserve(branches.size() * 4);
            for (Branch& b : branches) {
                if (b.discarded) {
                    next.push_back(std::move(b));
                    continue;
                }
                for (int outcome = 0; outcome < 2; ++outcome) {
                    // project wire onto |outcome>
                    const int dim = 1 << c.n_qubits;
                    CMatrix proj(dim, dim);
                    for (int i = 0; i < dim; ++i)
                        if (bit_of(i, m->wire, c.n_qubits) == outcome) proj(i, i) = 1.0;
                    CMatrix post = proj * b.state * proj;
                    const double p = post.trace().real();
                    if (p < 1e-15) continue;
                    post = post * cplx(1.0 / p);
                    for (int rec = 0; rec < 2; ++rec) {
                        const double pr = conf[static_cast<size_t>(outcome)][static_cast<size_t>(rec)];
                        if (pr <= 0.0) continue;
                        Branch nb{b.prob * p * pr, post, b.record, false};
                        nb.record[static_cast<size_t>(m->slot)] = static_cast<char>('0' + rec);
                        next.push_back(std::move(nb));
                    }
                }
            }
            branches = std::move(next);
        } else if (const auto* ps = std::get_if<PostSelectOp>(&ev)) {
            for (Branch& b : branches) {
                if (b.discarded) continue;
                if (b.record[static_cast<size_t>(ps->slot)] != static_cast<char>('0' + ps->required))
                    b.discarded = true;
            }
        }
    }
    return branches;
}

DensityOperator evolve(const Circuit& c, const DensityOperator& rho_in, const NoiseModel* noise) {
    const std::vector<Branch> branches = evolve_branches(c, rho_in, noise);
    CMatrix sum(1 << c.n_qubits, 1 << c.n_qubits);
    double kept = 0.0;
    for (const Branch& b : branches) {
        if (b.discarded) continue;
        sum += b.state * cplx(b.prob);
        kept += b.prob;
    }
    if (kept < 1e-15) throw std::domain_error("evolve: post-selection removed all probability mass");
    return DensityOperator(sum * cplx(1.0 / kept));
}

OutcomeDistribution exact_distribution(const Circuit& c, const DensityOperator& rho_in, const NoiseModel* noise) {
    OutcomeDistribution d;
    for (const Branch& b : evolve_branches(c, rho_in, noise)) {
        if (b.discarded)
            d.discarded += b.prob;
        else
            d.probs[b.record] += b.prob;
    }
    return d;
}

std::map<std::string, double> SampleResult::distribution() const {
    std::map<std::string, double> d;
    const long long kept = shots - discarded;
    if (kept <= 0) return d;
    for (const auto& [k, v] : counts) d[k] = static_cast<double>(v) / static_cast<double>(kept);
    return d;
}

SampleResult sample_counts(const Circuit& c, const DensityOperator& rho_in, long long shots, uint64_t seed,
                           const NoiseModel* noise) {
    if (shots < 1) throw std::invalid_argument("sample_counts: shots must be >= 1");
    const OutcomeDistribution dist = exact_distribution(c, rho_in, noise);

    // cumulative table over the kept outcomes; everything above falls in the discard lump
    std::vector<std::pair<double, const std::string*>> cum;
    cum.reserve(dist.probs.size());
    double acc = 0.0;
    for (const auto& [rec, p] : dist.probs) {
        acc += p;
        cum.emplace_back(acc, &rec);
    }

    SampleResult res;
    res.shots = shots;
    SplitMix64 rng(seed);
    for (long long s = 0; s < shots; ++s) {
        const double u = rng.next_double();
        auto it = std::lower_bound(cum.begin(), cum.end(), u,
                                   [](const auto& entry, double val) { return entry.first <= val; });
        if (it == cum.end())
            ++res.discarded;
        else
            ++res.counts[*it->second];
    }
    if (res.discarded == shots) throw PostSelectionStarved(shots, res.discarded);
    return res;
}

namespace {

std::string kind_name(GateKind k) {
    switch (k) {
        case GateKind::H: return "H";
        case GateKind::X: return "X";
        case GateKind::S: return "S";
        case GateKind::Sdg: return "Sdg";
        case GateKind::RX: return "RX";
        case GateKind::RZ: return "RZ";
        case GateKind::CNOT: return "CNOT";
        case GateKind::Custom: return "custom";
    }
    return "?";
}

GateKind kind_from_name(const std::string& s) {
    if (s == "H") return GateKind::H;
    if (s == "X") return GateKind::X;
    if (s == "S") return GateKind::S;
    if (s == "Sdg") return GateKind::Sdg;
    if (s == "RX") return GateKind::RX;
    if (s == "RZ") return GateKind::RZ;
    if (s == "CNOT") return GateKind::CNOT;
    if (s == "custom") return GateKind::Custom;
    throw std::invalid_argument("unknown gate kind: " + s);
}

} // namespace

std::string circuit_to_jsonl(const Circuit& c) {
    std::ostringstream out;
    out << json{{"v", 1}, {"n_qubits", c.n_qubits}}.dump() << "\n";
    for (const CircuitEvent& ev : c.events) {
        json j;
        if (const auto* g = std::get_if<GateOp>(&ev)) {
            j["kind"] = kind_name(g->kind);
            j["wires"] = g->wires;
            if (g->kind == GateKind::RX || g->kind == GateKind::RZ) j["angle"] = g->angle;
            if (g->kind == GateKind::Custom) {
                std::vector<double> flat;
                for (int r = 0; r < g->matrix->rows(); ++r)
                    for (int cc = 0; cc < g->matrix->cols(); ++cc) {
                        flat.push_back((*g->matrix)(r, cc).real());
                        flat.push_back((*g->matrix)(r, cc).imag());
                    }
                j["dim"] = g->matrix->rows();
                j["matrix"] = flat;
            }
        } else if (const auto* m = std::get_if<MeasureOp>(&ev)) {
            j["kind"] = "measure";
            j["wires"] = {m->wire};
            j["slot"] = m->slot;
        } else if (const auto* p = std::get_if<PostSelectOp>(&ev)) {
            j["kind"] = "postselect";
            j["slot"] = p->slot;
            j["required"] = p->required;
        }
        out << j.dump() << "\n";
    }
    return out.str();
}

Circuit circuit_from_jsonl(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    Circuit c;
    bool have_header = false;
    while (std::getline(in, line)) {
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        json j = json::parse(line);
        if (!have_header) {
            if (!j.contains("n_qubits")) throw std::invalid_argument("circuit jsonl: missing header");
            c.n_qubits = j["n_qubits"].get<int>();
            have_header = true;
            continue;
        }
        const std::string kind = j["kind"].get<std::string>();
        if (kind == "measure") {
            c.events.push_back(MeasureOp{j["wires"][0].get<int>(), j["slot"].get<int>()});
        } else if (kind == "postselect") {
            c.events.push_back(PostSelectOp{j["slot"].get<int>(), j["required"].get<int>()});
        } else {
            GateOp g;
            g.kind = kind_from_name(kind);
            g.wires = j["wires"].get<std::vector<int>>();
            if (j.contains("angle")) g.angle = j["angle"].get<double>();
            if (g.kind == GateKind::Custom) {
                const int d = j["dim"].get<int>();
                const auto flat = j["matrix"].get<std::vector<double>>();
                CMatrix m(d, d);
                for (int r = 0; r < d; ++r)
                    for (int cc = 0; cc < d; ++cc)
                        m(r, cc) = cplx(flat[2 * (r * d + cc)], flat[2 * (r * d + cc) + 1]);
                g.matrix = m;
            }
            c.events.push_back(std::move(g));
        }
    }
    c.validate();
    return c;
}

} // namespace qmd
