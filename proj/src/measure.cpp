#include "rydberg/measure.hpp"

#include <cmath>
#include <random>

namespace rydberg {

void ErrorModel::validate() const {
    for (double p : {eps_up, eps_down, eta_stirap, loss_1, loss_2})
        if (p < 0.0 || p > 1.0) throw ConfigError("error probabilities must lie in [0,1]");
    if (jitter_sigma_ns < 0.0) throw ConfigError("jitter must be non-negative");
}

std::string ShotRecord::bitstring() const {
    std::string s(n_atoms, 'u');
    for (int i = 0; i < n_atoms; ++i)
        if (down(i)) s[i] = 'd';
    return s;
}

Distribution outcome_distribution(const QuantumState& state) {
    const Space& sp = state.space();
    const int n = sp.n_atoms;
    Distribution out = Distribution::Zero(Eigen::Index(1) << n);
    for (Eigen::Index k = 0; k < sp.dim(); ++k) {
        double p = state.is_pure() ? std::norm(state.vector()(k)) : state.density()(k, k).real();
        if (p == 0.0) continue;
        Eigen::Index o = 0;
        for (int i = 0; i < n; ++i) {
            int l = sp.digit(k, i);
            if (l == level::down || l == level::r) o |= Eigen::Index(1) << (n - 1 - i);
        }
        out(o) += p;
    }
    return out;
}

ReadoutOptions readout_options(const ErrorModel& em, const AddressingPattern& pattern, bool local_stage,
                               bool readout_errors, bool losses) {
    ReadoutOptions o;
    o.readout_errors = readout_errors;
    o.loss.assign(pattern.size(), 0.0);
    if (local_stage && losses)
        for (int i = 0; i < pattern.size(); ++i) {
            int c = pattern.multiplier(i);
            o.loss[i] = c == 1 ? em.loss_1 : c == 2 ? em.loss_2 : 0.0;
        }
    return o;
}

namespace {

// Apply a 2x2 column-stochastic (or any) matrix on one atom's outcome bit.
void apply_single(Distribution& p, int n_atoms, int atom, const Eigen::Matrix2d& m) {
    const Eigen::Index bit = Eigen::Index(1) << (n_atoms - 1 - atom);
    for (Eigen::Index o = 0; o < p.size(); ++o) {
        if (o & bit) continue;
        double up = p(o), dn = p(o | bit);
        p(o) = m(0, 0) * up + m(0, 1) * dn;
        p(o | bit) = m(1, 0) * up + m(1, 1) * dn;
    }
}

} // namespace

Distribution apply_readout_channel(const Distribution& p, int n_atoms, const ErrorModel& em,
                                   const ReadoutOptions& opt) {
    if (p.size() != (Eigen::Index(1) << n_atoms)) throw ConfigError("distribution size mismatch");
    Distribution out = p;
    for (int i = 0; i < n_atoms; ++i) {
        Eigen::Matrix2d m;
        if (!opt.forced_up.empty() && opt.forced_up[i]) {
            m << 1.0, 1.0, 0.0, 0.0;
        } else {
            double loss = opt.loss.empty() ? 0.0 : opt.loss[i];
            double eu = opt.readout_errors ? em.eps_up : 0.0;
            double ed = opt.readout_errors ? em.eps_down : 0.0;
            double keep_up = (1.0 - loss) * (1.0 - eu);
            double false_up = (1.0 - loss) * ed;
            m << keep_up, false_up, 1.0 - keep_up, 1.0 - false_up;
        }
        apply_single(out, n_atoms, i, m);
    }
    return out;
}

std::string atom_axes(const MeasurementBasis& basis, const AddressingPattern& pattern) {
    std::string a(pattern.size(), 'z');
    for (int i = 0; i < pattern.size(); ++i) a[i] = basis.axes[pattern.multiplier(i)];
    return a;
}

QuantumState apply_program(const QuantumState& state, const MeasurementProgram& program,
                           const AddressingPattern& pattern) {
    Mat U = program_unitary(program, pattern, state.space().model);
    if (state.is_pure()) return QuantumState::pure_unchecked(state.space(), U * state.vector());
    return QuantumState::mixed_unchecked(state.space(), U * state.density() * U.adjoint());
}

std::vector<ShotRecord> sample_distribution(const Distribution& p, int n_atoms, int n_shots, std::uint64_t seed,
                                            const std::string& axes, const std::string& basis) {
    if (n_shots < 1) throw ConfigError("need at least one shot");
    std::vector<double> w(p.data(), p.data() + p.size());
    for (double& x : w) x = std::max(0.0, x);
    std::mt19937_64 rng(seed);
    std::discrete_distribution<std::uint32_t> pick(w.begin(), w.end());
    std::vector<ShotRecord> shots(n_shots);
    for (auto& s : shots) {
        s.outcome = pick(rng);
        s.n_atoms = n_atoms;
        s.axes = axes;
        s.basis = basis;
        s.seed = seed;
    }
    return shots;
}

std::vector<ShotRecord> sample_shots(const QuantumState& state, const MeasurementProgram& program,
                                     const AddressingPattern& pattern, const ErrorModel& em, int n_shots,
                                     std::uint64_t seed, const ReadoutOptions* opt) {
    em.validate();
    const int n = state.space().n_atoms;
    if (pattern.size() != n) throw ConfigError("pattern does not match the register");
    Distribution p = outcome_distribution(apply_program(state, program, pattern));
    ReadoutOptions def = readout_options(em, pattern, program.has_local());
    p = apply_readout_channel(p, n, em, opt ? *opt : def);
    return sample_distribution(p, n, n_shots, seed, atom_axes(program.basis, pattern), program.basis.label());
}

Eigen::Matrix2d correction_matrix(const ErrorModel& em) {
    Eigen::Matrix2d m;
    m << 1.0 - em.eps_up, em.eps_down, em.eps_up, 1.0 - em.eps_down;
    return m;
}

Distribution correct_detection_errors(const Distribution& p, int n_atoms, const ErrorModel& em) {
    if (!(em.eps_up + em.eps_down < 1.0)) throw NumericalError("detection error matrix is singular");
    Eigen::Matrix2d inv = correction_matrix(em).inverse();
    Distribution out = p;
    for (int i = 0; i < n_atoms; ++i) apply_single(out, n_atoms, i, inv);
    return out;
}

Distribution clip_and_renormalize(const Distribution& p) {
    Distribution out = p.cwiseMax(0.0);
    double s = out.sum();
    if (s > 0) out /= s;
    return out;
}

double shot_parity(const ShotRecord& s, const PauliString& p) {
    double v = 1.0;
    for (int i = 0; i < p.size(); ++i) {
        if (p.axes[i] == '1') continue;
        if (s.axes.size() != static_cast<std::size_t>(p.size()) || s.axes[i] != p.axes[i])
            throw ConfigError("shot basis " + s.axes + " cannot estimate " + p.axes);
        if (s.down(i)) v = -v;
    }
    return v;
}

Estimate estimate_correlator(const std::vector<ShotRecord>& shots, const PauliString& p) {
    Estimate e;
    e.n = static_cast<long>(shots.size());
    if (e.n == 0) throw ConfigError("no shots");
    double sum = 0.0, sum2 = 0.0;
    for (const auto& s : shots) {
        double v = shot_parity(s, p);
        sum += v;
        sum2 += v * v;
    }
    e.value = sum / e.n;
    if (e.n > 1) {
        double var = (sum2 - e.n * e.value * e.value) / (e.n - 1);
        e.std_error = std::sqrt(std::max(0.0, var) / e.n);
    }
    return e;
}

double correlator_from_distribution(const Distribution& d, int n_atoms, const PauliString& p) {
    Eigen::Index mask = 0;
    for (int i = 0; i < n_atoms; ++i)
        if (p.axes[i] != '1') mask |= Eigen::Index(1) << (n_atoms - 1 - i);
    double v = 0.0;
    for (Eigen::Index o = 0; o < d.size(); ++o) v += (__builtin_popcountll(o & mask) % 2 ? -1.0 : 1.0) * d(o);
    return v;
}

Estimate estimate_connected(const std::vector<ShotRecord>& shots, const PauliString& a, const PauliString& b) {
    Estimate e;
    e.n = static_cast<long>(shots.size());
    if (e.n < 2) throw ConfigError("need at least two shots");
    double ma = 0, mb = 0;
    std::vector<double> va(e.n), vb(e.n);
    for (long k = 0; k < e.n; ++k) {
        va[k] = shot_parity(shots[k], a);
        vb[k] = shot_parity(shots[k], b);
        ma += va[k];
        mb += vb[k];
    }
    ma /= e.n;
    mb /= e.n;
    double cov = 0.0;
    for (long k = 0; k < e.n; ++k) cov += (va[k] - ma) * (vb[k] - mb);
    cov /= e.n;
    double v = 0.0;
    for (long k = 0; k < e.n; ++k) {
        double d = (va[k] - ma) * (vb[k] - mb) - cov;
        v += d * d;
    }
    e.value = cov;
    e.std_error = std::sqrt(v / (e.n - 1) / e.n);
    return e;
}

Distribution histogram(const std::vector<ShotRecord>& shots, int n_atoms) {
    Distribution h = Distribution::Zero(Eigen::Index(1) << n_atoms);
    for (const auto& s : shots) h(s.outcome) += 1.0;
    if (!shots.empty()) h /= static_cast<double>(shots.size());
    return h;
}

} // namespace rydberg
