#include "rydberg/evolve.hpp"

#include <algorithm>
#include <cmath>

#include <unsupported/Eigen/KroneckerProduct>

namespace rydberg {

OperatorProgram OperatorProgram::constant(const Mat& H) {
    OperatorProgram p;
    p.ops.push_back(H.sparseView(1e-300));
    p.coefficients = [](double, double* c) { c[0] = 1.0; };
    return p;
}

namespace {

// All operators re-expressed on the union sparsity pattern so that
// sum_k c_k op_k is one pass over a value array.
struct UnionOperator {
    SpMat shape;
    std::vector<Vec> values;

    explicit UnionOperator(const std::vector<SpMat>& ops, Eigen::Index dim) {
        std::vector<Eigen::Triplet<cplx>> trip;
        for (const auto& op : ops)
            for (int k = 0; k < op.outerSize(); ++k)
                for (SpMat::InnerIterator it(op, k); it; ++it) trip.emplace_back(it.row(), it.col(), 1.0);
        for (Eigen::Index i = 0; i < dim; ++i) trip.emplace_back(i, i, 1.0);  // keep the diagonal
        shape.resize(dim, dim);
        shape.setFromTriplets(trip.begin(), trip.end());
        shape.makeCompressed();
        const auto* outer = shape.outerIndexPtr();
        const auto* inner = shape.innerIndexPtr();
        for (const auto& op : ops) {
            Vec v = Vec::Zero(shape.nonZeros());
            for (int k = 0; k < op.outerSize(); ++k)
                for (SpMat::InnerIterator it(op, k); it; ++it) {
                    auto* first = inner + outer[k];
                    auto* last = inner + outer[k + 1];
                    auto* pos = std::lower_bound(first, last, static_cast<int>(it.row()));
                    v(pos - inner) += it.value();
                }
            values.push_back(std::move(v));
        }
    }

    void assemble(const cplx* c, SpMat& out) const {
        if (out.nonZeros() != shape.nonZeros()) out = shape;
        Eigen::Map<Vec> dst(out.valuePtr(), out.nonZeros());
        dst.setZero();
        for (std::size_t k = 0; k < values.size(); ++k)
            if (c[k] != cplx(0.0)) dst += c[k] * values[k];
    }
};

bool any_active_channel(const EvolutionSpec& spec) {
    for (const auto& ch : spec.channels)
        if (ch.rate > 0.0) return true;
    return false;
}

} // namespace

QuantumState evolve_unitary(const QuantumState& state, const EvolutionSpec& spec, IntegratorStats* stats) {
    if (any_active_channel(spec)) throw ConfigError("unitary evolution cannot carry decay channels");
    if (!state.is_pure()) throw ConfigError("unitary engine expects a state vector");
    const auto& prog = spec.hamiltonian;
    const std::size_t nk = prog.ops.size();
    const Eigen::Index D = state.space().dim();
    UnionOperator H(prog.ops, D);
    std::vector<double> c(nk);
    std::vector<cplx> cc(nk);
    SpMat Ht = H.shape;
    Rhs<Vec> f = [&](double t, const Vec& psi, Vec& out) {
        if (nk) prog.coefficients(t, c.data());
        for (std::size_t k = 0; k < nk; ++k) cc[k] = cplx(0.0, -c[k]);
        H.assemble(cc.data(), Ht);
        out.noalias() = Ht * psi;
    };
    Vec psi = state.vector();
    auto st = dopri5<Vec>(psi, spec.t_start, spec.t_end, f, spec.integrator);
    if (stats) *stats = st;
    return QuantumState::pure_unchecked(state.space(), std::move(psi));
}

QuantumState evolve_lindblad(const QuantumState& state, const EvolutionSpec& spec, IntegratorStats* stats) {
    const auto& prog = spec.hamiltonian;
    const std::size_t nk = prog.ops.size();
    const std::size_t nj = spec.channels.size();
    const Eigen::Index D = state.space().dim();

    // H_eff = H - (i/2) sum_j gamma_j L_j^dagger L_j, on one pattern.
    std::vector<SpMat> all = prog.ops;
    for (const auto& ch : spec.channels) all.push_back(SpMat(ch.jump.adjoint() * ch.jump));
    UnionOperator Heff(all, D);
    std::vector<double> c(nk), scale(nj, 1.0);
    std::vector<cplx> cc(nk + nj);
    SpMat Ht = Heff.shape;
    Mat X(D, D), Y(D, D), Z(D, D);

    Rhs<Mat> f = [&](double t, const Mat& rho, Mat& out) {
        if (nk) prog.coefficients(t, c.data());
        if (spec.channel_scale) spec.channel_scale(t, scale.data());
        for (std::size_t k = 0; k < nk; ++k) cc[k] = c[k];
        for (std::size_t j = 0; j < nj; ++j) cc[nk + j] = cplx(0.0, -0.5 * spec.channels[j].rate * scale[j]);
        Heff.assemble(cc.data(), Ht);
        X.noalias() = Ht * rho;
        out = -kI * (X - X.adjoint());
        for (std::size_t j = 0; j < nj; ++j) {
            double g = spec.channels[j].rate * scale[j];
            if (g <= 0.0) continue;
            const SpMat& L = spec.channels[j].jump;
            Y.noalias() = L * rho;
            Z = Y.adjoint();
            out.noalias() += g * (L * Z);
        }
    };
    Mat rho = state.to_density();
    auto sym = [](Mat& m) { m = 0.5 * (m + m.adjoint()).eval(); };
    auto st = dopri5<Mat>(rho, spec.t_start, spec.t_end, f, spec.integrator, sym);
    if (stats) *stats = st;
    return QuantumState::mixed_unchecked(state.space(), std::move(rho));
}

// ------------------------------------------------------------ sequences

namespace {

template <class... Ts> struct overloaded : Ts... { using Ts::operator()...; };
template <class... Ts> overloaded(Ts...) -> overloaded<Ts...>;

// Operator layout shared by every element of one run.
struct SystemOperators {
    Space space;
    std::vector<std::pair<int, int>> pairs;
    std::vector<SpMat> ops;
    int ff = 0, vuu = 0, vdd = 0, pu = 0, sx = 0, sy = 0;

    explicit SystemOperators(const Space& s) : space(s) {
        const int n = s.n_atoms;
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j) pairs.emplace_back(i, j);
        Mat pup = local_projector(level::up, s.model);
        Mat pdn = local_projector(level::down, s.model);
        ff = 0;
        for (auto [i, j] : pairs) ops.push_back(flip_flop(i, j, s));
        vuu = static_cast<int>(ops.size());
        for (auto [i, j] : pairs) ops.push_back(site_operator(pup, i, s) * site_operator(pup, j, s));
        vdd = static_cast<int>(ops.size());
        for (auto [i, j] : pairs) ops.push_back(site_operator(pdn, i, s) * site_operator(pdn, j, s));
        pu = static_cast<int>(ops.size());
        for (int i = 0; i < n; ++i) ops.push_back(site_operator(pup, i, s));
        SpMat X(s.dim(), s.dim()), Yop(s.dim(), s.dim());
        for (int i = 0; i < n; ++i) {
            X += site_operator(local_pauli('x', s.model), i, s);
            Yop += site_operator(local_pauli('y', s.model), i, s);
        }
        sx = static_cast<int>(ops.size());
        ops.push_back(X);
        sy = static_cast<int>(ops.size());
        ops.push_back(Yop);
    }
    int count() const { return static_cast<int>(ops.size()); }
};

struct Tone {
    double omega_max;  // MHz, already renormalized for the truncation
    double t_width;
    double center;
    double cut;
    double detuning;   // MHz
    double phase;
    double t_ref;

    double envelope(double t) const {
        double u = t - center;
        if (std::abs(u) > cut) return 0.0;
        return omega_max * std::exp(-kPi * (u / t_width) * (u / t_width));
    }
};

Tone make_tone(const GaussianPulse& p, double center, double cut, double t_ref) {
    p.validate();
    double frac = std::erf(std::sqrt(kPi) * cut / p.t_width);
    return {p.omega_max / frac, p.t_width, center, cut, p.detuning, p.phase, t_ref};
}

class Runner {
public:
    Runner(ExecutionContext& ctx) : ctx_(ctx), sys_(ctx.space()) {
        const int n = ctx.geometry->size();
        if (ctx.pattern->size() != n) throw ConfigError("pattern and geometry sizes differ");
        if (ctx_.noise.disorder.offset.empty()) ctx_.noise.disorder = DisorderRealization::none(n);
        if (ctx_.noise.lightshift_scale.empty()) ctx_.noise.lightshift_scale.assign(n, 1.0);
        if (ctx_.noise.inert.empty()) ctx_.noise.inert.assign(n, false);
    }

    QuantumState run(QuantumState state, const PulseSequence& seq) {
        for (const auto& e : seq.elements) state = step(std::move(state), e);
        return state;
    }

private:
    ExecutionContext& ctx_;
    SystemOperators sys_;

    bool five() const { return ctx_.physics.model == AtomModel::FiveLevel; }

    // Interaction coefficients at absolute time t.
    void interactions(double t, double* c) const {
        const auto pos = positions_at(*ctx_.geometry, ctx_.noise.disorder, t);
        const auto& k = ctx_.physics.constants;
        for (std::size_t p = 0; p < sys_.pairs.size(); ++p) {
            auto [i, j] = sys_.pairs[p];
            if (ctx_.noise.inert[i] || ctx_.noise.inert[j]) {
                c[sys_.ff + p] = c[sys_.vuu + p] = c[sys_.vdd + p] = 0.0;
                continue;
            }
            double s = k.a / (pos[i] - pos[j]).norm();
            double s3 = s * s * s;
            c[sys_.ff + p] = angular(k.J) * s3;
            c[sys_.vuu + p] = ctx_.physics.vdw ? angular(k.c6_upup) * s3 * s3 : 0.0;
            c[sys_.vdd + p] = ctx_.physics.vdw ? angular(k.c6_downdown) * s3 * s3 : 0.0;
        }
    }

    void add_tone(const Tone& tone, double t, double* c) const {
        double om = tone.envelope(t);
        if (om == 0.0) return;
        double theta = tone.phase - angular(tone.detuning) * (t - tone.t_ref);
        c[sys_.sx] += 0.5 * angular(om) * std::cos(theta);
        c[sys_.sy] += 0.5 * angular(om) * std::sin(theta);
    }

    std::vector<DecayChannel> base_channels() const {
        if (!five() || !ctx_.lifetime) return {};
        return lifetime_channels(sys_.space, ctx_.physics);
    }

    void add_depumping(std::vector<DecayChannel>& ch) const {
        if (!five() || !ctx_.depumping) return;
        const auto& ph = ctx_.physics;
        for (int i = 0; i < sys_.space.n_atoms; ++i) {
            int n = ctx_.pattern->multiplier(i);
            if (n == 0) continue;
            double tau = n == 1 ? ph.tau_depump_1 : ph.tau_depump_2;
            ch.push_back({site_operator(local_transition(level::p6, level::up, ph.model), i, sys_.space),
                          1.0 / tau, "depump"});
            ch.push_back({site_operator(local_transition(level::g, level::p6, ph.model), i, sys_.space),
                          1.0 / ph.tau_p6, "p6 decay"});
        }
    }

    QuantumState integrate(QuantumState state, OperatorProgram prog, std::vector<DecayChannel> channels,
                           double duration, double max_step,
                           std::function<void(double, double*)> scale = {}) {
        EvolutionSpec spec;
        spec.hamiltonian = std::move(prog);
        spec.channels = std::move(channels);
        spec.channel_scale = std::move(scale);
        spec.t_start = ctx_.clock;
        spec.t_end = ctx_.clock + duration;
        spec.integrator = ctx_.integrator;
        spec.integrator.max_step = std::min(spec.integrator.max_step, max_step);
        ctx_.clock += duration;
        if (duration <= 0.0) return state;
        if (state.is_pure() && !any_active_channel(spec)) return evolve_unitary(state, spec);
        return evolve_lindblad(state, spec);
    }

    OperatorProgram program(std::function<void(double, double*)> extra) const {
        OperatorProgram p;
        p.ops = sys_.ops;
        const int nc = sys_.count();
        p.coefficients = [this, nc, extra = std::move(extra)](double t, double* c) {
            std::fill(c, c + nc, 0.0);
            interactions(t, c);
            if (extra) extra(t, c);
        };
        return p;
    }

    QuantumState step(QuantumState state, const SequenceElement& e) {
        return std::visit(
            overloaded{
                [&](const GlobalPulse& g) {
                    double cut = g.pulse.half_window();
                    double t0 = ctx_.clock;
                    Tone tone = make_tone(g.pulse, t0 + cut, cut, t0);
                    auto prog = program([this, tone](double t, double* c) { add_tone(tone, t, c); });
                    return integrate(std::move(state), std::move(prog), base_channels(), 2 * cut, cut / 4);
                },
                [&](const LocalDualTone& l) {
                    const double W = l.addressing_on;
                    const double t0 = ctx_.clock;
                    const double j = ctx_.noise.jitter;
                    std::vector<Tone> tones;
                    for (const auto* p : {&l.tone0, &l.tone1})
                        if (*p) {
                            double cut = std::min((*p)->half_window(), W / 2);
                            tones.push_back(make_tone(**p, t0 + W / 2 + j, cut, t0 + j));
                        }
                    std::vector<double> shift(sys_.space.n_atoms);
                    for (int i = 0; i < sys_.space.n_atoms; ++i)
                        shift[i] = -angular(ctx_.pattern->multiplier(i) * ctx_.physics.delta *
                                            ctx_.noise.lightshift_scale[i]);
                    auto prog = program([this, tones, shift](double t, double* c) {
                        for (std::size_t i = 0; i < shift.size(); ++i) c[sys_.pu + i] = shift[i];
                        for (const auto& tone : tones) add_tone(tone, t, c);
                    });
                    auto ch = base_channels();
                    add_depumping(ch);
                    return integrate(std::move(state), std::move(prog), std::move(ch), W, W / 8);
                },
                [&](const PhaseImprint& p) {
                    Mat U = phase_imprint_unitary(p.phi, *ctx_.pattern, ctx_.physics.model);
                    if (state.is_pure()) return QuantumState::pure_unchecked(state.space(), U * state.vector());
                    return QuantumState::mixed_unchecked(state.space(), U * state.density() * U.adjoint());
                },
                [&](const AddressingRamp& r) {
                    if (!(r.tau > 0)) throw ConfigError("ramp time constant must be positive");
                    const double t0 = ctx_.clock - r.elapsed;
                    std::vector<double> amp(sys_.space.n_atoms);
                    for (int i = 0; i < sys_.space.n_atoms; ++i)
                        amp[i] = -angular(r.delta0[ctx_.pattern->multiplier(i)] * ctx_.noise.lightshift_scale[i]);
                    const double tau = r.tau;
                    auto prog = program([this, amp, t0, tau](double t, double* c) {
                        double decay = std::exp(-(t - t0) / tau);
                        for (std::size_t i = 0; i < amp.size(); ++i) c[sys_.pu + i] = amp[i] * decay;
                    });
                    auto ch = base_channels();
                    std::size_t first_depump = ch.size();
                    add_depumping(ch);
                    std::function<void(double, double*)> scale;
                    if (ch.size() > first_depump) {
                        const std::size_t nch = ch.size();
                        scale = [first_depump, nch, t0, tau](double t, double* s) {
                            double decay = std::exp(-(t - t0) / tau);
                            for (std::size_t k = 0; k < nch; ++k) s[k] = 1.0;
                            for (std::size_t k = first_depump; k < nch; k += 2) s[k] = decay;
                        };
                    }
                    return integrate(std::move(state), std::move(prog), std::move(ch), r.duration,
                                     std::max(r.duration / 16, 1e-3), std::move(scale));
                },
                [&](const Wait& w) {
                    return integrate(std::move(state), program({}), base_channels(), w.duration,
                                     std::max(w.duration / 8, 1e-3));
                },
                [&](const Freeze& f) {
                    auto ch = base_channels();
                    if (five())
                        for (int i = 0; i < sys_.space.n_atoms; ++i)
                            ch.push_back({site_operator(local_transition(level::r, level::down, AtomModel::FiveLevel),
                                                        i, sys_.space),
                                          f.rate, "freeze"});
                    return integrate(std::move(state), program({}), std::move(ch), f.duration, f.duration / 8);
                },
                [&](const Readout&) { return state; },
            },
            e);
    }
};

} // namespace

QuantumState run_sequence(const QuantumState& initial, const PulseSequence& sequence, ExecutionContext& ctx) {
    if (!ctx.geometry || !ctx.pattern) throw ConfigError("execution context lacks geometry or pattern");
    if (!(initial.space() == ctx.space())) throw ConfigError("state does not match the atom model");
    Runner runner(ctx);
    return runner.run(initial, sequence);
}

QuantumState run_sequence(const QuantumState& initial, const PulseSequence& sequence,
                          const ArrayGeometry& geometry, const AddressingPattern& pattern, AtomModel model) {
    ExecutionContext ctx;
    ctx.geometry = &geometry;
    ctx.pattern = &pattern;
    ctx.physics.model = model;
    ctx.physics.vdw = false;
    return run_sequence(initial, sequence, ctx);
}

std::vector<DecayChannel> lifetime_channels(const Space& space, const PhysicalModel& ph) {
    std::vector<DecayChannel> ch;
    if (space.model != AtomModel::FiveLevel) return ch;
    using namespace level;
    auto add = [&](int to, int from, double tau, const char* label) {
        for (int i = 0; i < space.n_atoms; ++i)
            ch.push_back({site_operator(local_transition(to, from, space.model), i, space), 1.0 / tau, label});
    };
    add(g, up, ph.tau_sp_up, "up spontaneous");
    add(r, up, ph.tau_bb_up, "up black body");
    add(g, down, ph.tau_sp_down, "down spontaneous");
    add(r, down, ph.tau_bb_down, "down black body");
    return ch;
}

QuantumState stirap_initial_state(const Space& space, double eta) {
    if (eta < 0 || eta > 1) throw ConfigError("STIRAP efficiency must be in [0,1]");
    if (space.model != AtomModel::FiveLevel) {
        if (eta != 1.0) throw ConfigError("preparation failure needs the 5-level model");
        return QuantumState::uniform(space, level::up);
    }
    Mat one = Mat::Zero(5, 5);
    one(level::up, level::up) = eta;
    one(level::g, level::g) = 1.0 - eta;
    Mat rho = one;
    for (int i = 1; i < space.n_atoms; ++i) rho = Eigen::kroneckerProduct(rho, one).eval();
    return QuantumState::mixed(space, rho);
}

QuantumState ramp_initial_state(const AddressingPattern& pattern, AtomModel model) {
    std::vector<int> levels(pattern.size());
    for (int i = 0; i < pattern.size(); ++i)
        levels[i] = pattern.classes[i] == AtomClass::Zero ? level::up : level::down;
    return QuantumState::product(Space{model, pattern.size()}, levels);
}

Mat afm_frame_hamiltonian(const std::vector<Vec3>& positions, const AddressingPattern& pattern,
                          const CouplingConstants& c, double delta_unit_mhz) {
    CouplingConstants afm = c;
    afm.J = -c.J;
    Mat K = xy_hamiltonian(positions, afm).matrix;
    if (delta_unit_mhz > 0) K += lightshift_hamiltonian(pattern, delta_unit_mhz).matrix;
    return K;
}

Symmetry pattern_symmetry(const AddressingPattern& pattern, const ArrayGeometry& geometry) {
    for (Symmetry s : {Symmetry::MirrorY, Symmetry::Inversion}) {
        try {
            symmetry_permutation(s, geometry, pattern);
            return s;
        } catch (const ConfigError&) {
        }
    }
    throw ConfigError("pattern has neither mirror nor inversion symmetry");
}

std::vector<LabeledEigenpair> ramp_levels(const AddressingPattern& pattern, const Mat& K, const Mat& S) {
    int n_down = 0;
    for (AtomClass c : pattern.classes) n_down += c != AtomClass::Zero;
    auto idx = magnetization_sector(pattern.size(), n_down);
    if (K.rows() != (Eigen::Index(1) << pattern.size()) || S.rows() != K.rows())
        throw ConfigError("ramp generator must act on the qubit space of the pattern");
    Mat Ks = K(idx, idx), Ss = S(idx, idx);
    auto levels = symmetry_resolved_spectrum(Ks, Ss);
    for (auto& l : levels) {
        Vec full = Vec::Zero(K.rows());
        full(idx) = l.vector;
        l.vector = std::move(full);
    }
    return levels;
}

AdiabaticTrace adiabatic_populations(const AddressingPattern& pattern, double tau,
                                     const ArrayGeometry& geometry, const RampOptions& opt) {
    if (!(tau > 0)) throw ConfigError("ramp time constant must be positive");
    if (opt.n_times < 2) throw ConfigError("need at least two time points");
    Space space{AtomModel::Qubit, geometry.size()};
    Symmetry sym = pattern_symmetry(pattern, geometry);
    Mat S = permutation_operator(symmetry_permutation(sym, geometry, pattern), space);

    ExecutionContext ctx;
    ctx.geometry = &geometry;
    ctx.pattern = &pattern;
    ctx.physics.model = AtomModel::Qubit;
    ctx.physics.vdw = false;
    ctx.physics.constants = opt.constants;
    ctx.integrator = opt.integrator;

    AdiabaticTrace trace;
    QuantumState psi = ramp_initial_state(pattern);
    double prev = 0.0;
    for (int k = 0; k < opt.n_times; ++k) {
        double t = opt.duration * k / (opt.n_times - 1);
        if (t > prev) {
            AddressingRamp ramp;
            ramp.delta0 = {0.0, opt.delta_unit, 2 * opt.delta_unit};
            ramp.tau = tau;
            ramp.elapsed = prev;
            ramp.duration = t - prev;
            psi = run_sequence(psi, PulseSequence{{ramp}}, ctx);
        }
        prev = t;
        double delta_t = opt.delta_unit * std::exp(-t / tau);
        Mat K = afm_frame_hamiltonian(geometry.positions, pattern, opt.constants, delta_t);
        auto levels = ramp_levels(pattern, K, S);
        Eigen::VectorXd e(levels.size()), pop(levels.size());
        std::vector<int> lab(levels.size());
        for (std::size_t i = 0; i < levels.size(); ++i) {
            e(i) = levels[i].value / kTwoPi;
            pop(i) = std::norm(levels[i].vector.dot(psi.vector()));
            lab[i] = levels[i].label;
        }
        trace.times.push_back(t);
        trace.energies.push_back(e);
        trace.populations.push_back(pop);
        trace.labels.push_back(lab);
        trace.states.push_back(psi.vector());
    }
    return trace;
}

} // namespace rydberg
