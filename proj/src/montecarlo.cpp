#include "rydberg/montecarlo.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include <Eigen/Eigenvalues>

#include "rydberg/tomography.hpp"

namespace rydberg {

// ------------------------------------------------------------- toggles

ErrorToggles ErrorToggles::all_off() {
    ErrorToggles t;
    for (const auto& n : names()) t.set(n, false);
    return t;
}

ErrorToggles ErrorToggles::state_only() {
    ErrorToggles t = all_off();
    t.stirap = t.lifetime = t.disorder = t.vdw = true;
    return t;
}

const std::vector<std::string>& ErrorToggles::names() {
    static const std::vector<std::string> n{"stirap",     "lifetime", "disorder", "depumping", "loss",
                                            "lightshift", "jitter",   "readout",  "vdw",       "pulses"};
    return n;
}

namespace {

template <class T>
auto& toggle_ref(T& t, const std::string& name) {
    if (name == "stirap") return t.stirap;
    if (name == "lifetime") return t.lifetime;
    if (name == "disorder") return t.disorder;
    if (name == "depumping") return t.depumping;
    if (name == "loss") return t.loss;
    if (name == "lightshift") return t.lightshift;
    if (name == "jitter") return t.jitter;
    if (name == "readout") return t.readout;
    if (name == "vdw") return t.vdw;
    if (name == "pulses") return t.pulses;
    throw ConfigError("unknown error mechanism '" + name + "'");
}

} // namespace

bool ErrorToggles::get(const std::string& name) const { return toggle_ref(*this, name); }
void ErrorToggles::set(const std::string& name, bool value) { toggle_ref(*this, name) = value; }

AtomModel ErrorToggles::required_model() const {
    return stirap || lifetime || depumping ? AtomModel::FiveLevel : AtomModel::Qubit;
}

// ---------------------------------------------------------------- plans

std::string to_string(PlanKind k) {
    switch (k) {
    case PlanKind::Ramsey: return "ramsey";
    case PlanKind::Chirality: return "chirality";
    case PlanKind::Adiabatic: return "adiabatic";
    case PlanKind::WBudget: return "w_budget";
    }
    return "?";
}

PlanKind parse_plan_kind(const std::string& s) {
    for (PlanKind k : {PlanKind::Ramsey, PlanKind::Chirality, PlanKind::Adiabatic, PlanKind::WBudget})
        if (to_string(k) == s) return k;
    throw ConfigError("unknown plan kind '" + s + "'");
}

void ExperimentPlan::validate() const {
    if (realizations < 1) throw ConfigError("need at least one realization");
    if (shots < 0) throw ConfigError("shots must be non-negative");
    if (pattern < 0 || pattern > 2) throw ConfigError("pattern must be 0, 1 or 2");
    if (!(a > 0)) throw ConfigError("lattice spacing must be positive");
    if (kind == PlanKind::Adiabatic) {
        if (pattern == 0) throw ConfigError("adiabatic plans need a two-triangle pattern");
        if (!(tau > 0) || wait < 0) throw ConfigError("ramp time constant must be positive");
        for (std::size_t k = 0; k < sweep.size(); ++k)
            if (sweep[k] < 0 || (k && sweep[k] < sweep[k - 1]))
                throw ConfigError("checkpoint times must be non-negative and ascending");
    } else if (pattern != 0) {
        throw ConfigError(to_string(kind) + " plans use the single triangle");
    }
    if (kind != PlanKind::WBudget && sweep.empty()) throw ConfigError("sweep is empty");
    if (lightshift_sigma < 0) throw ConfigError("light-shift dispersion must be non-negative");
    errors.validate();
}

ArrayGeometry ExperimentPlan::geometry() const {
    return pattern == 0 ? build_triangle_array(a, 1) : build_triangle_array(a, 2, separation);
}

AddressingPattern ExperimentPlan::addressing() const {
    return pattern == 0 ? triangle_pattern() : two_triangle_pattern(pattern);
}

std::vector<double> default_sweep(PlanKind k) {
    std::vector<double> s;
    if (k == PlanKind::Adiabatic) {
        for (int i = 0; i <= 32; ++i) s.push_back(0.25 * i);
    } else if (k != PlanKind::WBudget) {
        for (int i = 0; i < 12; ++i) s.push_back(kTwoPi * i / 12.0);
    }
    return s;
}

std::vector<double> SweepResult::series(const std::string& observable) const {
    std::vector<double> out;
    for (const auto& r : rows)
        if (r.observable == observable) out.push_back(r.mean);
    return out;
}

std::vector<double> SweepResult::errors(const std::string& observable) const {
    std::vector<double> out;
    for (const auto& r : rows)
        if (r.observable == observable) out.push_back(r.std_error);
    return out;
}

const SweepRow& SweepResult::at(std::size_t sweep_index, const std::string& observable) const {
    std::size_t k = 0;
    for (const auto& r : rows)
        if (r.observable == observable && k++ == sweep_index) return r;
    throw ConfigError("no row " + std::to_string(sweep_index) + " for " + observable);
}

// --------------------------------------------------------------- seeding

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

enum Stream : std::uint64_t { kNoise = 1, kShots = 2 };

} // namespace

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream, std::uint64_t sweep,
                          std::uint64_t realization) {
    std::uint64_t h = splitmix64(master);
    h = splitmix64(h ^ stream);
    h = splitmix64(h ^ sweep);
    return splitmix64(h ^ realization);
}

NoiseSample draw_noise(const ExperimentPlan& plan, const ArrayGeometry& geometry, AtomModel model,
                       std::uint64_t seed) {
    const int n = geometry.size();
    NoiseSample s;
    DisorderModel dm = plan.disorder;
    dm.enabled = dm.enabled && plan.toggles.disorder;
    s.disorder = sample_disorder(geometry, dm, splitmix64(seed ^ 0xd15d15ULL));
    std::mt19937_64 rng(splitmix64(seed ^ 0x5eedULL));
    std::normal_distribution<double> n01(0.0, 1.0);
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    s.lightshift_scale.assign(n, 1.0);
    s.inert.assign(n, false);
    // Fixed draw order so that toggling one mechanism leaves the others intact.
    for (int i = 0; i < n; ++i) {
        double g = n01(rng);
        if (plan.toggles.lightshift) s.lightshift_scale[i] = 1.0 + plan.lightshift_sigma * g;
    }
    double jit = n01(rng);
    if (plan.toggles.jitter) s.jitter = 1e-3 * plan.errors.jitter_sigma_ns * jit;
    for (int i = 0; i < n; ++i) {
        double u = u01(rng);
        // The 5-level model carries preparation failure exactly in the state.
        if (plan.toggles.stirap && model == AtomModel::Qubit) s.inert[i] = u > plan.errors.eta_stirap;
    }
    return s;
}

SweepRow reduce(double sweep, const std::string& observable, const std::vector<double>& values) {
    SweepRow r;
    r.sweep = sweep;
    r.observable = observable;
    r.n = static_cast<long>(values.size());
    if (values.empty()) return r;
    double sum = 0.0;
    for (double v : values) sum += v;
    r.mean = sum / r.n;
    if (r.n > 1) {
        double ss = 0.0;
        for (double v : values) ss += (v - r.mean) * (v - r.mean);
        r.std = std::sqrt(ss / (r.n - 1));
        r.std_error = r.std / std::sqrt(double(r.n));
    }
    return r;
}

// ------------------------------------------------------------ pipelines

namespace {

ExecutionContext make_context(const ExperimentPlan& plan, const ArrayGeometry& geometry,
                              const AddressingPattern& pattern, const NoiseSample& noise, AtomModel model) {
    ExecutionContext ctx;
    ctx.geometry = &geometry;
    ctx.pattern = &pattern;
    ctx.physics = plan.physics;
    ctx.physics.model = model;
    ctx.physics.vdw = plan.toggles.vdw;
    ctx.noise = noise;
    ctx.lifetime = plan.toggles.lifetime;
    ctx.depumping = plan.toggles.depumping;
    ctx.integrator = plan.integrator;
    return ctx;
}

QuantumState initial_register(const ExperimentPlan& plan, AtomModel model, int n_atoms) {
    Space sp{model, n_atoms};
    if (model == AtomModel::FiveLevel && plan.toggles.stirap)
        return stirap_initial_state(sp, plan.errors.eta_stirap);
    return QuantumState::uniform(sp, level::up);
}

// Measurement of a (possibly traceless) Hermitian operator through the
// compiled program: the outcome map is linear in its input.
Distribution measure_map(const ExperimentPlan& plan, const Mat& X, const MeasurementProgram& program,
                         ExecutionContext ctx) {
    const Space sp = ctx.space();
    QuantumState s = QuantumState::mixed_unchecked(sp, X);
    if (plan.toggles.pulses) {
        PulseSequence seq = to_pulse_sequence(program, ctx.physics.pulses);
        if (sp.model == AtomModel::FiveLevel) seq.elements.emplace_back(Freeze{});
        s = run_sequence(s, seq, ctx);
    } else {
        s = apply_program(s, program, *ctx.pattern);
    }
    return outcome_distribution(s);
}

Distribution readout(const ExperimentPlan& plan, const Distribution& p, const AddressingPattern& pattern,
                     bool local_stage, const std::vector<bool>& inert = {}) {
    ReadoutOptions o = readout_options(plan.errors, pattern, local_stage, plan.toggles.readout, plan.toggles.loss);
    o.forced_up = inert;
    return apply_readout_channel(p, pattern.size(), plan.errors, o);
}

// Up-weight m(a) = sum_i n_i [atom i up]; the imprint multiplies rho_ab by
// exp(i phi (m(a) - m(b))).
std::vector<int> imprint_weights(const Space& sp, const AddressingPattern& pattern) {
    std::vector<int> m(sp.dim(), 0);
    for (Eigen::Index k = 0; k < sp.dim(); ++k)
        for (int i = 0; i < sp.n_atoms; ++i)
            if (sp.digit(k, i) == level::up) m[k] += pattern.multiplier(i);
    return m;
}

} // namespace

double w_resonance(const ArrayGeometry& geometry, const PhysicalModel& physics) {
    if (geometry.size() != 3) throw ConfigError("W resonance is defined for the triangle");
    Mat H = xy_hamiltonian(geometry.positions, physics.constants).matrix;
    if (physics.vdw) H += vdw_hamiltonian(geometry.positions, physics.constants).matrix;
    Vec w = w_state();
    double ew = (w.adjoint() * H * w)(0, 0).real();
    return (ew - H(0, 0).real()) / kTwoPi;
}

QuantumState prepare_w(const ExperimentPlan& plan, ExecutionContext& ctx) {
    const Space sp = ctx.space();
    QuantumState s = initial_register(plan, sp.model, sp.n_atoms);
    if (sp.model == AtomModel::FiveLevel) s = s.as_mixed();
    GaussianPulse pulse = w_prep_pulse(ctx.physics.constants.J);
    pulse.detuning = w_resonance(*ctx.geometry, ctx.physics);
    PulseSequence seq{{GlobalPulse{pulse}}};
    return run_sequence(s, seq, ctx);
}

std::vector<ChiralityPoint> chirality_realization(const ExperimentPlan& plan, const ArrayGeometry& geometry,
                                                  const AddressingPattern& pattern, const NoiseSample& noise,
                                                  std::uint64_t shot_seed) {
    const AtomModel model = plan.toggles.required_model();
    ExecutionContext ctx = make_context(plan, geometry, pattern, noise, model);
    QuantumState prepared = prepare_w(plan, ctx);
    const Space sp = ctx.space();
    const Mat rho = prepared.to_density();
    const std::array<int, 3> atoms{0, 1, 2};
    const auto ccw = ccw_ordering(geometry, atoms);
    const auto meas = chirality_measurements(geometry, pattern, atoms);

    // Fourier components in phi: rho(phi) = C0 + sum_k cos(k phi) Ck + sin(k phi) Sk.
    const auto m = imprint_weights(sp, pattern);
    const int kmax = 3;
    auto band = [&](int k) {
        Mat R = Mat::Zero(sp.dim(), sp.dim());
        for (Eigen::Index a = 0; a < sp.dim(); ++a)
            for (Eigen::Index b = 0; b < sp.dim(); ++b)
                if (m[a] - m[b] == k) R(a, b) = rho(a, b);
        return R;
    };
    std::vector<Mat> comps{band(0)};
    for (int k = 1; k <= kmax; ++k) {
        Mat R = band(k);
        comps.push_back(R + R.adjoint());
        comps.push_back(kI * (R - R.adjoint()));
    }

    // Outcome distributions of each basis for each component.
    std::array<std::vector<Distribution>, 6> dist;
    std::array<bool, 6> local{};
    for (int b = 0; b < 6; ++b) {
        MeasurementProgram prog = compile_measurement_basis(meas[b].basis);
        local[b] = prog.has_local();
        for (const Mat& X : comps) {
            if (X.cwiseAbs().maxCoeff() < 1e-14) {
                dist[b].push_back(Distribution::Zero(8));
                continue;
            }
            dist[b].push_back(measure_map(plan, X, prog, ctx));
        }
    }

    std::vector<ChiralityPoint> out;
    for (std::size_t s = 0; s < plan.sweep.size(); ++s) {
        const double phi = plan.sweep[s];
        ChiralityPoint pt;
        pt.phi = phi;
        Mat U = phase_imprint_unitary(phi, pattern, model);
        pt.state_value = chirality(QuantumState::mixed_unchecked(sp, U * rho * U.adjoint()), ccw).value;
        std::array<double, 6> terms{}, se{};
        for (int b = 0; b < 6; ++b) {
            Distribution p = dist[b][0];
            for (int k = 1; k <= kmax; ++k)
                p += std::cos(k * phi) * dist[b][2 * k - 1] + std::sin(k * phi) * dist[b][2 * k];
            p = readout(plan, clip_and_renormalize(p), pattern, local[b]);
            PauliString zzz{"zzz"};
            if (plan.shots > 0) {
                auto shots = sample_distribution(p, 3, plan.shots, derive_seed(shot_seed, kShots, s, b), "zzz",
                                                 meas[b].basis.label());
                Estimate e = estimate_correlator(shots, zzz);
                terms[b] = e.value;
                se[b] = e.std_error;
            } else {
                terms[b] = correlator_from_distribution(p, 3, zzz);
            }
        }
        auto res = chirality_from_terms(terms, se);
        pt.measured_value = res.value;
        pt.terms = terms;
        out.push_back(pt);
    }
    return out;
}

namespace {

double w_fidelity(const ExperimentPlan& plan, int r) {
    ArrayGeometry geo = plan.geometry();
    AddressingPattern pat = plan.addressing();
    const AtomModel model = plan.toggles.required_model();
    NoiseSample noise = draw_noise(plan, geo, model, derive_seed(plan.seed, kNoise, 0, r));
    ExecutionContext ctx = make_context(plan, geo, pat, noise, model);
    QuantumState s = prepare_w(plan, ctx);
    Vec w = embed_qubit_state(w_state(), 3, model);
    if (s.is_pure()) return std::norm(w.dot(s.vector()));
    return (w.adjoint() * s.density() * w)(0, 0).real();
}

// Mechanisms that act during W preparation.
const std::vector<std::string>& preparation_mechanisms() {
    static const std::vector<std::string> m{"stirap", "lifetime", "disorder", "vdw"};
    return m;
}

} // namespace

std::vector<BudgetRow> error_budget(const ExperimentPlan& plan) {
    std::vector<BudgetRow> out;
    auto run = [&](const std::string& label, const ErrorToggles& t) {
        ExperimentPlan p = plan;
        p.toggles = t;
        int n = t.disorder ? plan.realizations : 1;
        auto f = realize(n, plan.parallel, [&](int r) { return w_fidelity(p, r); });
        SweepRow row = reduce(0.0, label, f);
        out.push_back({label, row.mean, row.std, 0.0});
    };
    run("none", ErrorToggles::all_off());
    for (const auto& m : preparation_mechanisms()) {
        ErrorToggles t = ErrorToggles::all_off();
        t.set(m, true);
        run(m, t);
    }
    ErrorToggles all = ErrorToggles::all_off();
    for (const auto& m : preparation_mechanisms()) all.set(m, plan.toggles.get(m));
    run("all", all);
    for (auto& r : out) r.contribution = out.front().fidelity - r.fidelity;
    return out;
}

// ------------------------------------------------------------- adiabatic

namespace {

struct CheckpointData {
    std::array<Distribution, 6> dist;  // after readout, per same-permutation basis
    double p0 = 0.0, p1 = 0.0;
};

std::array<MeasurementBasis, 6> same_permutation_bases() {
    std::array<MeasurementBasis, 6> b;
    for (int k = 0; k < 6; ++k) b[k].axes = chirality_terms()[k].axes;
    return b;
}

// z-type strings for triangle A, triangle B and both, by atom mask.
PauliString z_on(int n, const std::array<int, 3>& atoms) {
    PauliString p{std::string(n, '1')};
    for (int i : atoms) p.axes[i] = 'z';
    return p;
}

PauliString z_on(int n, const std::array<int, 3>& a, const std::array<int, 3>& b) {
    PauliString p = z_on(n, a);
    for (int i : b) p.axes[i] = 'z';
    return p;
}

std::vector<CheckpointData> adiabatic_realization(const ExperimentPlan& plan, const ArrayGeometry& geometry,
                                                  const AddressingPattern& pattern, int r) {
    const AtomModel model = AtomModel::Qubit;
    NoiseSample noise = draw_noise(plan, geometry, model, derive_seed(plan.seed, kNoise, 0, r));
    ExecutionContext ctx = make_context(plan, geometry, pattern, noise, model);
    ctx.lifetime = ctx.depumping = false;
    const auto bases = same_permutation_bases();
    const double delta_unit = plan.physics.delta;
    const Mat S = permutation_operator(
        symmetry_permutation(pattern_symmetry(pattern, geometry), geometry, pattern),
        Space{model, geometry.size()});

    std::vector<CheckpointData> out;
    QuantumState psi = ramp_initial_state(pattern, model);
    double prev = 0.0;
    for (double t : plan.sweep) {
        if (t > prev) {
            AddressingRamp ramp;
            ramp.delta0 = {0.0, delta_unit, 2.0 * delta_unit};
            ramp.tau = plan.tau;
            ramp.elapsed = prev;
            ramp.duration = t - prev;
            psi = run_sequence(psi, PulseSequence{{ramp}}, ctx);
            prev = t;
        }
        CheckpointData cp;
        // Lowest two eigenstates of the nominal ramp generator at t.
        Mat K = afm_frame_hamiltonian(geometry.positions, pattern, plan.physics.constants,
                                      delta_unit * std::exp(-t / plan.tau));
        auto levels = ramp_levels(pattern, K, S);
        cp.p0 = std::norm(levels[0].vector.dot(psi.vector()));
        cp.p1 = std::norm(levels[1].vector.dot(psi.vector()));

        ExecutionContext wctx = ctx;
        QuantumState waited = run_sequence(psi, PulseSequence{{Wait{plan.wait}}}, wctx);
        for (int b = 0; b < 6; ++b) {
            MeasurementProgram prog = compile_measurement_basis(bases[b]);
            Distribution p = outcome_distribution(apply_program(waited, prog, pattern));
            cp.dist[b] = readout(plan, p, pattern, prog.has_local(), noise.inert);
        }
        out.push_back(std::move(cp));
    }
    return out;
}

} // namespace

AdiabaticSeries adiabatic_experiment(const ExperimentPlan& plan) {
    plan.validate();
    if (plan.kind != PlanKind::Adiabatic) throw ConfigError("plan is not adiabatic");
    const ArrayGeometry geometry = plan.geometry();
    const AddressingPattern pattern = plan.addressing();
    const int n = geometry.size();
    const int R = plan.realizations;
    auto data = realize(R, plan.parallel, [&](int r) { return adiabatic_realization(plan, geometry, pattern, r); });

    const int h_a = handedness(geometry, pattern, kTriangleA);
    const int h_b = handedness(geometry, pattern, kTriangleB);
    const int eta = h_a * h_b;
    const PauliString za = z_on(n, kTriangleA), zb = z_on(n, kTriangleB), zab = z_on(n, kTriangleA, kTriangleB);

    AdiabaticSeries s;
    s.times = plan.sweep;
    s.realizations = R;
    s.shots = plan.shots;
    const auto bases = same_permutation_bases();
    for (std::size_t t = 0; t < plan.sweep.size(); ++t) {
        std::vector<double> p0(R), p1(R);
        for (int r = 0; r < R; ++r) {
            p0[r] = data[r][t].p0;
            p1[r] = data[r][t].p1;
        }
        SweepRow r0 = reduce(0, "p0", p0), r1 = reduce(0, "p1", p1);
        s.p0.push_back(r0.mean);
        s.p1.push_back(r1.mean);
        s.p0_std.push_back(r0.std);
        s.p1_std.push_back(r1.std);

        double xa = 0, xb = 0, xc = 0;
        // Shot sums per realization and basis: count, a, b, ab.
        std::vector<std::array<std::array<double, 4>, 6>> sums(R);
        double va = 0, vb = 0, vc = 0;
        for (int b = 0; b < 6; ++b) {
            const int sg = chirality_terms()[b].sign;
            Distribution pooled = Distribution::Zero(Eigen::Index(1) << n);
            for (int r = 0; r < R; ++r) pooled += data[r][t].dist[b];
            pooled /= R;
            double ea = correlator_from_distribution(pooled, n, za);
            double eb = correlator_from_distribution(pooled, n, zb);
            double eab = correlator_from_distribution(pooled, n, zab);
            xa += h_a * sg * ea;
            xb += h_b * sg * eb;
            xc += eta * (eab - ea * eb);
            if (plan.shots > 0) {
                std::vector<ShotRecord> shots;
                std::string axes = atom_axes(bases[b], pattern);
                PauliString pa = za, pb = zb;
                for (int i = 0; i < n; ++i) {
                    if (pa.axes[i] != '1') pa.axes[i] = axes[i];
                    if (pb.axes[i] != '1') pb.axes[i] = axes[i];
                }
                for (int r = 0; r < R; ++r) {
                    auto part = sample_distribution(data[r][t].dist[b], n, plan.shots,
                                                    derive_seed(plan.seed, kShots, t * 6 + b, r), axes,
                                                    bases[b].label());
                    auto& acc = sums[r][b];
                    for (const auto& shot : part) {
                        double sa = shot_parity(shot, pa), sb = shot_parity(shot, pb);
                        acc[0] += 1;
                        acc[1] += sa;
                        acc[2] += sb;
                        acc[3] += sa * sb;
                    }
                    shots.insert(shots.end(), part.begin(), part.end());
                }
                // Shot-noise-only errors, used when a single realization is run.
                va += std::pow(estimate_correlator(shots, pa).std_error, 2);
                vb += std::pow(estimate_correlator(shots, pb).std_error, 2);
                vc += std::pow(estimate_connected(shots, pa, pb).std_error, 2);
            }
        }
        if (plan.shots > 0) {
            // Chirality estimates from shot sums, skipping realization `skip`.
            auto combine = [&](int skip) {
                std::array<double, 3> v{};
                for (int b = 0; b < 6; ++b) {
                    std::array<double, 4> tot{};
                    for (int r = 0; r < R; ++r)
                        if (r != skip)
                            for (int k = 0; k < 4; ++k) tot[k] += sums[r][b][k];
                    const int sg = chirality_terms()[b].sign;
                    double ma = tot[1] / tot[0], mb = tot[2] / tot[0];
                    v[0] += h_a * sg * ma;
                    v[1] += h_b * sg * mb;
                    v[2] += eta * (tot[3] / tot[0] - ma * mb);
                }
                return v;
            };
            const auto full = combine(-1);
            std::array<double, 3> se{std::sqrt(va), std::sqrt(vb), std::sqrt(vc)};
            if (R > 1) {
                // Jackknife over realizations: shots of one realization share
                // its disorder, so they are not independent.
                std::vector<std::array<double, 3>> loo(R);
                std::array<double, 3> mean{};
                for (int r = 0; r < R; ++r) {
                    loo[r] = combine(r);
                    for (int k = 0; k < 3; ++k) mean[k] += loo[r][k] / R;
                }
                for (int k = 0; k < 3; ++k) {
                    double ss = 0.0;
                    for (int r = 0; r < R; ++r) ss += std::pow(loo[r][k] - mean[k], 2);
                    se[k] = std::sqrt((R - 1.0) / R * ss);
                }
            }
            long nshots = static_cast<long>(R) * plan.shots;
            s.chi_a.push_back({full[0], se[0], nshots});
            s.chi_b.push_back({full[1], se[1], nshots});
            s.chichi.push_back({full[2], se[2], nshots});
        } else {
            s.chi_a.push_back({xa, 0.0, 0});
            s.chi_b.push_back({xb, 0.0, 0});
            s.chichi.push_back({xc, 0.0, 0});
        }
        s.chi_a_exact.push_back(xa);
        s.chi_b_exact.push_back(xb);
        s.chichi_exact.push_back(xc);
    }
    return s;
}

// ------------------------------------------------------------- run_plan

namespace {

SweepResult run_ramsey(const ExperimentPlan& plan) {
    const ArrayGeometry geometry = plan.geometry();
    const AddressingPattern pattern = plan.addressing();
    const AtomModel model = plan.toggles.required_model();
    const int S = static_cast<int>(plan.sweep.size());
    const int R = plan.realizations;
    // One task per (phi, realization); each draws its own noise.
    auto vals = realize(S * R, plan.parallel, [&](int task) {
        const int s = task / R, r = task % R;
        NoiseSample noise = draw_noise(plan, geometry, model, derive_seed(plan.seed, kNoise, s, r));
        ExecutionContext ctx = make_context(plan, geometry, pattern, noise, model);
        QuantumState st = initial_register(plan, model, 3).as_mixed();
        MeasurementProgram prog = ramsey_program(plan.sweep[s]);
        Distribution p = measure_map(plan, st.density(), prog, ctx);
        p = readout(plan, p, pattern, true);
        std::array<double, 3> mz{};
        if (plan.shots > 0) {
            auto shots = sample_distribution(p, 3, plan.shots, derive_seed(plan.seed, kShots, s, r), "zzz");
            for (int i = 0; i < 3; ++i)
                mz[pattern.multiplier(i)] = estimate_correlator(shots, PauliString::on_atoms(3, {{i, 'z'}})).value;
        } else {
            for (int i = 0; i < 3; ++i)
                mz[pattern.multiplier(i)] = correlator_from_distribution(p, 3, PauliString::on_atoms(3, {{i, 'z'}}));
        }
        return mz;
    });
    SweepResult res;
    res.plan = plan.name;
    for (int s = 0; s < S; ++s)
        for (int c = 0; c < 3; ++c) {
            std::vector<double> v(R);
            for (int r = 0; r < R; ++r) v[r] = vals[s * R + r][c];
            res.rows.push_back(reduce(plan.sweep[s], "sz_class" + std::to_string(c), v));
        }
    for (int s = 0; s < S; ++s)
        for (int r = 0; r < R; ++r) res.realization_seeds.push_back(derive_seed(plan.seed, kNoise, s, r));
    return res;
}

SweepResult run_chirality(const ExperimentPlan& plan) {
    const ArrayGeometry geometry = plan.geometry();
    const AddressingPattern pattern = plan.addressing();
    const AtomModel model = plan.toggles.required_model();
    const int R = plan.realizations;
    auto vals = realize(R, plan.parallel, [&](int r) {
        NoiseSample noise = draw_noise(plan, geometry, model, derive_seed(plan.seed, kNoise, 0, r));
        return chirality_realization(plan, geometry, pattern, noise, derive_seed(plan.seed, kShots, 0, r));
    });
    const double smax = 2.0 * std::sqrt(3.0);
    SweepResult res;
    res.plan = plan.name;
    for (std::size_t s = 0; s < plan.sweep.size(); ++s) {
        std::vector<double> m(R), st(R);
        for (int r = 0; r < R; ++r) {
            m[r] = vals[r][s].measured_value / smax;
            st[r] = vals[r][s].state_value / smax;
        }
        res.rows.push_back(reduce(plan.sweep[s], "chirality", m));
        res.rows.push_back(reduce(plan.sweep[s], "chirality_state", st));
    }
    for (int r = 0; r < R; ++r) res.realization_seeds.push_back(derive_seed(plan.seed, kNoise, 0, r));
    return res;
}

SweepResult run_adiabatic(const ExperimentPlan& plan) {
    AdiabaticSeries s = adiabatic_experiment(plan);
    SweepResult res;
    res.plan = plan.name;
    auto est_row = [](double t, const char* name, const Estimate& e) {
        SweepRow r;
        r.sweep = t;
        r.observable = name;
        r.mean = e.value;
        r.n = e.n;
        r.std_error = e.std_error;
        r.std = e.n > 0 ? e.std_error * std::sqrt(double(e.n)) : 0.0;
        return r;
    };
    auto exact_row = [&](double t, const char* name, double v, double sd) {
        SweepRow r;
        r.sweep = t;
        r.observable = name;
        r.mean = v;
        r.std = sd;
        r.n = s.realizations;
        r.std_error = sd / std::sqrt(double(s.realizations));
        return r;
    };
    for (std::size_t k = 0; k < s.times.size(); ++k) {
        double t = s.times[k];
        res.rows.push_back(est_row(t, "chi_a", s.chi_a[k]));
        res.rows.push_back(est_row(t, "chi_b", s.chi_b[k]));
        res.rows.push_back(est_row(t, "chichi", s.chichi[k]));
        res.rows.push_back(exact_row(t, "chichi_exact", s.chichi_exact[k], 0.0));
        res.rows.push_back(exact_row(t, "p0", s.p0[k], s.p0_std[k]));
        res.rows.push_back(exact_row(t, "p1", s.p1[k], s.p1_std[k]));
    }
    for (int r = 0; r < plan.realizations; ++r) res.realization_seeds.push_back(derive_seed(plan.seed, kNoise, 0, r));
    return res;
}

SweepResult run_budget(const ExperimentPlan& plan) {
    SweepResult res;
    res.plan = plan.name;
    for (const auto& b : error_budget(plan)) {
        SweepRow r;
        r.observable = "fidelity_" + b.mechanism;
        r.mean = b.fidelity;
        r.std = b.std;
        r.n = plan.realizations;
        r.std_error = b.std / std::sqrt(double(plan.realizations));
        res.rows.push_back(r);
        SweepRow c = r;
        c.observable = "contribution_" + b.mechanism;
        c.mean = b.contribution;
        res.rows.push_back(c);
    }
    for (int r = 0; r < plan.realizations; ++r) res.realization_seeds.push_back(derive_seed(plan.seed, kNoise, 0, r));
    return res;
}

} // namespace

SweepResult run_plan(const ExperimentPlan& plan) {
    plan.validate();
    switch (plan.kind) {
    case PlanKind::Ramsey: return run_ramsey(plan);
    case PlanKind::Chirality: return run_chirality(plan);
    case PlanKind::Adiabatic: return run_adiabatic(plan);
    case PlanKind::WBudget: return run_budget(plan);
    }
    throw ConfigError("unknown plan kind");
}

} // namespace rydberg
