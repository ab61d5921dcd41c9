// Command-line front end: spectra, experiment plans and tomography.

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "rydberg/io.hpp"

using namespace rydberg;
namespace fs = std::filesystem;

namespace {

constexpr const char* kVersion = "0.1.0";

#ifndef CONFIG_DIR
#define CONFIG_DIR "configs"
#endif

struct Common {
    std::string out = "out";
    std::string format = "csv";
};

fs::path prepare_out(const std::string& dir) {
    fs::path p(dir);
    std::error_code ec;
    fs::create_directories(p, ec);
    if (ec) throw ConfigError("cannot create output directory " + dir);
    return p;
}

void write_manifest(const fs::path& dir, const std::string& command, const std::string& config, const json& params,
                    std::uint64_t seed, const std::vector<std::string>& outputs, double seconds) {
    json m = {{"command", command},   {"config", config},   {"parameters", params},
              {"seed", seed},         {"version", kVersion}, {"outputs", outputs},
              {"wall_seconds", seconds}};
    write_text_file((dir / "manifest.json").string(), m.dump(2) + "\n");
}

// ---------------------------------------------------------------- spectrum

int cmd_spectrum(const std::string& config, const std::string& preset, const Common& c) {
    json j;
    if (!config.empty()) {
        j = read_json_file(config);
    } else if (preset == "triangle") {
        j = {{"geometry", {{"triangles", 1}}}};
    } else if (preset == "pattern1" || preset == "pattern2") {
        j = {{"geometry", {{"triangles", 2}, {"separation", 25.0}}},
             {"pattern", pattern_to_json(two_triangle_pattern(preset == "pattern1" ? 1 : 2))},
             {"ramp", {{"tau", 0.55}}}};
    } else {
        throw ConfigError("spectrum needs --config or --preset triangle|pattern1|pattern2");
    }
    if (!j.is_object() || !j.contains("geometry")) throw ConfigError("spectrum config lacks 'geometry'");
    for (auto it = j.begin(); it != j.end(); ++it)
        if (it.key() != "geometry" && it.key() != "pattern" && it.key() != "ramp" && it.key() != "J")
            throw ConfigError("unknown key '" + it.key() + "' in spectrum config");
    ArrayGeometry geo = geometry_from_json(j.at("geometry"));
    if (geo.size() == 0) throw ConfigError("geometry has no atoms");
    CouplingConstants k;
    k.a = geo.a;
    if (j.contains("J")) k.J = j.at("J").get<double>();

    auto t0 = std::chrono::steady_clock::now();
    fs::path dir = prepare_out(c.out);
    std::ostringstream os;
    std::vector<std::string> outputs;
    if (!j.contains("ramp")) {
        // One-excitation block of the XY Hamiltonian.
        Mat H = xy_hamiltonian(geo.positions, k).matrix / kTwoPi;
        auto idx = single_flip_sector(geo.size());
        Mat B(idx.size(), idx.size());
        for (std::size_t a = 0; a < idx.size(); ++a)
            for (std::size_t b = 0; b < idx.size(); ++b) B(a, b) = H(idx[a], idx[b]);
        auto ev = exact_spectrum(B);
        os << "level,energy_mhz\n";
        for (std::size_t n = 0; n < ev.size(); ++n) os << n << ',' << format_double(ev[n].value) << '\n';
        std::cout << "one-excitation energies (MHz):";
        for (const auto& e : ev) std::cout << ' ' << e.value;
        std::cout << '\n';
    } else {
        if (!j.contains("pattern")) throw ConfigError("ramp spectra need a pattern");
        AddressingPattern pat = pattern_from_json(j.at("pattern"));
        const json& r = j.at("ramp");
        RampOptions opt;
        opt.constants = k;
        double tau = r.value("tau", 0.55);
        opt.duration = r.value("duration", opt.duration);
        opt.n_times = r.value("n_times", opt.n_times);
        opt.delta_unit = r.value("delta", opt.delta_unit);
        AdiabaticTrace tr = adiabatic_populations(pat, tau, geo, opt);
        os << "time,level,energy_mhz,symmetry,population\n";
        for (std::size_t t = 0; t < tr.times.size(); ++t)
            for (Eigen::Index n = 0; n < tr.energies[t].size(); ++n)
                os << format_double(tr.times[t]) << ',' << n << ',' << format_double(tr.energies[t](n)) << ','
                   << tr.labels[t][n] << ',' << format_double(tr.populations[t](n)) << '\n';
        // Symmetry of the initial product state against the final ground state.
        Symmetry sym = pattern_symmetry(pat, geo);
        Space sp{AtomModel::Qubit, geo.size()};
        Mat S = permutation_operator(symmetry_permutation(sym, geo, pat), sp);
        Vec psi0 = ramp_initial_state(pat).vector();
        int init_label = std::lround((psi0.adjoint() * S * psi0)(0, 0).real());
        int ground_label = tr.labels.back()[0];
        std::cout << "initial-state symmetry " << init_label << ", final ground-state symmetry " << ground_label << '\n';
        if (init_label != ground_label)
            std::cout << "ground/initial parity mismatch: the ground state cannot be reached adiabatically\n";
    }
    write_text_file((dir / "spectrum.csv").string(), os.str());
    outputs.push_back((dir / "spectrum.csv").string());
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    write_manifest(dir, "spectrum", config.empty() ? "preset:" + preset : config, j, 0, outputs, secs);
    return 0;
}

// --------------------------------------------------------------------- run

std::vector<std::string> preset_files(const std::string& preset) {
    if (preset == "ramsey") return {"ramsey.json"};
    if (preset == "chirality") return {"chirality.json"};
    if (preset == "adiabatic") return {"adiabatic_pattern1.json", "adiabatic_pattern2.json"};
    if (preset == "budget") return {"w_budget.json"};
    throw ConfigError("unknown preset '" + preset + "' (ramsey, chirality, adiabatic, budget)");
}

int cmd_run(const std::string& plan_path, const std::string& preset, std::optional<std::uint64_t> seed,
            std::optional<int> shots, std::optional<int> realizations, const std::vector<std::string>& toggles,
            const Common& c) {
    std::vector<std::string> paths;
    if (!plan_path.empty()) paths.push_back(plan_path);
    else if (!preset.empty())
        for (const auto& f : preset_files(preset)) paths.push_back((fs::path(CONFIG_DIR) / f).string());
    else throw ConfigError("run needs a plan file or --preset");
    if (c.format != "csv" && c.format != "json") throw ConfigError("format must be csv or json");

    // Validate every plan before any computation.
    std::vector<ExperimentPlan> plans;
    for (const auto& p : paths) {
        json j = read_json_file(p);
        if (seed) j["seed"] = *seed;
        if (shots) j["shots"] = *shots;
        if (realizations) j["realizations"] = *realizations;
        for (const auto& t : toggles) {
            auto eq = t.find('=');
            if (eq == std::string::npos) throw ConfigError("toggle must read name=on|off");
            std::string name = t.substr(0, eq), v = t.substr(eq + 1);
            if (v != "on" && v != "off") throw ConfigError("toggle value must be on or off");
            ErrorToggles probe;
            probe.set(name, true);  // rejects unknown names
            j["toggles"][name] = v == "on";
        }
        ExperimentPlan plan = plan_from_json(j);
        if (plan.name.empty()) plan.name = fs::path(p).stem().string();
        plans.push_back(plan);
    }

    fs::path dir = prepare_out(c.out);
    auto t0 = std::chrono::steady_clock::now();
    std::vector<std::string> outputs;
    json params = json::array();
    for (std::size_t k = 0; k < plans.size(); ++k) {
        const auto& plan = plans[k];
        SweepResult r = run_plan(plan);
        fs::path file = dir / (plan.name + "." + c.format);
        if (c.format == "csv") {
            std::ostringstream os;
            write_sweep_csv(r, os);
            write_text_file(file.string(), os.str());
        } else {
            write_text_file(file.string(), sweep_to_json(r).dump(2) + "\n");
        }
        outputs.push_back(file.string());
        params.push_back(plan_to_json(plan));
        std::cout << plan.name << " (" << to_string(plan.kind) << ", " << plan.realizations << " realizations)\n";
        std::cout << "  sweep       observable        mean        std\n";
        for (const auto& row : r.rows)
            std::cout << "  " << std::setw(10) << row.sweep << "  " << std::setw(16) << row.observable << "  "
                      << std::setw(10) << row.mean << "  " << std::setw(9) << row.std << '\n';
    }
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::string cfg = plan_path.empty() ? "preset:" + preset : plan_path;
    write_manifest(dir, "run", cfg, params, plans.front().seed, outputs, secs);
    return 0;
}

// -------------------------------------------------------------- tomography

int cmd_tomography(const std::string& data_path, const std::string& synthetic, int shots, bool spam, bool correct,
                   std::uint64_t seed, const Common& c) {
    TomographyDataset data;
    ErrorModel em;
    std::string source;
    if (!data_path.empty()) {
        std::ifstream in(data_path);
        if (!in) throw ConfigError("cannot open " + data_path);
        data = read_dataset_csv(in);
        source = data_path;
    } else if (!synthetic.empty()) {
        Vec psi;
        if (synthetic == "w") psi = w_state();
        else if (synthetic == "chi+") psi = chi_state(+1);
        else if (synthetic == "chi-") psi = chi_state(-1);
        else throw ConfigError("synthetic preset must be w, chi+ or chi-");
        QuantumState st = QuantumState::pure(Space{AtomModel::Qubit, 3}, psi);
        AddressingPattern pat = triangle_pattern();
        std::vector<std::vector<ShotRecord>> per_basis;
        int b = 0;
        for (const auto& basis : all_bases()) {
            MeasurementProgram prog = compile_measurement_basis(basis);
            ReadoutOptions opt = readout_options(em, pat, prog.has_local(), spam, false);
            Distribution p = outcome_distribution(apply_program(st, prog, pat));
            p = apply_readout_channel(p, 3, em, opt);
            if (shots > 0) {
                per_basis.push_back(sample_distribution(p, 3, shots, seed + 7919ULL * b, "zzz", basis.label()));
            } else {
                data.bases.push_back(basis);
                data.probabilities.push_back(p);
                data.shots.push_back(0);
            }
            ++b;
        }
        if (shots > 0) data = dataset_from_shots(per_basis);
        source = "synthetic:" + synthetic;
    } else {
        throw ConfigError("tomography needs --data or --synthetic");
    }
    auto missing = data.missing_bases();
    if (!missing.empty()) {
        std::string list;
        for (const auto& m : missing) list += (list.empty() ? "" : ", ") + m;
        throw ConfigError("dataset lacks bases: " + list);
    }
    auto t0 = std::chrono::steady_clock::now();
    MleOptions opt;
    opt.seed = seed;
    ReconstructedState raw = mle_reconstruct(data, opt);
    json report;
    auto summarize = [](const ReconstructedState& r) {
        json f = {{"w", fidelity(r.rho, w_state())},
                  {"chi+", fidelity(r.rho, chi_state(+1))},
                  {"chi-", fidelity(r.rho, chi_state(-1))}};
        json wit = {{"w", entanglement_witness(r.rho, w_state())},
                    {"chi+", entanglement_witness(r.rho, chi_state(+1))},
                    {"chi-", entanglement_witness(r.rho, chi_state(-1))}};
        return json{{"density", density_to_json(r.rho)},
                    {"fidelity", f},
                    {"witness", wit},
                    {"diagnostics",
                     {{"cost", r.cost},
                      {"iterations", r.iterations},
                      {"gradient_norm", r.gradient_norm},
                      {"converged", r.converged},
                      {"best_start", r.best_start}}}};
    };
    report["raw"] = summarize(raw);
    if (correct) report["corrected"] = summarize(mle_reconstruct(correct_dataset(data, em), opt));
    fs::path dir = prepare_out(c.out);
    fs::path file = dir / "tomography.json";
    write_text_file(file.string(), report.dump(2) + "\n");
    for (const char* key : {"raw", "corrected"}) {
        if (!report.contains(key)) continue;
        const auto& f = report[key]["fidelity"];
        std::cout << key << ": F(W) = " << f["w"].get<double>() << ", F(chi+) = " << f["chi+"].get<double>()
                  << ", F(chi-) = " << f["chi-"].get<double>() << '\n';
    }
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    json params = {{"shots", shots}, {"spam", spam}, {"correct", correct}};
    write_manifest(dir, "tomography", source, params, seed, {file.string()}, secs);
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Dipolar XY Rydberg array simulator"};
    app.require_subcommand(1);
    app.set_version_flag("--version", kVersion);
    Common common;

    auto* spec = app.add_subcommand("spectrum", "Eigenvalues of a geometry or of an addressing ramp");
    std::string spec_config, spec_preset;
    spec->add_option("--config", spec_config, "JSON with geometry, optional pattern and ramp");
    spec->add_option("--preset", spec_preset, "triangle, pattern1 or pattern2");
    spec->add_option("--out", common.out, "Output directory");

    auto* run = app.add_subcommand("run", "Execute an experiment plan");
    std::string plan_path, preset;
    std::optional<std::uint64_t> seed;
    std::optional<int> shots, realizations;
    std::vector<std::string> toggles;
    run->add_option("plan", plan_path, "Plan JSON file");
    run->add_option("--preset", preset, "ramsey, chirality, adiabatic or budget");
    run->add_option("--seed", seed, "Master seed");
    run->add_option("--shots", shots, "Shots per basis and realization (0: exact)");
    run->add_option("--realizations", realizations, "Monte Carlo realizations");
    run->add_option("--toggle", toggles, "mechanism=on|off, repeatable");
    run->add_option("--out", common.out, "Output directory");
    run->add_option("--format", common.format, "csv or json");

    auto* tomo = app.add_subcommand("tomography", "Reconstruct a 3-atom density matrix");
    std::string data_path, synthetic;
    int tomo_shots = 0;
    bool spam = false, correct = false;
    std::uint64_t tomo_seed = 1;
    tomo->add_option("--data", data_path, "CSV of basis,outcome,value");
    tomo->add_option("--synthetic", synthetic, "w, chi+ or chi-");
    tomo->add_option("--shots", tomo_shots, "Shots per basis for synthetic data (0: exact)");
    tomo->add_flag("--spam", spam, "Apply readout errors to synthetic data");
    tomo->add_flag("--correct", correct, "Also reconstruct after detection-error correction");
    tomo->add_option("--seed", tomo_seed, "Seed");
    tomo->add_option("--out", common.out, "Output directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }
    try {
        if (*spec) return cmd_spectrum(spec_config, spec_preset, common);
        if (*run) return cmd_run(plan_path, preset, seed, shots, realizations, toggles, common);
        if (*tomo) return cmd_tomography(data_path, synthetic, tomo_shots, spam, correct, tomo_seed, common);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << '\n';
        return 3;
    }
    return 0;
}
