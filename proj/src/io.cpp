#include "rydberg/io.hpp"

#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace rydberg {

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

namespace {

void check_keys(const json& j, const std::set<std::string>& allowed, const std::string& where) {
    if (!j.is_object()) throw ConfigError(where + " must be an object");
    for (auto it = j.begin(); it != j.end(); ++it)
        if (!allowed.count(it.key())) throw ConfigError("unknown key '" + it.key() + "' in " + where);
}

template <class T>
void read(const json& j, const char* key, T& out, const std::string& where) {
    if (!j.contains(key)) return;
    try {
        const json& v = j.at(key);
        if constexpr (std::is_same_v<T, bool>) {
            if (!v.is_boolean()) throw ConfigError("");
        } else if constexpr (std::is_arithmetic_v<T>) {
            if (!v.is_number()) throw ConfigError("");
            if constexpr (std::is_integral_v<T>)
                if (!v.is_number_integer()) throw ConfigError("");
        } else if constexpr (std::is_same_v<T, std::string>) {
            if (!v.is_string()) throw ConfigError("");
        }
        out = v.get<T>();
    } catch (const std::exception&) {
        throw ConfigError("key '" + std::string(key) + "' in " + where + " has the wrong type");
    }
}

std::vector<double> read_sweep(const json& v) {
    std::vector<double> out;
    if (v.is_array()) {
        for (const auto& x : v) {
            if (!x.is_number()) throw ConfigError("sweep entries must be numbers");
            out.push_back(x.get<double>());
        }
        return out;
    }
    check_keys(v, {"start", "stop", "count", "endpoint"}, "sweep");
    double start = 0, stop = 0;
    int count = 0;
    bool endpoint = true;
    read(v, "start", start, "sweep");
    read(v, "stop", stop, "sweep");
    read(v, "count", count, "sweep");
    read(v, "endpoint", endpoint, "sweep");
    if (count < 1) throw ConfigError("sweep count must be positive");
    int div = endpoint ? std::max(1, count - 1) : count;
    for (int k = 0; k < count; ++k) out.push_back(start + (stop - start) * k / div);
    return out;
}

} // namespace

ExperimentPlan plan_from_json(const json& j) {
    const std::string w = "plan";
    check_keys(j, {"kind", "name", "pattern", "a", "separation", "sweep", "shots", "realizations", "seed", "toggles",
                   "errors", "disorder", "physics", "lightshift_sigma", "tau", "wait", "parallel", "integrator"},
               w);
    ExperimentPlan p;
    if (!j.contains("kind")) throw ConfigError("plan lacks 'kind'");
    std::string kind;
    read(j, "kind", kind, w);
    p.kind = parse_plan_kind(kind);
    p.sweep = default_sweep(p.kind);
    read(j, "name", p.name, w);
    read(j, "pattern", p.pattern, w);
    read(j, "a", p.a, w);
    read(j, "separation", p.separation, w);
    if (j.contains("sweep")) p.sweep = read_sweep(j.at("sweep"));
    read(j, "shots", p.shots, w);
    read(j, "realizations", p.realizations, w);
    read(j, "seed", p.seed, w);
    read(j, "lightshift_sigma", p.lightshift_sigma, w);
    read(j, "tau", p.tau, w);
    read(j, "wait", p.wait, w);
    read(j, "parallel", p.parallel, w);
    if (j.contains("toggles")) {
        const json& t = j.at("toggles");
        if (!t.is_object()) throw ConfigError("toggles must be an object");
        for (auto it = t.begin(); it != t.end(); ++it) {
            if (!it.value().is_boolean()) throw ConfigError("toggle '" + it.key() + "' must be a boolean");
            p.toggles.set(it.key(), it.value().get<bool>());
        }
    }
    if (j.contains("errors")) {
        const json& e = j.at("errors");
        check_keys(e, {"eps_up", "eps_down", "eta_stirap", "loss_1", "loss_2", "jitter_sigma_ns"}, "errors");
        read(e, "eps_up", p.errors.eps_up, "errors");
        read(e, "eps_down", p.errors.eps_down, "errors");
        read(e, "eta_stirap", p.errors.eta_stirap, "errors");
        read(e, "loss_1", p.errors.loss_1, "errors");
        read(e, "loss_2", p.errors.loss_2, "errors");
        read(e, "jitter_sigma_ns", p.errors.jitter_sigma_ns, "errors");
    }
    if (j.contains("disorder")) {
        const json& d = j.at("disorder");
        check_keys(d, {"sigma_xy", "sigma_z", "sigma_v"}, "disorder");
        read(d, "sigma_xy", p.disorder.sigma_xy, "disorder");
        read(d, "sigma_z", p.disorder.sigma_z, "disorder");
        read(d, "sigma_v", p.disorder.sigma_v, "disorder");
    }
    if (j.contains("physics")) {
        const json& f = j.at("physics");
        check_keys(f, {"J", "c6_upup", "c6_downdown", "delta", "tau_sp_up", "tau_bb_up", "tau_sp_down", "tau_bb_down",
                       "tau_depump_1", "tau_depump_2", "tau_p6"},
                   "physics");
        auto& ph = p.physics;
        read(f, "J", ph.constants.J, "physics");
        read(f, "c6_upup", ph.constants.c6_upup, "physics");
        read(f, "c6_downdown", ph.constants.c6_downdown, "physics");
        read(f, "delta", ph.delta, "physics");
        read(f, "tau_sp_up", ph.tau_sp_up, "physics");
        read(f, "tau_bb_up", ph.tau_bb_up, "physics");
        read(f, "tau_sp_down", ph.tau_sp_down, "physics");
        read(f, "tau_bb_down", ph.tau_bb_down, "physics");
        read(f, "tau_depump_1", ph.tau_depump_1, "physics");
        read(f, "tau_depump_2", ph.tau_depump_2, "physics");
        read(f, "tau_p6", ph.tau_p6, "physics");
        ph.pulses.delta = ph.delta;
    }
    p.physics.constants.a = p.a;
    if (j.contains("integrator")) {
        const json& i = j.at("integrator");
        check_keys(i, {"rtol", "atol", "max_steps"}, "integrator");
        read(i, "rtol", p.integrator.rtol, "integrator");
        read(i, "atol", p.integrator.atol, "integrator");
        read(i, "max_steps", p.integrator.max_steps, "integrator");
    }
    p.validate();
    return p;
}

json plan_to_json(const ExperimentPlan& p) {
    json t = json::object();
    for (const auto& n : ErrorToggles::names()) t[n] = p.toggles.get(n);
    const auto& ph = p.physics;
    return {{"kind", to_string(p.kind)},
            {"name", p.name},
            {"pattern", p.pattern},
            {"a", p.a},
            {"separation", p.separation},
            {"sweep", p.sweep},
            {"shots", p.shots},
            {"realizations", p.realizations},
            {"seed", p.seed},
            {"toggles", t},
            {"errors",
             {{"eps_up", p.errors.eps_up},
              {"eps_down", p.errors.eps_down},
              {"eta_stirap", p.errors.eta_stirap},
              {"loss_1", p.errors.loss_1},
              {"loss_2", p.errors.loss_2},
              {"jitter_sigma_ns", p.errors.jitter_sigma_ns}}},
            {"disorder",
             {{"sigma_xy", p.disorder.sigma_xy}, {"sigma_z", p.disorder.sigma_z}, {"sigma_v", p.disorder.sigma_v}}},
            {"physics",
             {{"J", ph.constants.J},
              {"c6_upup", ph.constants.c6_upup},
              {"c6_downdown", ph.constants.c6_downdown},
              {"delta", ph.delta},
              {"tau_sp_up", ph.tau_sp_up},
              {"tau_bb_up", ph.tau_bb_up},
              {"tau_sp_down", ph.tau_sp_down},
              {"tau_bb_down", ph.tau_bb_down},
              {"tau_depump_1", ph.tau_depump_1},
              {"tau_depump_2", ph.tau_depump_2},
              {"tau_p6", ph.tau_p6}}},
            {"lightshift_sigma", p.lightshift_sigma},
            {"tau", p.tau},
            {"wait", p.wait},
            {"parallel", p.parallel},
            {"integrator",
             {{"rtol", p.integrator.rtol}, {"atol", p.integrator.atol}, {"max_steps", p.integrator.max_steps}}}};
}

json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open " + path);
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw ConfigError(path + ": " + e.what());
    }
}

void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write " + path);
    out << text;
}

ExperimentPlan load_plan(const std::string& path) { return plan_from_json(read_json_file(path)); }

json geometry_to_json(const ArrayGeometry& g) {
    json pos = json::array();
    for (const auto& p : g.positions) pos.push_back({p.x(), p.y(), p.z()});
    return {{"a", g.a}, {"positions", pos}};
}

ArrayGeometry geometry_from_json(const json& j) {
    check_keys(j, {"a", "positions", "triangles", "separation"}, "geometry");
    double a = 12.3;
    read(j, "a", a, "geometry");
    if (j.contains("triangles")) {
        int n = 0;
        double s = 0.0;
        read(j, "triangles", n, "geometry");
        read(j, "separation", s, "geometry");
        return build_triangle_array(a, n, s);
    }
    ArrayGeometry g;
    g.a = a;
    if (!j.contains("positions") || !j.at("positions").is_array()) throw ConfigError("geometry needs positions");
    for (const auto& p : j.at("positions")) {
        if (!p.is_array() || p.size() != 3) throw ConfigError("positions are 3-vectors");
        for (const auto& x : p)
            if (!x.is_number()) throw ConfigError("positions are 3-vectors");
        g.positions.emplace_back(p[0].get<double>(), p[1].get<double>(), p[2].get<double>());
    }
    g.validate();
    return g;
}

json pattern_to_json(const AddressingPattern& p) {
    json c = json::array();
    for (auto k : p.classes) c.push_back(multiplier(k));
    return {{"label", p.label}, {"classes", c}};
}

AddressingPattern pattern_from_json(const json& j) {
    check_keys(j, {"label", "classes"}, "pattern");
    AddressingPattern p;
    read(j, "label", p.label, "pattern");
    if (!j.contains("classes") || !j.at("classes").is_array()) throw ConfigError("pattern needs classes");
    for (const auto& c : j.at("classes")) {
        if (!c.is_number_integer() || c.get<int>() < 0 || c.get<int>() > 2)
            throw ConfigError("classes are 0, 1 or 2");
        p.classes.push_back(static_cast<AtomClass>(c.get<int>()));
    }
    return p;
}

void write_sweep_csv(const SweepResult& r, std::ostream& os) {
    os << "sweep,observable,mean,std,n,stderr\n";
    for (const auto& row : r.rows)
        os << format_double(row.sweep) << ',' << row.observable << ',' << format_double(row.mean) << ','
           << format_double(row.std) << ',' << row.n << ',' << format_double(row.std_error) << '\n';
}

json sweep_to_json(const SweepResult& r) {
    json rows = json::array();
    for (const auto& row : r.rows)
        rows.push_back({{"sweep", row.sweep},
                        {"observable", row.observable},
                        {"mean", row.mean},
                        {"std", row.std},
                        {"n", row.n},
                        {"stderr", row.std_error}});
    return {{"plan", r.plan}, {"rows", rows}, {"realization_seeds", r.realization_seeds}};
}

json density_to_json(const Mat& rho) {
    json re = json::array(), im = json::array();
    for (Eigen::Index i = 0; i < rho.rows(); ++i) {
        json a = json::array(), b = json::array();
        for (Eigen::Index k = 0; k < rho.cols(); ++k) {
            a.push_back(rho(i, k).real());
            b.push_back(rho(i, k).imag());
        }
        re.push_back(a);
        im.push_back(b);
    }
    return {{"real", re}, {"imag", im}};
}

Mat density_from_json(const json& j) {
    check_keys(j, {"real", "imag"}, "density matrix");
    const json &re = j.at("real"), &im = j.at("imag");
    const auto n = static_cast<Eigen::Index>(re.size());
    if (static_cast<Eigen::Index>(im.size()) != n) throw ConfigError("real and imaginary parts differ in size");
    Mat m(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index k = 0; k < n; ++k) m(i, k) = cplx(re[i][k].get<double>(), im[i][k].get<double>());
    return m;
}

namespace {

Eigen::Index parse_outcome(const std::string& s) {
    if (s.size() != 3) throw ConfigError("outcome '" + s + "' is not a 3-atom bitstring");
    Eigen::Index o = 0;
    for (char c : s) {
        o <<= 1;
        if (c == 'd' || c == '1') o |= 1;
        else if (c != 'u' && c != '0') throw ConfigError("outcome '" + s + "' uses symbols other than u/d");
    }
    return o;
}

std::string outcome_label(Eigen::Index o, int n) {
    std::string s(n, 'u');
    for (int i = 0; i < n; ++i)
        if ((o >> (n - 1 - i)) & 1) s[i] = 'd';
    return s;
}

} // namespace

TomographyDataset read_dataset_csv(std::istream& is) {
    std::map<std::string, Distribution> table;
    std::string line;
    bool header = true;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        std::stringstream ss(line);
        std::string b, o, v;
        std::getline(ss, b, ',');
        std::getline(ss, o, ',');
        std::getline(ss, v, ',');
        if (header && b == "basis") {
            header = false;
            continue;
        }
        header = false;
        double value;
        try {
            value = std::stod(v);
        } catch (const std::exception&) {
            throw ConfigError("line " + std::to_string(lineno) + ": bad value '" + v + "'");
        }
        MeasurementBasis::parse(b);
        auto& d = table[b];
        if (d.size() == 0) d = Distribution::Zero(8);
        d(parse_outcome(o)) += value;
    }
    TomographyDataset out;
    for (const auto& basis : all_bases()) {
        auto it = table.find(basis.label());
        if (it == table.end()) continue;
        double total = it->second.sum();
        if (!(total != 0.0)) throw ConfigError("basis " + basis.label() + " has no weight");
        out.bases.push_back(basis);
        out.probabilities.push_back(it->second / total);
        out.shots.push_back(total > 1.5 ? static_cast<long>(std::llround(total)) : 0);
    }
    return out;
}

void write_dataset_csv(const TomographyDataset& d, std::ostream& os) {
    os << "basis,outcome,value\n";
    for (std::size_t a = 0; a < d.bases.size(); ++a)
        for (Eigen::Index o = 0; o < 8; ++o)
            os << d.bases[a].label() << ',' << outcome_label(o, 3) << ',' << format_double(d.probabilities[a](o))
               << '\n';
}

void write_shots_csv(const std::vector<ShotRecord>& shots, std::ostream& os) {
    os << "shot_id,basis,outcome,seed\n";
    for (std::size_t k = 0; k < shots.size(); ++k)
        os << k << ',' << shots[k].basis << ',' << shots[k].bitstring() << ',' << shots[k].seed << '\n';
}

} // namespace rydberg
