#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

struct Result {
    int code;
    std::string out;
};

Result run_cli(const std::string& args) {
    fs::path log = fs::temp_directory_path() / ("cli_" + std::to_string(::getpid()) + ".log");
    std::string cmd = std::string(CLI_PATH) + " " + args + " > " + log.string() + " 2>&1";
    int status = std::system(cmd.c_str());
    std::ifstream in(log);
    std::stringstream ss;
    ss << in.rdbuf();
    return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, ss.str()};
}

fs::path fresh_dir(const std::string& name) {
    fs::path d = fs::temp_directory_path() / ("rydberg_cli_test_" + name);
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write(const fs::path& p, const json& j) { std::ofstream(p) << j.dump(2); }

json small_ramsey() {
    return {{"kind", "ramsey"},
            {"name", "small"},
            {"realizations", 3},
            {"shots", 20},
            {"sweep", {0.0, 1.0, 2.0}},
            {"toggles", {{"stirap", false}, {"lifetime", false}, {"depumping", false}}}};
}

} // namespace

TEST(Cli, RunWritesManifestAndReproduces) {
    fs::path d = fresh_dir("run");
    write(d / "plan.json", small_ramsey());
    auto r = run_cli("run " + (d / "plan.json").string() + " --out " + (d / "a").string());
    ASSERT_EQ(r.code, 0) << r.out;
    ASSERT_TRUE(fs::exists(d / "a" / "manifest.json"));
    json m = json::parse(slurp(d / "a" / "manifest.json"));
    for (const char* k : {"command", "config", "parameters", "seed", "version", "outputs", "wall_seconds"})
        EXPECT_TRUE(m.contains(k)) << k;
    std::string first = slurp(d / "a" / "small.csv");
    EXPECT_EQ(first.substr(0, first.find('\n')), "sweep,observable,mean,std,n,stderr");

    write(d / "again.json", m["parameters"][0]);
    auto r2 = run_cli("run " + (d / "again.json").string() + " --out " + (d / "b").string());
    ASSERT_EQ(r2.code, 0) << r2.out;
    EXPECT_EQ(first, slurp(d / "b" / "small.csv"));
}

TEST(Cli, OverridesAndJsonFormat) {
    fs::path d = fresh_dir("override");
    write(d / "plan.json", small_ramsey());
    auto r = run_cli("run " + (d / "plan.json").string() + " --seed 9 --realizations 2 --toggle jitter=off --format json --out " +
                     (d / "o").string());
    ASSERT_EQ(r.code, 0) << r.out;
    json m = json::parse(slurp(d / "o" / "manifest.json"));
    EXPECT_EQ(m["seed"], 9);
    EXPECT_EQ(m["parameters"][0]["realizations"], 2);
    EXPECT_EQ(m["parameters"][0]["toggles"]["jitter"], false);
    EXPECT_NO_THROW(json::parse(slurp(d / "o" / "small.json")));
}

TEST(Cli, ConfigErrorsExitTwo) {
    fs::path d = fresh_dir("bad");
    json bad = small_ramsey();
    bad["realizations"] = "many";
    write(d / "bad.json", bad);
    EXPECT_EQ(run_cli("run " + (d / "bad.json").string() + " --out " + d.string()).code, 2);
    json unknown = small_ramsey();
    unknown["colour"] = 1;
    write(d / "unknown.json", unknown);
    EXPECT_EQ(run_cli("run " + (d / "unknown.json").string() + " --out " + d.string()).code, 2);
    EXPECT_EQ(run_cli("run " + (d / "missing.json").string() + " --out " + d.string()).code, 2);
    EXPECT_EQ(run_cli("run --preset nothing --out " + d.string()).code, 2);
    EXPECT_EQ(run_cli("frobnicate").code, 2);
}

TEST(Cli, UnknownToggleRejectedBeforeWork) {
    fs::path d = fresh_dir("toggle");
    write(d / "plan.json", small_ramsey());
    auto r = run_cli("run " + (d / "plan.json").string() + " --toggle gravity=off --out " + (d / "t").string());
    EXPECT_EQ(r.code, 2);
    EXPECT_NE(r.out.find("gravity"), std::string::npos);
    EXPECT_FALSE(fs::exists(d / "t" / "manifest.json"));
    EXPECT_EQ(run_cli("run " + (d / "plan.json").string() + " --toggle jitter=maybe --out " + d.string()).code, 2);
}

TEST(Cli, NumericalFailureExitsThree) {
    fs::path d = fresh_dir("numerical");
    json p = {{"kind", "adiabatic"},
              {"pattern", 1},
              {"realizations", 1},
              {"sweep", {1.0}},
              {"toggles", {{"stirap", false}, {"lifetime", false}, {"depumping", false}}},
              {"integrator", {{"max_steps", 3}}}};
    write(d / "plan.json", p);
    auto r = run_cli("run " + (d / "plan.json").string() + " --out " + d.string());
    EXPECT_EQ(r.code, 3) << r.out;
    EXPECT_NE(r.out.find("numerical"), std::string::npos);
}

TEST(Cli, SpectrumPresets) {
    fs::path d = fresh_dir("spectrum");
    auto tri = run_cli("spectrum --preset triangle --out " + (d / "t").string());
    ASSERT_EQ(tri.code, 0) << tri.out;
    EXPECT_TRUE(fs::exists(d / "t" / "spectrum.csv"));
    EXPECT_TRUE(fs::exists(d / "t" / "manifest.json"));
    auto p1 = run_cli("spectrum --preset pattern1 --out " + (d / "p1").string());
    ASSERT_EQ(p1.code, 0) << p1.out;
    EXPECT_EQ(p1.out.find("mismatch"), std::string::npos);
    auto p2 = run_cli("spectrum --preset pattern2 --out " + (d / "p2").string());
    ASSERT_EQ(p2.code, 0) << p2.out;
    EXPECT_NE(p2.out.find("mismatch"), std::string::npos);
}

TEST(Cli, SpectrumRejectsEmptyGeometry) {
    fs::path d = fresh_dir("empty");
    write(d / "geo.json", {{"geometry", {{"positions", json::array()}}}});
    EXPECT_EQ(run_cli("spectrum --config " + (d / "geo.json").string() + " --out " + d.string()).code, 2);
    EXPECT_EQ(run_cli("spectrum --out " + d.string()).code, 2);
}

TEST(Cli, TomographySynthetic) {
    fs::path d = fresh_dir("tomo");
    auto r = run_cli("tomography --synthetic w --out " + (d / "exact").string());
    ASSERT_EQ(r.code, 0) << r.out;
    json t = json::parse(slurp(d / "exact" / "tomography.json"));
    EXPECT_GT(t["raw"]["fidelity"]["w"].get<double>(), 0.999);
    EXPECT_TRUE(t["raw"]["witness"]["w"].get<bool>());

    auto s = run_cli("tomography --synthetic w --spam --correct --out " + (d / "spam").string());
    ASSERT_EQ(s.code, 0) << s.out;
    json u = json::parse(slurp(d / "spam" / "tomography.json"));
    EXPECT_GT(u["corrected"]["fidelity"]["w"].get<double>(), u["raw"]["fidelity"]["w"].get<double>());
}

TEST(Cli, TomographyMissingBases) {
    fs::path d = fresh_dir("tomo_missing");
    std::ofstream(d / "data.csv") << "basis,outcome,value\nzzz,duu,1\nzzz,udu,1\nzzz,uud,1\n";
    auto r = run_cli("tomography --data " + (d / "data.csv").string() + " --out " + d.string());
    EXPECT_EQ(r.code, 2);
    EXPECT_NE(r.out.find("xxx"), std::string::npos);
}
