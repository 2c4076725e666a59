#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <nlohmann/json.hpp>
#include <random>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <vector>

#include "toeplab/ensemble.hpp"
#include "toeplab/io.hpp"

using namespace toeplab;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string binary_path() {
    const char* env = std::getenv("TOEPLAB_BIN");
    return env ? env : "";
}

int run_cmd(const std::string& cmd) {
    int status = std::system(cmd.c_str());
    REQUIRE(status != -1);
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

json slurp_json(const fs::path& p) { return json::parse(slurp(p)); }

fs::path fresh_dir(const std::string& name) {
    fs::path dir = fs::temp_directory_path() / "toeplab_tests" / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

json strip_duration(json j) {
    if (j.contains("manifest")) j["manifest"].erase("duration_seconds");
    return j;
}

}  // namespace

TEST_CASE("format_double round-trips and uses plain decimal text") {
    CHECK(format_double(1.25) == "1.25");
    CHECK(format_double(0.0) == "0");
    CHECK(format_double(std::nan("")) == "nan");
    std::mt19937_64 eng(3);
    std::uniform_real_distribution<double> unif(-1e6, 1e6);
    for (int i = 0; i < 1000; ++i) {
        double v = unif(eng);
        double back = std::strtod(format_double(v).c_str(), nullptr);
        CHECK(back == v);
    }
}

TEST_CASE("csv and pgm writers produce the documented layout") {
    auto p = normalize({1, 0}, {0.25, 0});
    GridSpec grid{-1.2, 1.2, -1.2, 1.2, 16, 16};
    auto field = density_field(p, 101, 1e-8, grid, 0.81, 0.6);

    auto dir = fresh_dir("writers");
    write_density_csv((dir / "d.csv").string(), field);
    std::string csv = slurp(dir / "d.csv");
    CHECK(csv.rfind("re,im,xi,masked\n", 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 1 + grid.cells());
    CHECK(csv.find("\r") == std::string::npos);

    write_density_pgm((dir / "d.pgm").string(), field);
    std::string pgm = slurp(dir / "d.pgm");
    CHECK(pgm.rfind("P2\n16 16\n65535\n", 0) == 0);

    std::vector<Complex> analytic{{0.5, 0}, {-0.5, 0}};
    std::vector<Complex> numeric{{0.5, 1e-17}};
    write_spectrum_csv((dir / "s.csv").string(), analytic, numeric);
    std::string sc = slurp(dir / "s.csv");
    CHECK(sc == "re,im,source\n0.5,0,analytic\n-0.5,0,analytic\n"
                "0.5,1.0000000000000001e-17,numeric\n");
}

TEST_CASE("manifest serializes with sorted keys") {
    RunManifest man;
    man.command = "spectrum";
    man.params = {{"n", 3}};
    man.seed = 9;
    man.duration_seconds = 0;
    auto j = man.to_json();
    std::string dumped = j.dump();
    CHECK(dumped.find("\"command\"") < dumped.find("\"duration_seconds\""));
    CHECK(dumped.find("\"duration_seconds\"") < dumped.find("\"params\""));
    CHECK(dumped.find("\"params\"") < dumped.find("\"seed\""));
    CHECK(dumped.find("\"seed\"") < dumped.find("\"version\""));
}

TEST_CASE("cli spectrum writes analytic and numeric rows") {
    std::string bin = binary_path();
    REQUIRE_FALSE(bin.empty());
    auto dir = fresh_dir("spectrum");
    int rc = run_cmd(bin + " spectrum --n 3 --a-re 1 --b-re 1 --out-dir " +
                     dir.string());
    CHECK(rc == 0);
    std::string csv = slurp(dir / "spectrum.csv");
    CHECK(csv.find("1.4142135623730") != std::string::npos);
    CHECK(csv.find("analytic") != std::string::npos);
    CHECK(csv.find("numeric") != std::string::npos);
    CHECK(fs::exists(dir / "spectrum_manifest.json"));

    // --n 1: a single analytic row at 0 (cos(pi/2) in double precision)
    auto dir1 = fresh_dir("spectrum1");
    rc = run_cmd(bin + " spectrum --n 1 --out-dir " + dir1.string());
    CHECK(rc == 0);
    std::string one = slurp(dir1 / "spectrum.csv");
    double z1 = 2 * 0.5 * std::cos(3.14159265358979323846 / 2);
    CHECK(one == "re,im,source\n" + format_double(z1) + ",0,analytic\n");
}

TEST_CASE("cli rejects invalid flags with exit code 2") {
    std::string bin = binary_path();
    REQUIRE_FALSE(bin.empty());
    CHECK(run_cmd(bin + " spectrum --n 0 2>/dev/null") == 2);
    CHECK(run_cmd(bin + " spectrum 2>/dev/null") == 2);
    CHECK(run_cmd(bin + " nonsense 2>/dev/null") == 2);
    CHECK(run_cmd(bin + " density --n 101 --delta 1e-8 2>/dev/null") == 2);
}

TEST_CASE("cli regime verdicts and exit codes") {
    std::string bin = binary_path();
    REQUIRE_FALSE(bin.empty());
    auto dir = fresh_dir("regime");
    int rc = run_cmd(bin +
                     " regime --n 501 --delta 1e-12 --r0 0.5"
                     " --a-re 0.5 --b-re 0 --b-im 1 --out-dir " +
                     dir.string() + " > /dev/null");
    CHECK(rc == 0);
    auto j = slurp_json(dir / "regime.json");
    CHECK(j["regime"]["pass"] == true);
    CHECK(j["regime"]["term_coupling"].get<double>() ==
          doctest::Approx(1.25751501e-4).epsilon(1e-9));

    rc = run_cmd(bin + " regime --n 1000 --delta 1e-3 --r0 0.9 --out-dir " +
                 dir.string() + " > /dev/null");
    CHECK(rc == 4);
}

TEST_CASE("cli density honors the regime gate and --force") {
    std::string bin = binary_path();
    REQUIRE_FALSE(bin.empty());
    auto dir = fresh_dir("density_gate");
    std::string base = bin +
                       " density --n 101 --delta 1e-2 --r0 0.8 --nx 12 --ny 12"
                       " --out-dir " +
                       dir.string();
    CHECK(run_cmd(base + " 2>/dev/null") == 4);
    CHECK(fs::exists(dir / "regime.json"));
    CHECK_FALSE(fs::exists(dir / "density.csv"));
    CHECK(run_cmd(base + " --force 2>/dev/null") == 0);
    CHECK(fs::exists(dir / "density.csv"));
    CHECK(fs::exists(dir / "density.pgm"));
    CHECK(fs::exists(dir / "density.json"));
}

TEST_CASE("cli density quadrature self-consistency") {
    std::string bin = binary_path();
    REQUIRE_FALSE(bin.empty());
    auto dir = fresh_dir("density_quad");
    int rc = run_cmd(bin +
                     " density --n 101 --delta 1e-8 --r0 0.8 --nx 60 --ny 60"
                     " --re-min -1.3 --re-max 1.3 --im-min -1.3 --im-max 1.3"
                     " --out-dir " +
                     dir.string());
    CHECK(rc == 0);
    auto j = slurp_json(dir / "density.json");
    double integral = j["masked_integral"].get<double>();
    CHECK(integral > 0);

    // independent quadrature from the CSV
    std::ifstream in(dir / "density.csv");
    std::string line;
    std::getline(in, line);
    double sum = 0;
    int masked = 0;
    while (std::getline(in, line)) {
        auto p1 = line.find(','), p2 = line.find(',', p1 + 1),
             p3 = line.find(',', p2 + 1);
        if (line.substr(p3 + 1) == "1") {
            sum += std::strtod(line.substr(p2 + 1, p3 - p2 - 1).c_str(), nullptr);
            ++masked;
        }
    }
    double cell = (2.6 / 60) * (2.6 / 60);
    CHECK(masked == j["masked_cells"].get<int>());
    CHECK(std::abs(sum * cell - integral) <= 1e-6 * std::abs(integral));
}

TEST_CASE("cli density succeeds with a warning when the mask is empty") {
    std::string bin = binary_path();
    REQUIRE_FALSE(bin.empty());
    auto dir = fresh_dir("density_empty");
    int rc = run_cmd(bin +
                     " density --n 101 --delta 1e-8 --r0 0.8 --nx 8 --ny 8"
                     " --re-min 2 --re-max 3 --im-min 2 --im-max 3 --out-dir " +
                     dir.string() + " 2> " + (dir / "err.txt").string());
    CHECK(rc == 0);
    auto j = slurp_json(dir / "density.json");
    CHECK(j["masked_cells"] == 0);
    CHECK(j["masked_integral"] == 0.0);
    CHECK(slurp(dir / "err.txt").find("warning") != std::string::npos);
}

TEST_CASE("cli ensemble with one unperturbed trial counts nothing") {
    std::string bin = binary_path();
    REQUIRE_FALSE(bin.empty());
    auto dir = fresh_dir("ens_trivial");
    int rc = run_cmd(bin +
                     " ensemble --n 30 --delta 0 --r0 0.9 --r1-margin 0.15"
                     " --trials 1 --nx 100 --ny 100 --re-min -1.4 --re-max 1.4"
                     " --im-min -1.4 --im-max 1.4 --out-dir " +
                     dir.string() + " 2>/dev/null");
    CHECK(rc == 0);
    auto j = slurp_json(dir / "ensemble.json");
    CHECK(j["total_mean"] == 0.0);
    CHECK(j["trials_used"] == 1);
    CHECK(j["regime"].is_null());
}

TEST_CASE("cli ensemble determinism across worker counts") {
    std::string bin = binary_path();
    REQUIRE_FALSE(bin.empty());
    auto dir1 = fresh_dir("ens_w1");
    auto dir2 = fresh_dir("ens_w2");
    std::string base =
        " ensemble --n 25 --delta 1e-4 --r0 0.9 --trials 6 --seed 123"
        " --nx 24 --ny 24 --re-min -1.4 --re-max 1.4 --im-min -1.4"
        " --im-max 1.4";
    CHECK(run_cmd(bin + base + " --workers 1 --out-dir " + dir1.string() +
                  " 2>/dev/null") == 0);
    CHECK(run_cmd(bin + base + " --workers 2 --out-dir " + dir2.string() +
                  " 2>/dev/null") == 0);
    auto j1 = strip_duration(slurp_json(dir1 / "ensemble.json"));
    auto j2 = strip_duration(slurp_json(dir2 / "ensemble.json"));
    CHECK(j1 == j2);
}

TEST_CASE("cli verify quick run and unattainable tolerance") {
    std::string bin = binary_path();
    REQUIRE_FALSE(bin.empty());
    auto dir = fresh_dir("verify");
    int rc = run_cmd(bin + " verify --n-list 2,8 --samples 8 --out-dir " +
                     dir.string() + " > /dev/null");
    CHECK(rc == 0);
    auto j = slurp_json(dir / "verify.json");
    CHECK(j["all_pass"] == true);
    CHECK(j["checks"]["prop42_identity"]["pass"] == true);

    rc = run_cmd(bin + " verify --n-list 2 --samples 4 --tol 1e-15 --out-dir " +
                 dir.string() + " > /dev/null");
    CHECK(rc == 1);
    auto j2 = slurp_json(dir / "verify.json");
    CHECK(j2["all_pass"] == false);
    CHECK(j2["checks"]["prop42_identity"]["worst"].get<double>() > 1e-15);
}
