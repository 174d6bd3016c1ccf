#include <doctest.h>

#include "eitlog/errors.hpp"
#include "eitlog/report.hpp"
#include "eitlog/runner.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace eitlog;

namespace {

RunConfig config_from(const std::string& text) {
    std::istringstream in(text);
    return parse_config(in);
}

std::string read_file(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

struct TempDir {
    std::filesystem::path path;
    explicit TempDir(const std::string& name)
        : path(std::filesystem::temp_directory_path() / name) {
        std::filesystem::remove_all(path);
        std::filesystem::create_directories(path);
    }
    ~TempDir() { std::filesystem::remove_all(path); }
};

} // namespace

TEST_CASE("config parsing: defaults and overrides") {
    const RunConfig cfg = config_from("experiment = tau_rate\n"
                                      "mesh_level = 1\n"
                                      "basis_order = 4\n"
                                      "seed = 99\n"
                                      "epsilon = 0.1 0.5\n"
                                      "# comment\n"
                                      "bounds = 0.6 1.8\n");
    CHECK(cfg.experiment == "tau_rate");
    CHECK(cfg.mesh_level == 1);
    CHECK(cfg.seed == 99);
    CHECK(cfg.epsilons.size() == 2);
    CHECK(cfg.bound_lo == doctest::Approx(0.6));
}

TEST_CASE("config parsing: rejections") {
    CHECK_THROWS_AS(config_from("experiment = nope\n"), ConfigError);
    CHECK_THROWS_AS(config_from("experiment = tau_rate\nbogus_key = 3\n"),
                    ConfigError);
    CHECK_THROWS_AS(config_from("experiment = tau_rate\ntau_grid =\n"),
                    ConfigError);
    CHECK_THROWS_AS(config_from("mesh_level = 2\n"), ConfigError); // no experiment
    // aliasing: level 0 has 48 boundary nodes, budget 12, so N = 8 is too big
    CHECK_THROWS_AS(
        config_from("experiment = tau_rate\nmesh_level = 0\nbasis_order = 8\n"),
        ConfigError);
    CHECK_THROWS_AS(config_from("experiment = tau_rate\nepsilon = 0.9\n"),
                    ConfigError);
}

TEST_CASE("conductivity specs") {
    const DiskMesh mesh = build_disk_mesh(1);
    const ConductivityField c =
        parse_conductivity(mesh, "constant 1.5", 1, 0.5, 2.0);
    CHECK(c.values.minCoeff() == 1.5);
    CHECK(c.values.maxCoeff() == 1.5);

    const ConductivityField s = parse_conductivity(mesh, "smooth", 1, 0.5, 2.0);
    CHECK(s.admissible());
    CHECK(s.min() >= 0.5);
    CHECK(s.max() <= 2.0);

    const ConductivityField inc = parse_conductivity(
        mesh, "inclusions 0.3 0.0 0.25 2.0", 1, 0.5, 2.0);
    CHECK(inc.max() == 2.0);
    CHECK(inc.min() == 1.0);

    CHECK_THROWS_AS(parse_conductivity(mesh, "constant -1", 1, 0.5, 2.0),
                    ConfigError);
    CHECK_THROWS_AS(parse_conductivity(mesh, "waves", 1, 0.5, 2.0), ConfigError);
    CHECK_THROWS_AS(
        parse_conductivity(mesh, "inclusions 0.1 0.2 0.3", 1, 0.5, 2.0),
        ConfigError);
}

TEST_CASE("run_config writes reports, plot data, and a manifest") {
    TempDir dir("eitlog_run_test");
    RunConfig cfg = config_from("experiment = tau_rate\n"
                                "mesh_level = 2\n"
                                "basis_order = 8\n"
                                "conductivity = constant 1.0\n"
                                "epsilon = 0.25\n");
    cfg.out_dir = dir.path.string();
    std::ostringstream echo;
    const RunOutcome outcome = run_config(cfg, std::nullopt, std::nullopt, &echo);
    CHECK(outcome.exit_code == kExitPass);
    CHECK(std::filesystem::exists(dir.path / "report_tau_rate_eps0.25.json"));
    CHECK(std::filesystem::exists(dir.path / "tau_rate_eps0.25_log_diff.csv"));
    CHECK(std::filesystem::exists(dir.path / "tau_rate_eps0.25_log_diff_fit.csv"));
    CHECK(std::filesystem::exists(outcome.manifest));
    CHECK(echo.str().find("[pass]") != std::string::npos);

    // manifest covers every artifact
    const std::string manifest = read_file(outcome.manifest);
    for (const auto& artifact : outcome.artifacts)
        CHECK(manifest.find(artifact.filename().string()) != std::string::npos);

    // two-column CSV with headers
    std::ifstream csv(dir.path / "tau_rate_eps0.25_log_diff.csv");
    std::string header;
    std::getline(csv, header);
    CHECK(header == "tau,log_diff_norm");
}

TEST_CASE("run_config determinism: identical manifests for identical seeds") {
    TempDir a("eitlog_det_a"), b("eitlog_det_b");
    RunConfig cfg = config_from("experiment = neumann_series\n"
                                "mesh_level = 1\n"
                                "basis_order = 4\n"
                                "seed = 31\n");
    const RunOutcome ra =
        run_config(cfg, a.path.string(), std::nullopt, nullptr);
    const RunOutcome rb =
        run_config(cfg, b.path.string(), std::nullopt, nullptr);
    CHECK(read_file(ra.manifest) == read_file(rb.manifest));
    // a different seed changes the artifacts
    const RunOutcome rc = run_config(cfg, a.path.string(), 32ULL, nullptr);
    CHECK(read_file(rc.manifest) != read_file(rb.manifest));
}

TEST_CASE("experiment_names lists the dispatch surface") {
    const auto& names = experiment_names();
    CHECK(names.size() == 10);
    CHECK(names.front() == "fd_check");
    CHECK(names.back() == "all");
}

#ifdef EITLOG_CLI_PATH
TEST_CASE("command line: exit codes") {
    TempDir dir("eitlog_cli_test");
    const auto good = dir.path / "good.txt";
    {
        std::ofstream out(good);
        out << "experiment = monotonicity\nmesh_level = 1\nbasis_order = 4\n"
            << "count = 3\n";
    }
    const auto bad = dir.path / "bad.txt";
    {
        std::ofstream out(bad);
        out << "experiment = tau_rate\nunknown_thing = 1\n";
    }
    const std::string cli = EITLOG_CLI_PATH;
    const std::string out_dir = (dir.path / "out").string();
    const int ok = std::system(
        (cli + " run " + good.string() + " --out " + out_dir + " > /dev/null 2>&1")
            .c_str());
    CHECK(WEXITSTATUS(ok) == kExitPass);
    const int cfg_err = std::system(
        (cli + " run " + bad.string() + " > /dev/null 2>&1").c_str());
    CHECK(WEXITSTATUS(cfg_err) == kExitConfigError);
    const int missing = std::system(
        (cli + " run " + (dir.path / "absent.txt").string() + " > /dev/null 2>&1")
            .c_str());
    CHECK(WEXITSTATUS(missing) == kExitConfigError);
    const int list = std::system(
        (cli + " --list-experiments > /dev/null 2>&1").c_str());
    CHECK(WEXITSTATUS(list) == kExitPass);
}
#endif

#ifdef EITLOG_CLI_PATH
TEST_CASE("command line: runtime failures exit with code 3") {
    TempDir dir("eitlog_cli_rt");
    const auto cfg = dir.path / "below.txt";
    {
        std::ofstream out(cfg);
        // grid far below the smallest eigenvalue trips the plateau guard
        out << "experiment = tau_rate\nmesh_level = 1\nbasis_order = 4\n"
            << "conductivity = constant 1.0\ntau_grid = 1e-8 1e-7 1e-6\n";
    }
    const std::string cli = EITLOG_CLI_PATH;
    const int rc = std::system(
        (cli + " run " + cfg.string() + " --out " + (dir.path / "o").string() +
         " > /dev/null 2>&1")
            .c_str());
    CHECK(WEXITSTATUS(rc) == kExitRuntimeError);
}
#endif
