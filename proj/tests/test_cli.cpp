#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

namespace fs = std::filesystem;

namespace {

struct CliResult {
    int exit_code;
    std::string out;
};

CliResult run_cli(const std::string& args, const std::string& env = "") {
    const fs::path capture = fs::temp_directory_path() / "fracvar_cli_test.out";
    const std::string cmd =
        env + " " + std::string(FRACVAR_CLI_PATH) + " " + args + " > " + capture.string() + " 2>&1";
    const int rc = std::system(cmd.c_str());
    std::ifstream in(capture, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return CliResult{rc == -1 ? -1 : WEXITSTATUS(rc), ss.str()};
}

fs::path scratch_dir() {
    const fs::path dir = fs::temp_directory_path() / "fracvar_cli_scratch";
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

} // namespace

TEST_CASE("cli rejects bad invocations with exit code 1") {
    CHECK(run_cli("no-such-command").exit_code == 1);
    CHECK(run_cli("integrate --fn \"x\"").exit_code == 1);          // missing required --alpha
    CHECK(run_cli("integrate --alpha 0.5 --fn \"x\" --bogus 1").exit_code == 1);
    CHECK(run_cli("integrate --alpha 1.5 --fn \"x\"").exit_code == 1);  // alpha out of range
    CHECK(run_cli("solve --alpha 0.5 --problem linear-g --out /dev/null").exit_code == 1);
    CHECK(run_cli("solve-free --alpha 0.5 --problem manufactured --out /dev/null").exit_code == 1);
}

TEST_CASE("cli does not write output files on validation failure") {
    const fs::path dir = scratch_dir();
    const fs::path out = dir / "bad.csv";
    const CliResult r =
        run_cli("fracdiff --alpha 0.5 --fn \"x+*2\" --a 0 --b 1 --n 9 --out " + out.string());
    CHECK(r.exit_code == 1);
    CHECK(!fs::exists(out));
}

TEST_CASE("cli integrate prints the closed-form kernel volume") {
    const CliResult r = run_cli("integrate --alpha 0.5 --fn \"1\" --nx 17 --ny 17");
    CHECK(r.exit_code == 0);
    CHECK(r.out == "integral=1\n");
}

TEST_CASE("cli help exits zero") {
    CHECK(run_cli("--help").exit_code == 0);
    CHECK(run_cli("solve --help").exit_code == 0);
}

TEST_CASE("cli green-check cases") {
    const CliResult constant = run_cli("green-check --alpha 0.7 --nx 17 --ny 17 --case constant");
    CHECK(constant.exit_code == 0);
    CHECK(constant.out == "lhs=0\nrhs_volume=0\nrhs_boundary=0\nresidual=0\n");

    const CliResult bump = run_cli("green-check --alpha 0.5 --nx 33 --ny 33 --case bump");
    CHECK(bump.exit_code == 0);
    const auto residual_pos = bump.out.find("residual=");
    REQUIRE(residual_pos != std::string::npos);
    CHECK(std::abs(std::stod(bump.out.substr(residual_pos + 9))) <= 1e-12);

    CHECK(run_cli("green-check --alpha 0.5 --case nope").exit_code == 1);
}

TEST_CASE("cli partial writes JSON when asked for a .json path") {
    const fs::path dir = scratch_dir();
    const fs::path out = dir / "field.json";
    const CliResult r = run_cli(
        "partial --alpha 0.5 --fn \"x*y\" --axis x --nx 9 --ny 9 --out " + out.string());
    REQUIRE(r.exit_code == 0);
    std::ifstream in(out);
    nlohmann::json j;
    in >> j;
    CHECK(j.at("grid").at("nx") == 9);
    CHECK(j.at("values").size() == 81);
}

TEST_CASE("cli solve failure statuses map to exit code 2") {
    const fs::path dir = scratch_dir();
    const CliResult r = run_cli(
        "solve --alpha 0.5 --problem dirichlet-quadratic --K 1e6 --nx 9 --ny 9 "
        "--max-outer 3 --max-inner 20 --out " +
        (dir / "u.csv").string() + " --report " + (dir / "r.json").string());
    CHECK(r.exit_code == 2);
    std::ifstream in(dir / "r.json");
    nlohmann::json j;
    in >> j;
    CHECK(j.at("status") == "Infeasible");  // report still written for diagnosis
}

TEST_CASE("cli config file supplies defaults and flags win") {
    const fs::path dir = scratch_dir();
    const fs::path cfg = dir / "fracvar.toml";
    {
        std::ofstream out(cfg);
        out << "[integrate]\nalpha = 0.5\nfn = \"1\"\nnx = 17\nny = 17\n";
    }
    const CliResult defaults = run_cli("--config " + cfg.string() + " integrate");
    CHECK(defaults.exit_code == 0);
    CHECK(defaults.out == "integral=1\n");

    // an explicit flag overrides the config value: on [0,1]^2 with f = 1 the
    // integral is (b-a)^alpha (d-c)^alpha = 1 for every alpha, so use f = x
    // where alpha changes the answer
    {
        std::ofstream out(cfg);
        out << "[integrate]\nalpha = 0.25\nfn = \"1\"\nnx = 17\nny = 17\n";
    }
    const CliResult overridden =
        run_cli("--config " + cfg.string() + " integrate --fn \"x\" --alpha 0.5");
    CHECK(overridden.exit_code == 0);
    const CliResult direct = run_cli("integrate --alpha 0.5 --fn \"x\" --nx 17 --ny 17");
    CHECK(overridden.out == direct.out);

    // unknown config keys are rejected
    {
        std::ofstream out(cfg);
        out << "[integrate]\nalpha = 0.5\nfn = \"1\"\nwhatever = 3\n";
    }
    CHECK(run_cli("--config " + cfg.string() + " integrate").exit_code == 1);
}

TEST_CASE("cli results are identical under different thread caps") {
    const CliResult one = run_cli("partial --alpha 0.4 --fn \"sin(x)*y\" --axis x --nx 129 "
                                  "--ny 65 --out /dev/stdout",
                                  "FRACVAR_THREADS=1");
    const CliResult two = run_cli("partial --alpha 0.4 --fn \"sin(x)*y\" --axis x --nx 129 "
                                  "--ny 65 --out /dev/stdout",
                                  "FRACVAR_THREADS=2");
    CHECK(one.exit_code == 0);
    CHECK(one.out == two.out);
}
