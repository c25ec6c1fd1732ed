#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#ifndef NDWP_CLI_PATH
#define NDWP_CLI_PATH "./ndwp"
#endif

namespace fs = std::filesystem;

namespace {

int run(const std::string& args) {
    const std::string cmd = std::string(NDWP_CLI_PATH) + " " + args + " > /dev/null 2>&1";
    const int rc = std::system(cmd.c_str());
    return WEXITSTATUS(rc);
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

}  // namespace

TEST_CASE("cli exit codes", "[cli]") {
    CHECK(run("convert-units --n0 16 --f0 0.015 --fs0 0.003") == 0);
    // empty/invalid grid -> config error
    CHECK(run("scan --axis fs0 --from 0.002 --to 0 --points 2 --f0 0.015 --n0 12 --out /tmp/ndwp_cli_x") == 2);
    CHECK(run("scan --axis bogus --from 0 --to 0.001 --points 2 --f0 0.015 --n0 12 --out /tmp/ndwp_cli_x") == 2);
    // zero-duration schedule rejected
    CHECK(run("propagate --schedule turn-on --t1 0 --n0 10 --n-window 4 --k-photons 2 --out /tmp/ndwp_cli_x") == 2);
    // paper scale without --large
    CHECK(run("floquet --n0 60 --n-window 10 --k-photons 4 --out /tmp/ndwp_cli_x") == 2);
}

TEST_CASE("cli config file with flag overrides", "[cli]") {
    const fs::path dir = "/tmp/ndwp_cli_cfg";
    fs::create_directories(dir);
    {
        std::ofstream cfg(dir / "job.json");
        cfg << R"({"n0": 12, "f0": 0.015, "fs0": 0.0, "axis": "fs0", "from": 0.0,
                   "to": 0.001, "points": 2, "out_dir": ")" << (dir / "a").string() << R"("})";
    }
    REQUIRE(run("scan --config " + (dir / "job.json").string()) == 0);
    CHECK(fs::exists(dir / "a" / "levels.csv"));
    // flag overrides the config file's output directory
    REQUIRE(run("scan --config " + (dir / "job.json").string() + " --out " + (dir / "b").string()) == 0);
    CHECK(fs::exists(dir / "b" / "levels.csv"));
}

TEST_CASE("repeated runs are byte-identical", "[cli]") {
    const fs::path d1 = "/tmp/ndwp_cli_det1", d2 = "/tmp/ndwp_cli_det2";
    fs::remove_all(d1);
    fs::remove_all(d2);
    const std::string args = "scan --axis fs0 --from 0 --to 0.0015 --points 3 --f0 0.015 --n0 12";
    REQUIRE(run(args + " --out " + d1.string()) == 0);
    REQUIRE(run(args + " --out " + d2.string() + " --jobs 2") == 0);
    const std::string a = slurp(d1 / "levels.csv");
    const std::string b = slurp(d2 / "levels.csv");
    REQUIRE_FALSE(a.empty());
    CHECK(a == b);

    // quantum side determinism
    const std::string fargs = "floquet --n0 10 --f0 0.012 --fs0 0.002 --n-window 5 --k-photons 3";
    REQUIRE(run(fargs + " --out " + d1.string()) == 0);
    REQUIRE(run(fargs + " --out " + d2.string()) == 0);
    CHECK(slurp(d1 / "spectrum.csv") == slurp(d2 / "spectrum.csv"));
    CHECK(slurp(d1 / "delta.csv") == slurp(d2 / "delta.csv"));
}
