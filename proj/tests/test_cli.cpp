#include <doctest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Scratch {
    fs::path dir;
    Scratch() {
        dir = fs::temp_directory_path() / ("sphere2b_cli_" + std::to_string(::getpid()));
        fs::create_directories(dir);
    }
    ~Scratch() { fs::remove_all(dir); }
};

int run(const std::string& args) {
    const std::string cmd = std::string(SPHERE2B_CLI) + " " + args + " >/dev/null 2>&1";
    const int st = std::system(cmd.c_str());
    return WIFEXITED(st) ? WEXITSTATUS(st) : -1;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

TEST_SUITE("cli") {
    TEST_CASE("exit codes") {
        Scratch s;
        const std::string o = " --out " + (s.dir / "r").string();
        CHECK(run("version") == 0);
        CHECK(run("simulate --system poly --state 2,1,0.3,1,0 --t 0:1" + o) == 0);
        CHECK(run("simulate --system reduced --m 1,0,0.5 --q 3.5 --p 0" + o) == 2);
        CHECK(run("simulate --system poly --state 1,2" + o) == 2);
        CHECK(run("verify-collision" + o) == 0);
        CHECK(run("verify-collision --negative-control" + o) == 1);
        CHECK(run("verify-collision --seed 2,1,0.3,1,0" + o) == 4);
        CHECK(run("topology --h 2.7 --C 6.02" + o) == 0);
        CHECK(run("topology --C -1 --h 1" + o) == 2);
        CHECK(run("blowup --chart invariant-plane" + o) == 0);
        CHECK(run("blowup --chart 7" + o) == 2);
        CHECK(run("simulate --no-such-flag") == 2);
    }

    TEST_CASE("outputs are deterministic and independent of --jobs") {
        Scratch s;
        const std::string a = (s.dir / "a").string(), b = (s.dir / "b").string();
        REQUIRE(run("topology --grid 'h=0:10:25 C=0.5:9:25' --out " + a + " --jobs 1") == 0);
        REQUIRE(run("topology --grid 'h=0:10:25 C=0.5:9:25' --out " + b + " --jobs 4") == 0);
        CHECK(slurp(a + ".csv") == slurp(b + ".csv"));
        REQUIRE(run("simulate --system poly --state 2,1,0.3,1,0 --t 0:2 --out " + a) == 0);
        REQUIRE(run("simulate --system poly --state 2,1,0.3,1,0 --t 0:2 --out " + b) == 0);
        CHECK(slurp(a + ".csv") == slurp(b + ".csv"));
        const std::string csv = slurp(a + ".csv");
        CHECK(csv.rfind("t,m1,m2,m3,xi,p,H,C\n", 0) == 0);
    }

    TEST_CASE("flags override the config file and the merge is echoed") {
        Scratch s;
        const fs::path cfg = s.dir / "cfg.json";
        std::ofstream(cfg) << R"({"system": "poly", "state": [2, 1, 0.3, 1, 0], "t": "0:1", "rtol": 1e-8})";
        const std::string out = (s.dir / "run").string();
        REQUIRE(run("simulate --config " + cfg.string() + " --rtol 1e-11 --out " + out) == 0);
        const json side = json::parse(slurp(out + ".json"));
        CHECK(side["config"]["rtol"].get<double>() == 1e-11);
        CHECK(side["config"]["system"] == "poly");
        CHECK(side["config"]["t"] == json::array({0.0, 1.0}));
        CHECK(side["command"] == "simulate");
        CHECK(side["csv"] == "run.csv");
        CHECK(side["config_hash"].get<std::string>().size() == 16);

        std::ofstream(cfg) << R"({"bogus": 1})";
        CHECK(run("simulate --config " + cfg.string() + " --out " + out) == 2);
    }
}
