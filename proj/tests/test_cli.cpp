#include <doctest.h>

#ifdef CORP_HAVE_CLI

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include <json.hpp>

#include "corp_cli.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

/// Scratch directory removed on destruction.
struct TempDir {
    fs::path path;
    TempDir() {
        std::random_device rd;
        path = fs::temp_directory_path() / ("corp_cli_" + std::to_string(rd()) + std::to_string(rd()));
        fs::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path, ec);
    }
    [[nodiscard]] std::string sub(const std::string& name) const { return (path / name).string(); }
};

struct Result {
    int code;
    std::string out;
    std::string err;
};

Result run(std::vector<std::string> args) {
    args.insert(args.begin(), "corp");
    std::ostringstream out, err;
    const int code = corp::cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

json read_json(const std::string& path) {
    std::ifstream f(path);
    REQUIRE(f.good());
    return json::parse(f);
}

std::string slurp(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    std::ostringstream s;
    s << f.rdbuf();
    return s.str();
}

std::string write_config(const TempDir& dir, const std::string& name, const std::string& text) {
    const std::string path = dir.sub(name);
    std::ofstream(path) << text;
    return path;
}

const char* kPlantHeader = R"([graph]
adjacency = 0,0,0; 1,0,0; 0,1,0
[exosystem]
s = 0,-1; 1,0
w0 = 1,0
)";

}  // namespace

TEST_SUITE("cli") {
    TEST_CASE("certify the built-in example") {
        const TempDir dir;
        const auto r = run({"certify", "--scenario", "example41", "--out", dir.sub("o")});
        CHECK(r.code == 0);
        const auto j = read_json(dir.sub("o/certificate.json"));
        CHECK(j["verdict"] == "pass");
        CHECK(j["rho_eta"].get<double>() == doctest::Approx(0.9).epsilon(1e-7));
    }

    TEST_CASE("certify with mu = 1 fails with rho_eta = 2") {
        const TempDir dir;
        const auto r = run({"certify", "--scenario", "example41", "--mu", "1.0", "--out", dir.sub("o")});
        CHECK(r.code == 2);
        const auto j = read_json(dir.sub("o/certificate.json"));
        CHECK(j["verdict"] == "fail");
        CHECK(j["rho_eta"].get<double>() == doctest::Approx(2.0).epsilon(1e-7));
    }

    TEST_CASE("non-square A is an input error with a line number") {
        const TempDir dir;
        const auto cfg = write_config(dir, "bad.ini", std::string(kPlantHeader) + "[plant]\na = 0,1; 1,1; 2,2\nb = 0;1\nc = 1,0\np = 0,0; 1,0\n");
        const auto r = run({"certify", "--config", cfg, "--out", dir.sub("o")});
        CHECK(r.code == 1);
        CHECK(r.err.find("line 6") != std::string::npos);
    }

    TEST_CASE("usage errors") {
        CHECK(run({}).code == 1);
        CHECK(run({"certify"}).code == 1);
        CHECK(run({"frobnicate"}).code == 1);
        CHECK(run({"certify", "--scenario", "example41", "--k1", "guess"}).code == 1);
        CHECK(run({"certify", "--scenario", "/no/such/file.ini"}).code == 1);
        CHECK(run({"--help"}).code == 0);
    }

    TEST_CASE("design with the printed gains") {
        const TempDir dir;
        const auto r = run({"design", "--scenario", "example41", "--k1", "paper", "--out", dir.sub("o")});
        CHECK(r.code == 0);
        const auto j = read_json(dir.sub("o/design.json"));
        const std::string text = j.dump();
        CHECK(text.find("-8.9637") != std::string::npos);
        CHECK(text.find("-10.3322") != std::string::npos);
        CHECK(text.find("-10.7802") != std::string::npos);
    }

    TEST_CASE("design with synthesized gains") {
        const TempDir dir;
        CHECK(run({"design", "--scenario", "example41", "--k1", "synthesize", "--out", dir.sub("o")}).code == 0);
        CHECK(fs::exists(dir.sub("o/design.json")));
    }

    TEST_CASE("uncontrollable plant names the agent") {
        const TempDir dir;
        const auto cfg = write_config(dir, "unc.ini", std::string(kPlantHeader) +
                                                          "[plant]\na = 1,0; 0,2\nb = 1;1\nc = 1,0\np = 0,0; 1,0\n"
                                                          "[plant.2]\nb = 1;0\n");
        const auto r = run({"design", "--config", cfg, "--k1", "synthesize", "--out", dir.sub("o")});
        CHECK(r.code == 2);
        CHECK(r.err.find("agent 2") != std::string::npos);
    }

    TEST_CASE("simulate the example") {
        const TempDir dir;
        const auto r = run({"simulate", "--scenario", "example41", "-T", "30", "--out", dir.sub("o")});
        CHECK(r.code == 0);
        const auto m = read_json(dir.sub("o/metrics.json"));
        CHECK(m["final_max_error"].get<double>() <= 1e-2);
        CHECK_FALSE(m["diverged"].get<bool>());
        for (const char* f : {"trace.csv", "errors.csv", "metrics.json"}) CHECK(fs::exists(dir.sub(std::string("o/") + f)));
        CHECK(slurp(dir.sub("o/trace.csv")).rfind("t,phase,agent,component,value\n", 0) == 0);
    }

    TEST_CASE("forced simulation of an uncertified design diverges") {
        const TempDir dir;
        CHECK(run({"simulate", "--scenario", "example41", "--mu", "1.0", "--out", dir.sub("a")}).code == 2);
        const auto r = run({"simulate", "--scenario", "example41", "--mu", "1.0", "--force", "-T", "60", "--out", dir.sub("b")});
        CHECK(r.code == 3);
        CHECK(read_json(dir.sub("b/metrics.json"))["diverged"].get<bool>());
        CHECK(fs::file_size(dir.sub("b/trace.csv")) > 0);
    }

    TEST_CASE("simulate the microgrid") {
        const TempDir dir;
        const auto r = run({"simulate", "--scenario", "microgrid", "-T", "5", "--out", dir.sub("o")});
        CHECK(r.code == 0);
        const auto m = read_json(dir.sub("o/metrics.json"));
        for (const char* key : {"lambda_spread", "lambda_error", "sum_p_r", "max_abs_delta_omega", "rho_dispatch"})
            CHECK(m.contains(key));
        CHECK(m["p_main"].get<double>() == 850.0);
        CHECK(m["rho_dispatch"].get<double>() < 1.0);
        for (const char* f : {"dispatch.csv", "frequency.csv", "trace.csv"}) CHECK(fs::exists(dir.sub(std::string("o/") + f)));
    }

    TEST_CASE("microgrid certificate") {
        const TempDir dir;
        CHECK(run({"certify", "--scenario", "microgrid", "--out", dir.sub("o")}).code == 0);
        const auto cfg = write_config(dir, "lit.ini", "[microgrid]\nmu = literal\n");
        CHECK(run({"certify", "--config", cfg, "--out", dir.sub("p")}).code == 2);
    }

    TEST_CASE("outputs are byte-identical across runs") {
        const TempDir dir;
        for (const char* o : {"a", "b"}) {
            REQUIRE(run({"simulate", "--scenario", "example41", "-T", "5", "--seed", "4", "--out", dir.sub(o)}).code == 0);
        }
        for (const char* f : {"trace.csv", "errors.csv", "metrics.json"}) {
            CHECK(slurp(dir.sub(std::string("a/") + f)) == slurp(dir.sub(std::string("b/") + f)));
        }
        REQUIRE(run({"simulate", "--scenario", "example41", "-T", "5", "--seed", "5", "--out", dir.sub("c")}).code == 0);
        CHECK(slurp(dir.sub("a/trace.csv")) != slurp(dir.sub("c/trace.csv")));
    }
}

#endif
