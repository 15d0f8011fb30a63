#include "bandedge/cli.hpp"

#include <doctest.h>
#include <nlohmann/json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <algorithm>
#include <sys/wait.h>
#include <unistd.h>

using namespace bandedge::cli;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Result {
    int code;
    std::string out;
    std::string err;
};

Result invoke(std::vector<std::string> args) {
    args.insert(args.begin(), "bandedge");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int code = run(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

fs::path fresh_dir(const std::string& name) {
    const auto dir = fs::temp_directory_path() / ("bandedge_cli_" + name + "_" + std::to_string(::getpid()));
    fs::remove_all(dir);
    return dir;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

} // namespace

TEST_CASE("settings parsing") {
    std::istringstream in("# comment\nn_sites = 12\n\nw=3\nlengths = 2, 4,6\nprecise=yes\n");
    const auto s = Settings::parse(in, "cfg");
    CHECK(s.get_int("n-sites") == 12);
    CHECK(s.get_int("w") == 3);
    CHECK(s.get_int_list("lengths") == std::vector<int>{2, 4, 6});
    CHECK(s.get_bool("precise", false));
    CHECK(s.entries().at("w").origin == "cfg:4");
    CHECK(s.get_double("missing", 0.5) == 0.5);
    CHECK_THROWS_AS(s.get_int("missing"), ConfigError);

    std::istringstream bad("w 3\n");
    CHECK_THROWS_AS(Settings::parse(bad, "cfg"), ConfigError);
    std::istringstream duplicate("w=3\nw=4\n");
    CHECK_THROWS_AS(Settings::parse(duplicate, "cfg"), ConfigError);
    std::istringstream typed("w=three\n");
    CHECK_THROWS_AS(Settings::parse(typed, "cfg").get_int("w"), ConfigError);
}

TEST_CASE("thread resolution") {
    CHECK(resolve_threads(std::nullopt, nullptr) == 1);
    CHECK(resolve_threads(std::nullopt, "3") == 3);
    CHECK(resolve_threads(std::string("2"), "3") == 2);
    CHECK_THROWS_AS(resolve_threads(std::string("0"), nullptr), ConfigError);
    CHECK_THROWS_AS(resolve_threads(std::nullopt, "many"), ConfigError);
}

TEST_CASE("edge command writes manifest and CSVs reproducibly") {
    const auto dir = fresh_dir("edge");
    const std::vector<std::string> args{"edge", "--n-sites", "64", "--w", "4", "--replicates", "3",
                                        "--seed", "7", "--out", dir.string()};
    const auto first = invoke(args);
    REQUIRE(first.code == 0);
    for (const char* name : {"manifest.json", "extremes.csv", "curves.csv", "summary.json"}) {
        CHECK(fs::exists(dir / name));
    }
    const auto manifest = json::parse(slurp(dir / "manifest.json"));
    CHECK(manifest["command"] == "edge");
    CHECK(manifest["master_seed"] == 7);
    CHECK(manifest["config"]["n-sites"] == "64");
    CHECK(manifest.contains("rng"));
    CHECK(manifest.contains("code_version"));
    const auto extremes = slurp(dir / "extremes.csv");
    CHECK(extremes.rfind("replicate,alpha_max,alpha_min,scaled_right,scaled_left,norm_ratio\n", 0) == 0);
    CHECK(std::count(extremes.begin(), extremes.end(), '\n') == 4);
    const auto curves = slurp(dir / "curves.csv");
    CHECK(std::count(curves.begin(), curves.end(), '\n') == 25);

    auto threaded = args;
    threaded.insert(threaded.end(), {"--threads", "2"});
    REQUIRE(invoke(threaded).code == 0);
    CHECK(slurp(dir / "extremes.csv") == extremes);
    CHECK(slurp(dir / "curves.csv") == curves);
    fs::remove_all(dir);
}

TEST_CASE("config file with flag overrides") {
    const auto dir = fresh_dir("config");
    fs::create_directories(dir);
    {
        std::ofstream cfg(dir / "run.cfg");
        cfg << "n_sites = 7\nw = 2\nlengths = 4\ncheck_exhaustive = true\n";
    }
    auto r = invoke({"oracle", "--config", (dir / "run.cfg").string(), "--lengths", "3,3", "--out", dir.string()});
    REQUIRE(r.code == 0);
    const auto oracle = json::parse(slurp(dir / "oracle.json"));
    CHECK(oracle["lengths"] == json::array({3, 3}));
    CHECK(oracle["exhaustive_check"]["agrees"] == true);
    CHECK(oracle["joint_moment"] == oracle["exhaustive_check"]["joint_moment"]);
    CHECK(json::parse(r.out) == oracle);

    {
        std::ofstream cfg(dir / "bad.cfg");
        cfg << "n_sites = 7\ncolour = blue\n";
    }
    r = invoke({"oracle", "--config", (dir / "bad.cfg").string(), "--out", dir.string()});
    CHECK(r.code == kExitConfig);
    const auto error = json::parse(r.err);
    CHECK(error["error"]["exit_code"] == kExitConfig);
    CHECK(error["error"]["message"].get<std::string>().find("colour") != std::string::npos);
    CHECK(json::parse(slurp(dir / "error.json")) == error);
    fs::remove_all(dir);
}

TEST_CASE("exit codes") {
    const auto dir = fresh_dir("codes");
    CHECK(invoke({"edge", "--n-sites", "7", "--w", "4", "--out", dir.string()}).code == kExitConfig);
    CHECK(invoke({"edge", "--bogus"}).code == kExitConfig);
    CHECK(invoke({"edge", "--n-sites", "64", "--w", "4", "--eigen-budget", "10", "--out", dir.string()}).code ==
          kExitResource);
    CHECK(invoke({"oracle", "--n-sites", "7", "--w", "2", "--lengths", "6,6", "--out", dir.string()}).code ==
          kExitResource);
    CHECK(invoke({"edge", "--n-sites", "64", "--w", "4", "--threads", "0", "--out", dir.string()}).code ==
          kExitConfig);
    fs::remove_all(dir);
}

TEST_CASE("walk, moments and norm commands") {
    const auto dir = fresh_dir("misc");
    REQUIRE(invoke({"walk", "--n-sites", "8", "--w", "1", "--lengths", "2,3", "--r", "0,1", "--out", dir.string()}).code == 0);
    const auto walk = slurp(dir / "walk.csv");
    CHECK(walk.rfind("n,R,count_exact,count_fourier,gaussian,uniform,upper_bound\n", 0) == 0);
    CHECK(walk.find("\n2,0,0.5,") != std::string::npos);
    CHECK(walk.find("\n3,1,0.375,") != std::string::npos);

    REQUIRE(invoke({"moments", "--n-sites", "7", "--w", "2", "--method", "exhaustive", "--n-max", "4", "--out", dir.string()}).code == 0);
    const auto moments = slurp(dir / "moments.csv");
    CHECK(moments.find("\n0,7,0,exhaustive,16384\n") != std::string::npos);
    CHECK(moments.find("\n2,0,0,exhaustive,16384\n") != std::string::npos);
    CHECK(invoke({"moments", "--n-sites", "7", "--w", "2", "--method", "guess", "--out", dir.string()}).code ==
          kExitConfig);

    REQUIRE(invoke({"norm", "--n-sites", "60", "--w", "3", "--replicates", "2", "--ipr", "--out", dir.string()}).code == 0);
    const auto norms = slurp(dir / "norms.csv");
    CHECK(norms.rfind("replicate,alpha_max,alpha_min,norm_ratio,ipr_right\n", 0) == 0);
    fs::remove_all(dir);
}

TEST_CASE("validate dump and reload") {
    const auto dir = fresh_dir("validate");
    fs::create_directories(dir);
    const auto csv = (dir / "m.csv").string();
    auto r = invoke({"validate", "--n-sites", "10", "--w", "2", "--beta", "2", "--dump", csv, "--out", dir.string()});
    REQUIRE(r.code == 0);
    r = invoke({"validate", "--n-sites", "10", "--w", "2", "--beta", "2", "--matrix", csv, "--out", dir.string()});
    CHECK(r.code == 0);
    CHECK(json::parse(slurp(dir / "validation.json"))["valid"] == true);
    {
        std::ofstream bad(csv, std::ios::app);
        bad << "0,0,1,0\n";
    }
    r = invoke({"validate", "--n-sites", "10", "--w", "2", "--beta", "2", "--matrix", csv, "--out", dir.string()});
    CHECK(r.code == kExitFailure);
    CHECK(json::parse(slurp(dir / "validation.json"))["valid"] == false);
    fs::remove_all(dir);
}

TEST_CASE("installed binary") {
    const char* tool = std::getenv("BANDEDGE_TOOL");
    if (tool == nullptr) return;
    const auto dir = fresh_dir("binary");
    const std::string base = std::string(tool) + " edge --n-sites 40 --w 3 --out " + dir.string() + " > /dev/null 2>&1";
    int status = std::system(base.c_str());
    CHECK(WEXITSTATUS(status) == 0);
    CHECK(fs::exists(dir / "manifest.json"));
    status = std::system(("BANDEDGE_THREADS=0 " + base).c_str());
    CHECK(WEXITSTATUS(status) == kExitConfig);
    status = std::system(("BANDEDGE_THREADS=2 " + base).c_str());
    CHECK(WEXITSTATUS(status) == 0);
    CHECK(json::parse(slurp(dir / "manifest.json"))["threads"] == 2);
    fs::remove_all(dir);
}
