#include <catch2/catch_amalgamated.hpp>

#include <sys/wait.h>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "langevin/io.hpp"

namespace {

const std::string kCli = LANGEVIN_CLI_PATH;

int run(const std::string& args, const std::string& log = "/dev/null") {
    const std::string cmd = kCli + " " + args + " > " + log + " 2>&1";
    const int status = std::system(cmd.c_str());
    return WEXITSTATUS(status);
}

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

std::string tmpdir(const std::string& tag) {
    const std::string d = "cli_out_" + tag;
    [[maybe_unused]] const int rc = std::system(("rm -rf " + d + " && mkdir -p " + d).c_str());
    return d;
}

}  // namespace

TEST_CASE("kc prints the derived constants") {
    const int code = run("kc --c 0.09016994374947428", "kc.json");
    REQUIRE(code == 0);
    const auto doc = nlohmann::json::parse(slurp("kc.json"));
    CHECK(doc["k"].get<double>() == Catch::Approx(0.1).margin(1e-10));
    CHECK(doc["c_critical"].get<double>() == Catch::Approx(0.16303353).margin(1e-7));
    CHECK(doc["mu_up"].get<double>() == Catch::Approx(0.8168835).margin(1e-6));
    std::remove("kc.json");
}

TEST_CASE("kc writes a curve with a manifest") {
    const std::string d = tmpdir("kc");
    REQUIRE(run("kc --c-min 0.02 --c-max 0.15 --points 20 --out " + d) == 0);
    const auto manifest = nlohmann::json::parse(slurp(d + "/manifest.json"));
    CHECK(manifest["command"] == "kc");
    REQUIRE(manifest["outputs"].size() == 1);
    const std::string csv = manifest["outputs"][0]["path"].get<std::string>();
    CHECK(langevin::fnv1a64_file(csv) ==
          manifest["outputs"][0]["fnv1a64"].get<std::uint64_t>());
    std::ifstream in(csv);
    std::string header;
    std::getline(in, header);
    CHECK(header == "c,k");
    int lines = 0;
    for (std::string row; std::getline(in, row);) ++lines;
    CHECK(lines == 20);
}

TEST_CASE("simulate chain is seed-deterministic") {
    const std::string d1 = tmpdir("chain1"), d2 = tmpdir("chain2");
    REQUIRE(run("simulate chain --n 200 --seed 3 --out " + d1) == 0);
    REQUIRE(run("simulate chain --n 200 --seed 3 --out " + d2) == 0);
    CHECK(langevin::fnv1a64_file(d1 + "/chains.csv") ==
          langevin::fnv1a64_file(d2 + "/chains.csv"));

    const std::string d3 = tmpdir("chain3");
    REQUIRE(run("simulate chain --n 200 --seed 4 --out " + d3) == 0);
    CHECK(langevin::fnv1a64_file(d1 + "/chains.csv") !=
          langevin::fnv1a64_file(d3 + "/chains.csv"));

    // zeta column present and positive
    std::ifstream in(d1 + "/chains.csv");
    std::string header;
    std::getline(in, header);
    CHECK(header.find("zeta") != std::string::npos);
    int rows = 0;
    for (std::string row; std::getline(in, row); ++rows) {
        const auto c1 = row.find(',');
        const double zeta = std::stod(row.substr(c1 + 1));
        CHECK(zeta > 0.0);
    }
    CHECK(rows == 200);
}

TEST_CASE("simulate tilted, path, and resurrect write their artifacts") {
    const std::string d = tmpdir("sim");
    REQUIRE(run("simulate tilted --n 50 --seed 5 --horizon 1e4 --out " + d) == 0);
    CHECK(slurp(d + "/tilteds.csv").find("zeta") != std::string::npos);

    REQUIRE(run("simulate path --seed 6 --u0 1 --dt 1e-3 --horizon 2 --out " + d) == 0);
    std::ifstream in(d + "/path.csv");
    std::string header;
    std::getline(in, header);
    CHECK(header == "t,x,v,w");
    CHECK(slurp(d + "/bounces.csv").find("incoming") != std::string::npos);

    REQUIRE(run("simulate resurrect --n 20 --seed 7 --eps 0.05 --dt 2e-3 --horizon 1e6 "
                "--out " + d) == 0);
    std::ifstream ein(d + "/excursions.csv");
    std::getline(ein, header);
    CHECK(header == "start,length,first_bounce_time,max_speed,n_bounces,censored");
    int rows = 0;
    for (std::string row; std::getline(ein, row);) ++rows;
    CHECK(rows >= 1);
    CHECK(rows <= 20);
    const auto manifest = nlohmann::json::parse(slurp(d + "/manifest.json"));
    CHECK(manifest["params"]["k"].get<double>() == Catch::Approx(0.1).margin(1e-10));
}

TEST_CASE("overshoot writes both constructions") {
    const std::string d = tmpdir("over");
    REQUIRE(run("overshoot --n 500 --seed 8 --table-size 5000 --out " + d) == 0);
    std::ifstream in(d + "/overshoot.csv");
    std::string header;
    std::getline(in, header);
    CHECK(header == "construction,value");
    int biased = 0, crossing = 0;
    for (std::string row; std::getline(in, row);)
        (row[0] == '0' ? biased : crossing)++;
    CHECK(biased == 500);
    CHECK(crossing == 500);
}

TEST_CASE("usage errors exit with code 2") {
    CHECK(run("") == 2);
    CHECK(run("frobnicate") == 2);
    CHECK(run("simulate chain --n 10") == 2);            // --seed is mandatory
    CHECK(run("simulate warp --seed 1") == 2);           // unknown mode
    CHECK(run("verify") == 2);                           // --seed is mandatory
    CHECK(run("simulate chain --seed 1 --c 0.99") == 2); // supercritical c
    CHECK(run("simulate chain --seed 1 --c 0.05 --u0 -2") == 2);
    CHECK(run("--help") == 0);
}

TEST_CASE("quick verification suite passes end to end") {
    const std::string report = "cli_verify_report.json";
    REQUIRE(run("verify --seed 7 --suite quick --out " + report, "cli_verify.log") == 0);
    const auto doc = nlohmann::json::parse(slurp(report));
    CHECK(doc["pass"].get<bool>());
    REQUIRE(doc["criteria"].size() == 10);
    for (const auto& c : doc["criteria"]) {
        CHECK(c["pass"].get<bool>());
        CHECK(c.contains("metrics"));
        CHECK(c.contains("tolerance"));
    }
    const std::string log = slurp("cli_verify.log");
    CHECK(log.find("[PASS]  1") != std::string::npos);
    CHECK(log.find("verification passed") != std::string::npos);
    std::remove(report.c_str());
    std::remove("cli_verify.log");
}
