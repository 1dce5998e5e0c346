// Command-line front end: exact bounce-chain sampling, path integration,
// resurrection, overshoot sampling, and the verification suite.
//
// Exit codes: 0 success, 1 verification failure, 2 usage error, 3 runtime
// guard tripped.

#include <cstdio>
#include <iostream>
#include <limits>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "langevin/analytic.hpp"
#include "langevin/io.hpp"
#include "langevin/ladder.hpp"
#include "langevin/path.hpp"
#include "langevin/skeleton.hpp"
#include "langevin/util.hpp"
#include "langevin/verify.hpp"

namespace {

constexpr double kDefaultC = 0.09016994374947428;  // k = 0.1 exactly

struct CommonOpts {
    double c = kDefaultC;
    double u0 = 1.0;
    std::uint64_t n = 1000;
    std::uint64_t seed = 0;
    double dt = 1e-3;
    double eps = 0.01;
    double horizon = 10.0;
    std::string out = ".";
    unsigned threads = 0;
};

std::string join_path(const std::string& dir, const std::string& name) {
    if (dir.empty() || dir == ".") return name;
    return dir.back() == '/' ? dir + name : dir + "/" + name;
}

nlohmann::json params_json(const CommonOpts& o, const langevin::ModelParams& p) {
    return {{"c", p.c},       {"k", p.k},           {"drift", p.drift},
            {"mu_up", p.mu_up}, {"u0", o.u0},       {"n", o.n},
            {"seed", o.seed}, {"dt", o.dt},         {"eps", o.eps},
            {"horizon", o.horizon},
            {"threads", langevin::resolve_threads(o.threads)}};
}

int cmd_kc(double c, double c_min, double c_max, int points, const std::string& out) {
    using namespace langevin;
    if (c > 0.0) {
        const ModelParams p = ModelParams::from_c(c);
        nlohmann::json doc{{"c", p.c},
                           {"k", p.k},
                           {"c_critical", critical_elasticity()},
                           {"drift", p.drift},
                           {"mu_up", p.mu_up},
                           {"t1_tail_const_up", t1_tail_const_up(p)}};
        std::cout << doc.dump(2) << "\n";
        return 0;
    }
    const auto curve = kc_curve(c_min, c_max, points);
    std::vector<std::vector<double>> rows;
    rows.reserve(curve.size());
    for (const auto& [cv, kv] : curve) rows.push_back({cv, kv});
    const std::string path = join_path(out, "kc_curve.csv");
    write_csv(path, {"c", "k"}, rows);
    RunManifest manifest("kc", {{"c_min", c_min}, {"c_max", c_max}, {"points", points}});
    manifest.add_output(path);
    manifest.write(join_path(out, "manifest.json"));
    std::cout << "wrote " << path << "\n";
    return 0;
}

int cmd_simulate(const std::string& mode, const CommonOpts& o, double x0) {
    using namespace langevin;
    const ModelParams p = ModelParams::from_c(o.c);
    RunManifest manifest("simulate " + mode, params_json(o, p));
    const unsigned threads = resolve_threads(o.threads);

    if (mode == "chain" || mode == "tilted") {
        const bool tilted = mode == "tilted";
        ChainConfig cfg;
        cfg.seed = o.seed;
        std::vector<std::vector<double>> rows(o.n);
        parallel_for(o.n, threads, [&](std::size_t i) {
            RngStream rng(o.seed, i);
            const BounceChain chain =
                tilted ? simulate_tilted_chain(rng, o.u0, p, cfg, o.horizon)
                       : simulate_chain(rng, o.u0, p, cfg);
            rows[i] = {static_cast<double>(i),
                       chain.zeta,
                       static_cast<double>(chain.times.size() - 1),
                       chain.times.size() > 1 ? chain.times[1] : 0.0,
                       chain.speeds.back(),
                       chain.truncated_weight,
                       chain.capped ? 1.0 : 0.0};
        });
        const std::string path = join_path(o.out, mode + "s.csv");
        write_csv(path, {"chain", "zeta", "n_bounces", "t1", "final_speed",
                         "truncated_weight", "capped"},
                  rows);
        manifest.add_output(path);
    } else if (mode == "path") {
        PathConfig cfg;
        cfg.dt = o.dt;
        cfg.horizon = o.horizon;
        cfg.seed = o.seed;
        RngStream rng(o.seed, 0);
        PathSample path = integrate_sor(rng, x0, o.u0, p, cfg);
        path.w = reconstruct_w(path);
        std::vector<std::vector<double>> rows(path.grid.size());
        for (std::size_t i = 0; i < path.grid.size(); ++i)
            rows[i] = {path.grid[i], path.x[i], path.v[i], path.w[i]};
        const std::string ppath = join_path(o.out, "path.csv");
        write_csv(ppath, {"t", "x", "v", "w"}, rows);
        manifest.add_output(ppath);
        std::vector<std::vector<double>> brows(path.bounces.size());
        for (std::size_t i = 0; i < path.bounces.size(); ++i)
            brows[i] = {path.bounces[i].time, path.bounces[i].incoming,
                        path.bounces[i].outgoing};
        const std::string bpath = join_path(o.out, "bounces.csv");
        write_csv(bpath, {"time", "incoming", "outgoing"}, brows);
        manifest.add_output(bpath);
    } else if (mode == "resurrect") {
        PathConfig cfg;
        cfg.dt = o.dt;
        cfg.horizon = o.horizon;
        cfg.seed = o.seed;
        cfg.adaptive_scaling = true;
        cfg.absorb_speed = 1e-3 * o.eps;
        RngStream rng(o.seed, 0);
        const ResurrectResult res = resurrect(rng, o.eps, p, cfg, o.n);
        std::vector<std::vector<double>> rows(res.excursions.size());
        for (std::size_t i = 0; i < res.excursions.size(); ++i) {
            const ExcursionRecord& e = res.excursions[i];
            rows[i] = {e.start,
                       e.length,
                       e.first_bounce_time,
                       e.max_speed,
                       static_cast<double>(e.outgoing_speeds.size()),
                       e.censored ? 1.0 : 0.0};
        }
        const std::string epath = join_path(o.out, "excursions.csv");
        write_csv(epath,
                  {"start", "length", "first_bounce_time", "max_speed", "n_bounces",
                   "censored"},
                  rows);
        manifest.add_output(epath);
        std::vector<std::vector<double>> prows(res.path.grid.size());
        for (std::size_t i = 0; i < res.path.grid.size(); ++i)
            prows[i] = {res.path.grid[i], res.path.x[i], res.path.v[i]};
        const std::string ppath = join_path(o.out, "path.csv");
        write_csv(ppath, {"t", "x", "v"}, prows);
        manifest.add_output(ppath);
    }
    manifest.write(join_path(o.out, "manifest.json"));
    std::cout << "wrote artifacts to " << o.out << "\n";
    return 0;
}

int cmd_overshoot(const CommonOpts& o, double level, std::uint64_t table_size) {
    using namespace langevin;
    const ModelParams p = ModelParams::from_c(o.c);
    const LadderTable table(p, table_size, o.seed);
    RngStream rng_a(o.seed, 1);
    RngStream rng_b(o.seed, 2);
    std::vector<std::vector<double>> rows;
    rows.reserve(2 * o.n);
    for (std::uint64_t i = 0; i < o.n; ++i)
        rows.push_back({0.0, table.sample_overshoot(rng_a)});
    const OvershootSample crossing = overshoot_at_level(rng_b, level, o.n, p);
    for (double v : crossing.values) rows.push_back({1.0, v});
    const std::string path = join_path(o.out, "overshoot.csv");
    write_csv(path, {"construction", "value"}, rows);
    RunManifest manifest("overshoot", params_json(o, p));
    manifest.add_output(path);
    manifest.write(join_path(o.out, "manifest.json"));
    std::cout << "wrote " << path << " (construction 0 = size-biased ladder, 1 = "
                 "level crossing at "
              << level << ")\n";
    return 0;
}

int cmd_verify(const CommonOpts& o, const std::string& suite, const std::string& report) {
    using namespace langevin;
    const VerifySettings settings = VerifySettings::make(
        o.c, o.seed, suite == "quick", resolve_threads(o.threads));
    nlohmann::json entries = nlohmann::json::array();
    bool ok = true;
    for (const CriterionResult& r : run_all_criteria(settings)) {
        ok = ok && r.pass;
        std::printf("[%s] %2d %-24s %s\n", r.pass ? "PASS" : "FAIL", r.id,
                    r.name.c_str(), r.statement.c_str());
        nlohmann::json metrics = nlohmann::json::object();
        for (const auto& m : r.metrics) metrics[m.name] = m.value;
        entries.push_back({{"id", r.id},
                           {"name", r.name},
                           {"statement", r.statement},
                           {"metrics", metrics},
                           {"tolerance", r.tolerance},
                           {"pass", r.pass}});
    }
    if (!report.empty()) {
        nlohmann::json doc{{"version", kVersion},
                           {"suite", suite},
                           {"c", o.c},
                           {"seed", o.seed},
                           {"finished", iso8601_now()},
                           {"criteria", entries},
                           {"pass", ok}};
        std::ofstream out(report);
        if (!out) throw std::runtime_error("verify: cannot write " + report);
        out << doc.dump(2) << "\n";
    }
    std::cout << (ok ? "verification passed" : "verification FAILED") << "\n";
    return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Sub-critical reflected Langevin process toolkit"};
    app.require_subcommand(1);

    CommonOpts o;
    double x0 = 0.0;
    double kc_c = -1.0, c_min = 0.01, c_max = 0.16;
    int kc_points = 50;
    std::string kc_out = ".";
    std::string mode, suite = "full", report;
    double level = 15.0;
    std::uint64_t table_size = 100000;

    auto* kc = app.add_subcommand("kc", "tail exponent and derived constants");
    kc->add_option("--c", kc_c, "elasticity; prints constants for this c");
    kc->add_option("--c-min", c_min, "curve lower endpoint");
    kc->add_option("--c-max", c_max, "curve upper endpoint");
    kc->add_option("--points", kc_points, "curve resolution");
    kc->add_option("--out", kc_out, "output directory for the curve CSV");

    auto* sim = app.add_subcommand("simulate", "sample chains, paths, or excursions");
    sim->add_option("mode", mode, "chain | tilted | path | resurrect")
        ->required()
        ->check(CLI::IsMember({"chain", "tilted", "path", "resurrect"}));
    sim->add_option("--c", o.c, "elasticity");
    sim->add_option("--u0", o.u0, "initial (outgoing) speed");
    sim->add_option("--x0", x0, "initial position (path mode)");
    sim->add_option("--n", o.n, "number of replicas / excursions");
    sim->add_option("--seed", o.seed, "RNG seed")->required();
    sim->add_option("--dt", o.dt, "integrator step");
    sim->add_option("--eps", o.eps, "resurrection speed");
    sim->add_option("--horizon", o.horizon, "time horizon");
    sim->add_option("--out", o.out, "output directory");
    sim->add_option("--threads", o.threads, "worker threads (0 = auto)");

    auto* over = app.add_subcommand("overshoot", "stationary overshoot samples");
    over->add_option("--c", o.c, "elasticity");
    over->add_option("--n", o.n, "samples per construction");
    over->add_option("--seed", o.seed, "RNG seed")->required();
    over->add_option("--level", level, "crossing level for the direct construction");
    over->add_option("--table-size", table_size, "ladder increments in the frozen table");
    over->add_option("--out", o.out, "output directory");

    auto* ver = app.add_subcommand("verify", "run the acceptance criteria");
    ver->add_option("--c", o.c, "elasticity");
    ver->add_option("--seed", o.seed, "RNG seed")->required();
    ver->add_option("--suite", suite, "quick | full")
        ->check(CLI::IsMember({"quick", "full"}));
    ver->add_option("--out", report, "path of the JSON report");
    ver->add_option("--threads", o.threads, "worker threads (0 = auto)");

    try {
        app.parse(argc, argv);
        if (kc->parsed())
            return cmd_kc(kc_c, c_min, c_max, kc_points, kc_out);
        if (sim->parsed()) return cmd_simulate(mode, o, x0);
        if (over->parsed()) return cmd_overshoot(o, level, table_size);
        if (ver->parsed()) return cmd_verify(o, suite, report);
        return 2;
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "runtime error: " << e.what() << "\n";
        return 3;
    }
}
