// aoi: closed forms, simulation, exhaustive search and sweeps from the command line.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <thread>

#include "cli_app.hpp"

namespace {

using namespace aoi;

struct Flags {
    SystemParams p;
    std::string policy = "auto", level = "dof", format = "json", out;
    std::int64_t slots = 0, warmup = -1;
    std::uint64_t seed = 1;
};

void add_params(CLI::App* c, Flags& f) {
    c->add_option("--K", f.p.K, "source/user pairs")->required();
    c->add_option("--M", f.p.M, "transmit antennas")->required();
    c->add_option("--N", f.p.N, "receive antennas per user")->required();
    c->add_option("--B", f.p.B, "symbols per update")->required();
    c->add_option("--q", f.p.q, "field size (prime)")->capture_default_str();
}

void add_run(CLI::App* c, Flags& f) {
    add_params(c, f);
    c->add_option("--policy", f.policy, "sync|round-robin|joint|alt|framed|pi1|auto")->capture_default_str();
    c->add_option("--level", f.level, "symbol|dof")->capture_default_str();
    c->add_option("--slots", f.slots, "horizon T (0: warm-up + 10 periods)")->capture_default_str();
    c->add_option("--warmup", f.warmup, "warm-up W (-1: 4 periods)")->capture_default_str();
    c->add_option("--seed", f.seed)->capture_default_str();
    c->add_option("--format", f.format, "json|csv")->capture_default_str();
    c->add_option("--out", f.out, "output file (default stdout)");
}

cli::RunConfig run_config(const Flags& f) {
    cli::RunConfig r;
    r.params = f.p;
    r.policy = f.policy;
    r.level = parse_level(f.level);
    r.slots = f.slots;
    r.warmup = f.warmup;
    r.seed = f.seed;
    r.format = cli::parse_format(f.format);
    return r;
}

template <class F>
int with_output(const std::string& path, F&& body) {
    if (path.empty()) return body(std::cout);
    std::ofstream file(path);
    if (!file) throw std::runtime_error("cannot open " + path + " for writing");
    const int code = body(file);
    file.flush();
    if (!file) throw std::runtime_error("write failed: " + path);
    return code;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"AoI toolkit for MIMO broadcast status updating"};
    app.require_subcommand(1);
    Flags f;

    auto* theory = app.add_subcommand("theory", "closed-form quantities as JSON");
    add_params(theory, f);
    theory->add_option("--out", f.out, "output file (default stdout)");

    auto* simulate = app.add_subcommand("simulate", "run one scheme");
    add_run(simulate, f);

    auto* verify = app.add_subcommand("verify", "simulate the designated scheme and compare with the closed form");
    add_run(verify, f);

    auto* search = app.add_subcommand("search", "exhaustive minimum mean cycle search");
    add_params(search, f);
    cli::SearchConfig sc;
    std::string mode = "full", cap = "auto", solver = "auto";
    search->add_option("--mode", mode, "pi0|full")->capture_default_str();
    search->add_option("--delta-cap", cap, "auto|INT")->capture_default_str();
    search->add_option("--solver", solver, "auto|howard|karp")->capture_default_str();
    search->add_option("--state-limit", sc.state_limit)->capture_default_str();
    search->add_flag("--audit", sc.audit, "run the structural audits on the optimal cycle");
    search->add_option("--out", f.out, "output file (default stdout)");

    auto* sweep = app.add_subcommand("sweep", "grid of simulations to CSV");
    std::string config;
    unsigned jobs = std::max(1u, std::thread::hardware_concurrency());
    sweep->add_option("config", config, "sweep file (key = value lines)")->required()->check(CLI::ExistingFile);
    sweep->add_option("--jobs", jobs, "worker threads")->capture_default_str();
    sweep->add_option("--out", f.out, "output file (default stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (*theory) return with_output(f.out, [&](std::ostream& o) { return cli::cmd_theory(f.p, o); });
        if (*simulate) return with_output(f.out, [&](std::ostream& o) { return cli::cmd_simulate(run_config(f), o); });
        if (*verify) return with_output(f.out, [&](std::ostream& o) { return cli::cmd_verify(run_config(f), o); });
        if (*search) {
            sc.params = f.p;
            sc.mode = oracle::parse_mode(mode);
            sc.solver = oracle::parse_solver(solver);
            sc.delta_cap = cap == "auto" ? 0 : std::stoi(cap);
            return with_output(f.out, [&](std::ostream& o) { return cli::cmd_search(sc, o); });
        }
        if (*sweep) {
            std::ifstream in(config);
            if (!in) throw std::runtime_error("cannot read " + config);
            const auto s = cli::parse_sweep(in);
            return with_output(f.out, [&](std::ostream& o) { return cli::cmd_sweep(s, jobs, o, std::cerr); });
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 2;
}
