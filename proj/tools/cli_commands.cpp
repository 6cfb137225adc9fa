#include "cli_commands.hpp"

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <stdexcept>

#include <CLI11.hpp>
#include <json.hpp>

#include "fhbandit/driver.hpp"
#include "fhbandit/instance.hpp"

namespace fhbandit::cli {

namespace {

using nlohmann::json;

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::invalid_argument("cannot open file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::invalid_argument("cannot write file: " + path);
    out << text;
}

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

DelayRegime parse_regime(const std::string& s) {
    if (s == "auto") return DelayRegime::Auto;
    if (s == "small") return DelayRegime::Small;
    if (s == "large") return DelayRegime::Large;
    throw std::invalid_argument("--regime must be one of auto, small, large");
}

ResultRecord make_record(const InstanceSpec& spec, const SolvedInstance& sol,
                         const Estimate& est, double wall_s) {
    ResultRecord rec;
    rec.variant = to_string(spec.variant);
    rec.dual_bound = sol.dual_bound;
    rec.sim_mean = est.mean;
    rec.sim_stderr = est.stderr_;
    if (est.mean > 0.0) rec.ratio = sol.dual_bound / est.mean;
    rec.episodes = est.episodes;
    rec.seed = est.seed;
    rec.wall_time_s = wall_s;
    rec.lambda_minus = sol.lambda_minus;
    rec.lambda_plus = sol.lambda_plus;
    rec.a = sol.a;
    rec.iterations = sol.iterations;
    return rec;
}

struct SolveArgs {
    std::string instance_path;
    std::string output_path;  // empty -> stdout
    std::optional<double> epsilon;
    std::string regime = "auto";
};

int cmd_solve(const SolveArgs& args, std::ostream& out) {
    InstanceSpec spec = load_instance(args.instance_path);
    SolveOptions opts;
    opts.epsilon = args.epsilon;
    opts.regime = parse_regime(args.regime);
    SolvedInstance sol = solve_instance(spec, opts);
    std::string text = solution_to_json(sol);
    if (args.output_path.empty()) out << text;
    else write_file(args.output_path, text);
    return kExitOk;
}

struct SimulateArgs {
    std::string instance_path;
    std::string solution_path;
    std::uint64_t episodes = 100000;
    std::uint64_t seed = 0;
    int threads = 0;
    std::string output_path;  // empty -> stdout
    std::string csv_path;     // empty -> no per-episode CSV
};

int cmd_simulate(const SimulateArgs& args, std::ostream& out) {
    if (args.episodes == 0)
        throw std::invalid_argument("--episodes must be positive");
    InstanceSpec spec = load_instance(args.instance_path);
    SolvedInstance sol = solution_from_json(spec, read_file(args.solution_path));

    auto t0 = std::chrono::steady_clock::now();
    Estimate est = simulate_instance(spec, sol, args.episodes, args.seed, args.threads);
    double wall_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    ResultRecord rec = make_record(spec, sol, est, wall_s);
    std::string text = rec.to_json();
    if (args.output_path.empty()) out << text;
    else write_file(args.output_path, text);

    if (!args.csv_path.empty()) {
        std::ostringstream csv;
        csv << "episode,reward\n";
        for (std::uint64_t ep = 0; ep < args.episodes; ++ep)
            csv << ep << "," << fmt(run_episode(spec, sol, args.seed, ep)) << "\n";
        write_file(args.csv_path, csv.str());
    }
    return kExitOk;
}

struct BenchArgs {
    std::string suite_path;
    std::uint64_t episodes = 100000;
    std::uint64_t seed = 0;
    int threads = 0;
    std::string output_path;  // empty -> stdout
};

struct BenchEntry {
    std::string instance_path;
    double max_ratio = 0.0;
    std::uint64_t episodes = 0;
    std::uint64_t seed = 0;
    std::string regime = "auto";
    std::optional<double> epsilon;
};

std::vector<BenchEntry> parse_suite(const std::string& text, const BenchArgs& defaults) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw std::invalid_argument(std::string("suite: not valid JSON: ") + e.what());
    }
    const json* list = nullptr;
    if (j.is_array()) list = &j;
    else if (j.is_object() && j.contains("suite") && j.at("suite").is_array())
        list = &j.at("suite");
    else
        throw std::invalid_argument(
            "suite: top level must be an array or an object with a \"suite\" array");
    std::vector<BenchEntry> entries;
    int idx = 0;
    for (const json& e : *list) {
        const std::string where = "suite[" + std::to_string(idx++) + "]";
        if (!e.is_object() || !e.contains("instance") || !e.at("instance").is_string())
            throw std::invalid_argument(where + ": needs an \"instance\" path string");
        if (!e.contains("max_ratio") || !e.at("max_ratio").is_number())
            throw std::invalid_argument(where + ": needs a numeric \"max_ratio\"");
        BenchEntry be;
        be.instance_path = e.at("instance").get<std::string>();
        be.max_ratio = e.at("max_ratio").get<double>();
        be.episodes = e.contains("episodes") ? e.at("episodes").get<std::uint64_t>()
                                             : defaults.episodes;
        be.seed = e.contains("seed") ? e.at("seed").get<std::uint64_t>() : defaults.seed;
        if (e.contains("regime")) be.regime = e.at("regime").get<std::string>();
        if (e.contains("epsilon")) be.epsilon = e.at("epsilon").get<double>();
        entries.push_back(std::move(be));
    }
    return entries;
}

std::string sanitize_csv(std::string s) {
    for (char& c : s)
        if (c == ',' || c == '\n' || c == '\r') c = ';';
    return s;
}

int cmd_bench(const BenchArgs& args, std::ostream& out) {
    std::vector<BenchEntry> entries = parse_suite(read_file(args.suite_path), args);

    std::ostringstream table;
    table << "instance,variant,dual_bound,sim_mean,sim_stderr,ratio,max_ratio,status\n";
    bool any_fail = false;
    for (const BenchEntry& be : entries) {
        std::string variant, dual, mean, se, ratio, status;
        try {
            if (be.episodes == 0) throw std::invalid_argument("episodes must be positive");
            InstanceSpec spec = load_instance(be.instance_path);
            SolveOptions opts;
            opts.epsilon = be.epsilon;
            opts.regime = parse_regime(be.regime);
            SolvedInstance sol = solve_instance(spec, opts);
            Estimate est = simulate_instance(spec, sol, be.episodes, be.seed, args.threads);
            variant = to_string(spec.variant);
            dual = fmt(sol.dual_bound);
            mean = fmt(est.mean);
            se = fmt(est.stderr_);
            bool pass = false;
            if (est.mean > 0.0) {
                double r = sol.dual_bound / est.mean;
                ratio = fmt(r);
                pass = r <= be.max_ratio;
            } else {
                pass = sol.dual_bound <= 0.0;  // nothing to collect and nothing promised
            }
            status = pass ? "pass" : "fail";
            if (!pass) any_fail = true;
        } catch (const std::exception& e) {
            status = "error: " + sanitize_csv(e.what());
            any_fail = true;
        }
        table << sanitize_csv(be.instance_path) << "," << variant << "," << dual << ","
              << mean << "," << se << "," << ratio << "," << fmt(be.max_ratio) << ","
              << status << "\n";
    }

    if (args.output_path.empty()) out << table.str();
    else write_file(args.output_path, table.str());
    return any_fail ? kExitBenchFail : kExitOk;
}

} // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Finite-horizon Bayesian bandit solver and simulator"};
    app.require_subcommand(1);

    SolveArgs sa;
    CLI::App* solve = app.add_subcommand("solve", "Solve an instance to a solution file");
    solve->add_option("--instance", sa.instance_path, "Instance JSON file")->required();
    solve->add_option("--output", sa.output_path, "Solution JSON output (default stdout)");
    solve->add_option("--epsilon", sa.epsilon,
                      "Accuracy override (default: the instance's epsilon, 0.05)");
    solve->add_option("--regime", sa.regime, "Delayed-feedback regime: auto|small|large")
        ->check(CLI::IsMember({"auto", "small", "large"}));

    SimulateArgs ma;
    CLI::App* simulate =
        app.add_subcommand("simulate", "Estimate a solution's expected reward");
    simulate->add_option("--instance", ma.instance_path, "Instance JSON file")->required();
    simulate->add_option("--solution", ma.solution_path, "Solution JSON file")->required();
    simulate->add_option("--episodes", ma.episodes, "Monte Carlo episodes (default 100000)");
    simulate->add_option("--seed", ma.seed, "Master seed (default 0)");
    simulate->add_option("--threads", ma.threads, "Worker threads (default: hardware)");
    simulate->add_option("--output", ma.output_path, "Result JSON output (default stdout)");
    simulate->add_option("--csv", ma.csv_path, "Per-episode reward CSV output");

    BenchArgs ba;
    CLI::App* bench = app.add_subcommand("bench", "Run a suite of ratio checks");
    bench->add_option("--suite", ba.suite_path, "Suite JSON file")->required();
    bench->add_option("--episodes", ba.episodes, "Default episodes per entry");
    bench->add_option("--seed", ba.seed, "Default seed per entry");
    bench->add_option("--threads", ba.threads, "Worker threads (default: hardware)");
    bench->add_option("--output", ba.output_path, "Table CSV output (default stdout)");

    try {
        std::vector<std::string> rev(args.rbegin(), args.rend());
        app.parse(std::move(rev));
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n";
        return kExitInputError;
    }

    try {
        if (solve->parsed()) return cmd_solve(sa, out);
        if (simulate->parsed()) return cmd_simulate(ma, out);
        return cmd_bench(ba, out);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitInputError;
    }
}

} // namespace fhbandit::cli
