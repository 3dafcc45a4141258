// Experiment driver. Subcommands map onto the runners in
// scoreland/experiments.hpp; every flag can also come from a flat
// key=value config file (flags win over file values).
//
// Exit codes: 0 success, 1 configuration error, 2 numerical failure.

#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "scoreland/experiments.hpp"
#include "scoreland/parallel.hpp"

using namespace scoreland;

namespace {

struct CliState {
    ExperimentConfig cfg;
    std::string n_list;
    std::string percentiles;
    std::string batch = "full";
    std::string query = "random";
    std::string bandwidth = "0.8";
    std::string config_path;
    bool neurons_pinned = false;  // set by config file or flag
};

std::vector<std::string> split(const std::string& text, char sep) {
    std::vector<std::string> parts;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, sep)) parts.push_back(item);
    return parts;
}

void apply_n_list(CliState& state) {
    if (state.n_list.empty()) return;
    state.cfg.sample_sizes.clear();
    for (const auto& tok : split(state.n_list, ','))
        state.cfg.sample_sizes.push_back(std::stoi(tok));
}

void apply_percentiles(CliState& state) {
    if (state.percentiles.empty()) return;
    state.cfg.percentiles.clear();
    for (const auto& tok : split(state.percentiles, ','))
        state.cfg.percentiles.push_back(std::stod(tok));
}

void apply_batch(CliState& state) {
    if (state.batch == "full") {
        state.cfg.batch = 0;
        return;
    }
    state.cfg.batch = std::stoi(state.batch);
    if (state.cfg.batch < 1) throw ConfigError("--batch must be a positive count or 'full'");
}

void apply_query(CliState& state) {
    if (state.query == "random") {
        state.cfg.query_mode = "random";
        return;
    }
    if (state.query.rfind("fixed:", 0) == 0) {
        const auto parts = split(state.query.substr(6), ',');
        state.cfg.query_mode = "fixed";
        state.cfg.query_point = Vector(static_cast<int>(parts.size()));
        for (std::size_t i = 0; i < parts.size(); ++i)
            state.cfg.query_point(static_cast<int>(i)) = std::stod(parts[i]);
        return;
    }
    throw ConfigError("--query must be 'random' or 'fixed:<c0,c1,...>'");
}

void apply_bandwidth(CliState& state) {
    if (state.bandwidth == "rate") {
        state.cfg.bandwidth_rule = "rate";
        return;
    }
    state.cfg.bandwidth_rule = "fixed";
    state.cfg.bandwidth = std::stod(state.bandwidth);
}

// Flat key=value config file; '#' starts a comment. Keys mirror the long
// flag names. Values read here act as defaults: flags given on the command
// line override them.
void load_config_file(CliState& state, const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);

    const std::map<std::string, std::function<void(const std::string&)>> setters = {
        {"seed", [&](const std::string& v) { state.cfg.seed = std::stoull(v); }},
        {"out", [&](const std::string& v) { state.cfg.out_path = v; }},
        {"dist", [&](const std::string& v) { state.cfg.dist_name = v; }},
        {"dim", [&](const std::string& v) { state.cfg.dim = std::stoi(v); }},
        {"neurons",
         [&](const std::string& v) {
             state.cfg.neurons = std::stoi(v);
             state.neurons_pinned = true;
         }},
        {"n-list", [&](const std::string& v) { state.n_list = v; }},
        {"trials", [&](const std::string& v) { state.cfg.trials = std::stoi(v); }},
        {"percentiles", [&](const std::string& v) { state.percentiles = v; }},
        {"mu", [&](const std::string& v) { state.cfg.mu = std::stod(v); }},
        {"lambda", [&](const std::string& v) { state.cfg.lambda = std::stod(v); }},
        {"lr", [&](const std::string& v) { state.cfg.lr = std::stod(v); }},
        {"lr-l2", [&](const std::string& v) { state.cfg.lr_l2 = std::stod(v); }},
        {"iters", [&](const std::string& v) { state.cfg.iterations = std::stoi(v); }},
        {"batch", [&](const std::string& v) { state.batch = v; }},
        {"query", [&](const std::string& v) { state.query = v; }},
        {"bandwidth", [&](const std::string& v) { state.bandwidth = v; }},
        {"activation", [&](const std::string& v) { state.cfg.activation = v; }},
        {"noise-std", [&](const std::string& v) { state.cfg.noise_std = std::stod(v); }},
        {"loss-sign", [&](const std::string& v) { state.cfg.loss_sign = v; }},
        {"record-every", [&](const std::string& v) { state.cfg.record_every = std::stoi(v); }},
        {"train-n", [&](const std::string& v) { state.cfg.train_n = std::stoi(v); }},
        {"w-refresh", [&](const std::string& v) { state.cfg.w_refresh = std::stoi(v); }},
        {"mixture-shift", [&](const std::string& v) { state.cfg.mixture_shift = std::stod(v); }},
        {"mixture-weight", [&](const std::string& v) { state.cfg.mixture_weight = std::stod(v); }},
        {"stein-samples", [&](const std::string& v) { state.cfg.stein_samples = std::stoi(v); }},
        {"grad-instances", [&](const std::string& v) { state.cfg.grad_check_instances = std::stoi(v); }},
    };

    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos) continue;
        const auto last = line.find_last_not_of(" \t\r");
        line = line.substr(first, last - first + 1);
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config file line " + std::to_string(lineno) +
                              " is not key=value");
        const std::string key = line.substr(0, eq);
        const std::string value = line.substr(eq + 1);
        const auto it = setters.find(key);
        if (it == setters.end())
            throw ConfigError("unknown config key '" + key + "' (line " +
                              std::to_string(lineno) + ")");
        try {
            it->second(value);
        } catch (const ConfigError&) {
            throw;
        } catch (...) {
            throw ConfigError("bad value for config key '" + key + "': " + value);
        }
    }
}

void add_common_options(CLI::App* sub, CliState& state) {
    sub->add_option("--config", state.config_path, "flat key=value config file");
    sub->add_option("--seed", state.cfg.seed, "master seed");
    sub->add_option("--out", state.cfg.out_path, "output CSV path (default: stdout)");
    sub->add_option("--dist", state.cfg.dist_name, "gaussian|mixture|laplace");
    sub->add_option("--dim", state.cfg.dim, "input dimension d");
    sub->add_option("--neurons", state.cfg.neurons, "hidden width k");
    sub->add_option("--n-list", state.n_list, "comma-separated sample sizes");
    sub->add_option("--trials", state.cfg.trials, "trials per sample size");
    sub->add_option("--percentiles", state.percentiles, "comma-separated percentiles");
    sub->add_option("--mu", state.cfg.mu, "t2-term weight");
    sub->add_option("--lambda", state.cfg.lambda, "row-norm regularization weight");
    sub->add_option("--lr", state.cfg.lr, "learning rate for the tensor losses");
    sub->add_option("--lr-l2", state.cfg.lr_l2, "learning rate for the l2 baseline");
    sub->add_option("--iters", state.cfg.iterations, "gradient steps");
    sub->add_option("--batch", state.batch, "mini-batch size or 'full'");
    sub->add_option("--query", state.query, "'random' or 'fixed:<c0,c1,...>'");
    sub->add_option("--bandwidth", state.bandwidth, "kernel bandwidth, or 'rate'");
    sub->add_option("--activation", state.cfg.activation, "relu|softplus|quartic");
    sub->add_option("--noise-std", state.cfg.noise_std, "teacher label noise std");
    sub->add_option("--loss-sign", state.cfg.loss_sign, "auto|pos|neg tensor-term sign");
    sub->add_option("--record-every", state.cfg.record_every, "trajectory stride");
    sub->add_option("--train-n", state.cfg.train_n, "training sample size");
    sub->add_option("--w-refresh", state.cfg.w_refresh, "l2: recover_w cadence");
    sub->add_option("--mixture-shift", state.cfg.mixture_shift, "mixture mean magnitude");
    sub->add_option("--mixture-weight", state.cfg.mixture_weight, "mixture first weight");
    sub->add_option("--stein-samples", state.cfg.stein_samples, "stein-check MC size");
    sub->add_option("--grad-instances", state.cfg.grad_check_instances,
                    "grad-check instance count");
}

int run_with_output(const CliState& state,
                    const std::function<void(std::ostream&)>& writer,
                    const std::string& summary) {
    if (!state.cfg.out_path.empty()) {
        std::ofstream out(state.cfg.out_path, std::ios::binary);
        if (!out) throw ConfigError("cannot open output path: " + state.cfg.out_path);
        writer(out);
    } else {
        writer(std::cout);
    }
    if (!summary.empty()) std::cerr << summary;
    return 0;
}

std::string find_config_flag(int argc, char** argv) {
    for (int i = 1; i < argc; ++i) {
        const std::string arg = argv[i];
        if (arg == "--config" && i + 1 < argc) return argv[i + 1];
        if (arg.rfind("--config=", 0) == 0) return arg.substr(9);
    }
    return {};
}

}  // namespace

int main(int argc, char** argv) {
    par::apply_thread_cap();

    CLI::App app{"score-function estimation and landscape-designed training"};
    app.require_subcommand(1);

    CliState state;

    auto* score_error = app.add_subcommand(
        "score-error", "estimation-error percentiles vs sample size");
    auto* race = app.add_subcommand(
        "landscape-race", "l2 vs G vs L training from one shared init");
    auto* train_llsfe = app.add_subcommand(
        "train-llsfe", "training on the estimated-score loss vs the G baseline");
    auto* stein = app.add_subcommand(
        "stein-check", "Monte Carlo residuals of the generalized Stein identity");
    auto* grad = app.add_subcommand(
        "grad-check", "analytic gradient vs central finite differences");
    for (auto* sub : {score_error, race, train_llsfe, stein, grad})
        add_common_options(sub, state);

    try {
        // Precedence: subcommand defaults, then config-file values, then
        // command-line flags. The subcommand name is argv's first
        // non-flag token, so its defaults can be applied before parsing.
        std::string sub_name;
        for (int i = 1; i < argc; ++i) {
            if (argv[i][0] != '-') {
                sub_name = argv[i];
                break;
            }
        }
        if (sub_name == "landscape-race") {
            state.cfg.kind = "landscape-race";
            state.cfg.dist_name = "laplace";
            state.cfg.dim = 10;
            state.cfg.neurons = 10;
        } else if (sub_name == "train-llsfe") {
            state.cfg.kind = "train-llsfe";
            state.cfg.activation = "quartic";
            state.cfg.mu = 0.5;
            state.cfg.lambda = 2000.0;
            state.cfg.lr = 5e-6;
        } else if (sub_name == "stein-check") {
            state.cfg.kind = "stein-check";
        } else if (sub_name == "grad-check") {
            state.cfg.kind = "grad-check";
            state.cfg.dim = 3;
            state.cfg.neurons = 3;
            state.cfg.train_n = 64;
            state.cfg.mu = 2.0;
            state.cfg.lambda = 4.0;
        } else {
            state.cfg.kind = "score-error";
        }

        const std::string cfg_path = find_config_flag(argc, argv);
        if (!cfg_path.empty()) load_config_file(state, cfg_path);

        try {
            app.parse(argc, argv);
        } catch (const CLI::ParseError& e) {
            return app.exit(e) == 0 ? 0 : 1;
        }

        // The training protocols need square teachers; follow --dim unless
        // the width was pinned explicitly.
        for (auto* sub : {race, train_llsfe}) {
            if (sub->parsed() && !sub->count("--neurons") && !state.neurons_pinned)
                state.cfg.neurons = state.cfg.dim;
        }

        apply_n_list(state);
        apply_percentiles(state);
        apply_batch(state);
        apply_query(state);
        apply_bandwidth(state);

        if (score_error->parsed()) {
            const ScoreErrorResult r = run_score_error(state.cfg);
            std::ostringstream summary;
            summary << "slope(order 2) = " << r.slope2
                    << "  slope(order 4) = " << r.slope4 << "\n";
            return run_with_output(
                state, [&](std::ostream& o) { write_score_error_csv(r, o); },
                summary.str());
        }
        if (race->parsed()) {
            const RaceResult r = run_landscape_race(state.cfg);
            std::ostringstream summary;
            summary << "final e(A): L = " << r.matched.final_param_error()
                    << "  G = " << r.gaussian.final_param_error()
                    << "  l2 = " << r.l2.final_param_error() << "\n";
            for (const auto& m : r.diverged) summary << "diverged: " << m << "\n";
            return run_with_output(
                state, [&](std::ostream& o) { write_race_csv(r, o); }, summary.str());
        }
        if (train_llsfe->parsed()) {
            const TrainLlsfeResult r = run_train_llsfe(state.cfg);
            std::ostringstream summary;
            summary << "final e(A): Lhat = " << r.llsfe.final_param_error()
                    << "  G = " << r.gaussian.final_param_error()
                    << "  (estimator failures: " << r.estimator_failures << ")\n";
            return run_with_output(
                state, [&](std::ostream& o) { write_train_llsfe_csv(r, o); },
                summary.str());
        }
        if (stein->parsed()) {
            const SteinCheckResult r = run_stein_check(state.cfg);
            std::ostringstream summary;
            summary << "worst |z| = " << r.worst_z << "\n";
            return run_with_output(
                state, [&](std::ostream& o) { write_stein_csv(r, o); }, summary.str());
        }
        const GradCheckResult r = run_grad_check(state.cfg);
        std::ostringstream summary;
        summary << "worst max-rel-error = " << r.worst << "\n";
        return run_with_output(
            state, [&](std::ostream& o) { write_grad_check_csv(r, o); }, summary.str());
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const Error& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
