#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "scoreland/common.hpp"
#include "scoreland/distributions.hpp"
#include "scoreland/llsfe.hpp"
#include "scoreland/loss.hpp"
#include "scoreland/optimizer.hpp"
#include "scoreland/teacher.hpp"

namespace scoreland {

// Resolved experiment configuration. One struct serves every subcommand;
// unused knobs are ignored. The CSV writers echo the resolved values in a
// leading "# config:" comment block so outputs carry their provenance.
struct ExperimentConfig {
    std::string kind = "score-error";
    std::string dist_name = "gaussian";  // gaussian | mixture | laplace
    int dim = 2;
    int neurons = 2;
    double mixture_shift = 1.0;          // mixture means are +/- shift * 1_d
    double mixture_weight = 0.5;

    std::vector<int> sample_sizes = {128, 256, 512, 1024, 2048, 4096};
    int trials = 500;
    std::vector<double> percentiles = {95, 75, 50, 25, 5};

    // Bandwidth for estimator-driven runs: a fixed value, or the rate rule
    // h = n^{-1/(2p+2+d)} when bandwidth_rule == "rate".
    std::string bandwidth_rule = "fixed";
    double bandwidth = 0.8;

    // Teacher / loss / optimizer knobs.
    std::string activation = "relu";
    double noise_std = 0.0;
    double mu = 30.0;
    double lambda = 1000.0;
    std::string loss_sign = "auto";      // auto | pos | neg
    double lr = 5e-5;
    double lr_l2 = 5e-3;
    int iterations = 10000;
    int batch = 0;                       // 0 = full batch
    int record_every = 100;
    int train_n = 8192;
    int w_refresh = 100;                 // l2 baseline: recover_w cadence

    std::string query_mode = "random";   // random | fixed
    Vector query_point;

    int grad_check_instances = 5;
    int stein_samples = 100000;

    std::uint64_t seed = 1;
    std::string out_path;
};

InputDistribution make_distribution(const ExperimentConfig& cfg);
TeacherNet make_teacher(const ExperimentConfig& cfg);
double resolve_loss_sign(const ExperimentConfig& cfg);
double resolve_bandwidth(const ExperimentConfig& cfg, int n);

// --------------------------------------------------------------------------
// score-error: per-(n, trial) estimation errors at a query point, with
// percentile tables and fitted log-log slopes per order.
// --------------------------------------------------------------------------
struct ScoreErrorResult {
    ExperimentConfig config;
    std::vector<int> sample_sizes;
    // errors[order_index][n_index] = per-trial errors (order 2 then 4)
    std::vector<std::vector<std::vector<double>>> errors;
    std::vector<std::vector<int>> failures;  // [order? no: per n] estimator failures
    double slope2 = 0.0;
    double slope4 = 0.0;

    double median(int order_index, int n_index) const;
};

ScoreErrorResult run_score_error(const ExperimentConfig& cfg);
void write_score_error_csv(const ScoreErrorResult& result, std::ostream& out);

// --------------------------------------------------------------------------
// landscape-race: l2 vs G vs L trained from one shared random init.
// --------------------------------------------------------------------------
struct RaceResult {
    ExperimentConfig config;
    Trajectory l2;
    Trajectory gaussian;   // G: gaussian-assumed scores
    Trajectory matched;    // L: analytic scores for the true distribution
    std::vector<std::string> diverged;  // method names that hit NonFiniteLoss
};

RaceResult run_landscape_race(const ExperimentConfig& cfg);
void write_race_csv(const RaceResult& result, std::ostream& out);

// --------------------------------------------------------------------------
// train-llsfe: estimated-score loss vs the G baseline.
// --------------------------------------------------------------------------
struct TrainLlsfeResult {
    ExperimentConfig config;
    Trajectory llsfe;
    Trajectory gaussian;
    int estimator_failures = 0;
};

TrainLlsfeResult run_train_llsfe(const ExperimentConfig& cfg);
void write_train_llsfe_csv(const TrainLlsfeResult& result, std::ostream& out);

// --------------------------------------------------------------------------
// stein-check: Monte Carlo residual z-scores of the generalized Stein
// identity E[g(x) S_m(x)] = E[grad^m g(x)] for polynomial test functions.
// --------------------------------------------------------------------------
struct SteinRow {
    std::string distribution;
    std::string test_function;
    int order = 0;
    double max_abs_z = 0.0;
    int entries = 0;
};

struct SteinCheckResult {
    ExperimentConfig config;
    std::vector<SteinRow> rows;
    double worst_z = 0.0;
};

SteinCheckResult run_stein_check(const ExperimentConfig& cfg);
void write_stein_csv(const SteinCheckResult& result, std::ostream& out);

// --------------------------------------------------------------------------
// grad-check: analytic gradient vs central finite differences on random
// small instances.
// --------------------------------------------------------------------------
struct GradCheckResult {
    ExperimentConfig config;
    std::vector<double> max_rel_errors;  // one per instance
    double worst = 0.0;
};

GradCheckResult run_grad_check(const ExperimentConfig& cfg);
void write_grad_check_csv(const GradCheckResult& result, std::ostream& out);

// Shared helpers.
double percentile(std::vector<double> values, double pct);
double loglog_slope(const std::vector<double>& ns, const std::vector<double>& medians);

}  // namespace scoreland
