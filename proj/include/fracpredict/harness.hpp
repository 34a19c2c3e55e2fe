#ifndef FRACPREDICT_HARNESS_HPP
#define FRACPREDICT_HARNESS_HPP

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "fracpredict/continuous.hpp"
#include "fracpredict/exact.hpp"
#include "fracpredict/mlp.hpp"
#include "fracpredict/sampling.hpp"

namespace fracpredict {

enum class ProcessKind { Fbm, Integral, Fou, Fcir };
enum class Scale { Desk, Paper };

std::string to_string(ProcessKind p);
ProcessKind process_from_string(const std::string& s);

/// One table/figure experiment cell: process, observation layout, training
/// schedule, test-set size, seed.
struct ExperimentConfig {
    ProcessKind process = ProcessKind::Fbm;
    double hurst = 0.5;
    double s = 5.0;
    double horizon = 10.0;
    std::size_t n_obs = 32;          // N, observations at i*s/N
    std::size_t sim_refinement = 1;  // sim grid step = (s/N)/refinement
    // desk-scale training defaults; tail averaging damps the batch-mean offset
    // a truncated annealing schedule would otherwise leave in the network
    TrainingConfig train{300, 1024, 0.01, 0.95, 10, 0, 10.0,
                         TrainingConfig::Optimizer::Adam, 0.25};
    std::size_t n_test = 10000;
    std::vector<std::size_t> hidden{64, 64, 64};
    std::uint64_t seed = 0;

    double fou_k = 0.0, fou_a = 0.5, fou_sigma = 1.0, fou_a0 = 0.0;
    double fcir_lambda = 1.0, fcir_sigma = 2.0, fcir_r0 = 1.0;
    std::string integral_f = "t";  // "one" | "t"
    FouKernelVariant fou_variant = FouKernelVariant::ZArgument;

    void validate() const;
    TimeGrid observation_grid() const;
    TimeGrid simulation_grid() const;
    std::string echo() const;
};

struct MeMse {
    double me = 0.0;
    double mse = 0.0;
    double se_mse = 0.0;
    double se_me = 0.0;
};

/// ME = mean(target - prediction), MSE = mean((target - prediction)^2),
/// SE_of_MSE = sample SD of squared errors / sqrt(n).
MeMse evaluate_me_mse(std::span<const double> predictions, std::span<const double> targets);

struct MethodReport {
    std::string method;  // "NN" | "EXACT" | "CONTINUOUS"
    MeMse stats;
};

struct PredictionReport {
    std::vector<MethodReport> rows;
    std::string config_echo;
    double wall_seconds = 0.0;
    double theoretical = std::numeric_limits<double>::quiet_NaN();  // identity transforms only

    const MethodReport* find(const std::string& method) const;
};

/// Simulate a training stream and train the network, build the exact (and,
/// where defined, continuous) predictors, evaluate everything on a fresh test
/// set. Fully deterministic given the config seed.
PredictionReport run_experiment(const ExperimentConfig& config);

namespace harness_detail {

/// run_experiment plus the per-path predictions, for paired-error analysis.
struct DetailedResult {
    PredictionReport report;
    Vector targets;
    std::map<std::string, Vector> predictions;
    std::vector<LossTracePoint> trace;
    MlpNetwork net;
};

DetailedResult run_experiment_detailed(const ExperimentConfig& config);

}  // namespace harness_detail

void write_report_csv(const PredictionReport& report, std::ostream& out);

enum class TableId { Table1, Table2, Table3, Table4 };

/// One CSV row per table cell with the NN predictor's ME/MSE/SE columns.
/// Cells that error emit a status column instead of aborting the sweep.
void run_table_sweep(TableId table, Scale scale, std::uint64_t seed, std::ostream& out);

/// One fine path; exact discrete predictors on nested observation subsets vs
/// the continuous-observation predictor evaluated on the full path.
void run_convergence_study(ProcessKind process, double hurst, double s, double horizon,
                           std::span<const std::size_t> n_list, std::uint64_t seed,
                           FouKernelVariant variant, std::ostream& out);

/// Figure-1 style sweep over horizons: mse_exact vs mse_nn with the paired
/// difference and its standard error.
void compare_exact_vs_nn(const ExperimentConfig& base, std::span<const double> horizons,
                         std::ostream& out);

/// Human-readable `key = value` config files; '#' starts a comment.
std::map<std::string, std::string> parse_config_kv(std::istream& in);
void apply_config_kv(const std::map<std::string, std::string>& kv, ExperimentConfig& config);

}  // namespace fracpredict

#endif
