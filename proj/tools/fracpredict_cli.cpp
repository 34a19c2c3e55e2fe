// Experiment CLI: simulate paths, build predictors, train networks, and run
// the table/figure reproductions. See README.md for usage.
#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "fracpredict/harness.hpp"
#include "fracpredict/pathio.hpp"

using namespace fracpredict;

namespace {

struct GlobalArgs {
    std::string config_path;
    std::string out_dir = ".";
    std::uint64_t seed = 0;
    bool seed_set = false;
    std::string scale = "desk";
};

ExperimentConfig load_config(const GlobalArgs& g) {
    ExperimentConfig cfg;
    if (!g.config_path.empty()) {
        std::ifstream in(g.config_path);
        if (!in) throw ConfigError("cannot open config file " + g.config_path);
        apply_config_kv(parse_config_kv(in), cfg);
    }
    if (g.seed_set) cfg.seed = g.seed;
    return cfg;
}

std::filesystem::path out_path(const GlobalArgs& g, const std::string& name) {
    std::filesystem::create_directories(g.out_dir);
    return std::filesystem::path(g.out_dir) / name;
}

Scale parse_scale(const std::string& s) {
    if (s == "desk") return Scale::Desk;
    if (s == "paper") return Scale::Paper;
    throw ConfigError("scale must be desk|paper");
}

void add_globals(CLI::App* cmd, GlobalArgs& g) {
    cmd->add_option("--config", g.config_path, "key = value config file");
    cmd->add_option("--seed", g.seed, "master seed")->each([&](const std::string&) {
        g.seed_set = true;
    });
    cmd->add_option("--out", g.out_dir, "output directory (default .)");
    cmd->add_option("--scale", g.scale, "desk|paper (default desk)");
}

int run(int argc, char** argv) {
    CLI::App app{"fracpredict: prediction of fractional path-dependent processes"};
    app.require_subcommand(1);
    GlobalArgs g;

    std::size_t n_paths = 10;
    std::string format = "csv";
    std::string path_file;
    std::string n_list_arg = "16,32,64,128,256,512,1024";
    std::string horizons_arg = "6,8,10";
    int table_no = 1;

    auto* simulate = app.add_subcommand("simulate", "simulate a path batch on the config grid");
    add_globals(simulate, g);
    simulate->add_option("--n-paths", n_paths, "number of paths (default 10)");
    simulate->add_option("--format", format, "csv|fpb1 (default csv)");

    auto* predict_exact =
        app.add_subcommand("predict-exact", "build the optimal predictor, export weights");
    add_globals(predict_exact, g);

    auto* predict_continuous = app.add_subcommand(
        "predict-continuous", "tabulate the continuous-observation weight function");
    add_globals(predict_continuous, g);
    predict_continuous->add_option("--path", path_file,
                                   "evaluate the prediction on paths from this FPB1 file");

    auto* train_cmd = app.add_subcommand("train", "train the network, save it with its loss trace");
    add_globals(train_cmd, g);

    auto* evaluate = app.add_subcommand("evaluate", "train and compare NN/EXACT/CONTINUOUS");
    add_globals(evaluate, g);

    auto* table = app.add_subcommand("table", "run a table sweep (1-4)");
    add_globals(table, g);
    table->add_option("number", table_no, "table number 1-4")->required();

    auto* convergence =
        app.add_subcommand("convergence", "discrete vs continuous predictions on one path");
    add_globals(convergence, g);
    convergence->add_option("--n-list", n_list_arg, "comma-separated observation counts");

    auto* compare = app.add_subcommand("compare", "exact vs NN MSE over horizons");
    add_globals(compare, g);
    compare->add_option("--horizons", horizons_arg, "comma-separated horizon list");

    CLI11_PARSE(app, argc, argv);

    const ExperimentConfig cfg = load_config(g);

    if (simulate->parsed()) {
        cfg.validate();
        const TimeGrid grid = cfg.simulation_grid();
        const PathBatch batch = [&] {
            switch (cfg.process) {
                case ProcessKind::Fbm:
                    return sample_fbm(HurstIndex(cfg.hurst), grid, n_paths, cfg.seed);
                case ProcessKind::Integral: {
                    if (cfg.integral_f == "one")
                        return sample_integral_process([](double) { return 1.0; },
                                                       HurstIndex(cfg.hurst), grid, n_paths,
                                                       cfg.seed);
                    return sample_integral_process([](double u) { return u; },
                                                   HurstIndex(cfg.hurst), grid, n_paths, cfg.seed);
                }
                case ProcessKind::Fou:
                    return sample_fou(FouCoeffs::constants(cfg.fou_k, cfg.fou_a, cfg.fou_sigma),
                                      cfg.fou_a0, HurstIndex(cfg.hurst), grid, n_paths, cfg.seed);
                case ProcessKind::Fcir:
                    return sample_fcir(cfg.fcir_lambda, cfg.fcir_sigma, cfg.fcir_r0,
                                       HurstIndex(cfg.hurst), grid, n_paths, cfg.seed);
            }
            throw ConfigError("unknown process");
        }();
        if (format == "fpb1") {
            std::ofstream out(out_path(g, "paths.fpb1"), std::ios::binary);
            export_paths_fpb1(batch, out);
            std::cout << "wrote " << out_path(g, "paths.fpb1").string() << "\n";
        } else if (format == "csv") {
            std::ofstream out(out_path(g, "paths.csv"));
            export_paths_csv(batch, out);
            std::cout << "wrote " << out_path(g, "paths.csv").string() << "\n";
        } else {
            throw ConfigError("format must be csv|fpb1");
        }
        return 0;
    }

    if (predict_exact->parsed()) {
        cfg.validate();
        const TimeGrid sim = cfg.simulation_grid();
        const TimeGrid obs = cfg.observation_grid();
        const HurstIndex h(cfg.hurst);
        const ExactPredictor pred = [&] {
            switch (cfg.process) {
                case ProcessKind::Fbm:
                    return build_fbm_predictor(h, obs, cfg.horizon);
                case ProcessKind::Integral: {
                    auto f = (cfg.integral_f == "one")
                                 ? std::function<double(double)>([](double) { return 1.0; })
                                 : std::function<double(double)>([](double u) { return u; });
                    return build_integral_predictor(f, h, obs, cfg.horizon, sim);
                }
                case ProcessKind::Fou:
                    return build_fou_predictor(
                        FouCoeffs::constants(cfg.fou_k, cfg.fou_a, cfg.fou_sigma), cfg.fou_a0, h,
                        obs, cfg.horizon, sim);
                case ProcessKind::Fcir:
                    return build_fcir_predictor(cfg.fcir_lambda, cfg.fcir_sigma, cfg.fcir_r0, h,
                                                obs, cfg.horizon, sim);
            }
            throw ConfigError("unknown process");
        }();
        std::ofstream out(out_path(g, "weights.csv"));
        export_weights_csv(pred, out);
        std::cout << "wrote " << out_path(g, "weights.csv").string() << "\n";
        if (pred.transform == ExactPredictor::Transform::Identity)
            std::cout << "theoretical_mse " << theoretical_mse(pred) << "\n";
        return 0;
    }

    if (predict_continuous->parsed()) {
        cfg.validate();
        const TimeGrid sim = cfg.simulation_grid();
        const TimeGrid obs = cfg.observation_grid();
        ContinuousPredictorConfig cc(obs.last(), cfg.horizon, HurstIndex(cfg.hurst));
        cc.fou_kernel_variant = cfg.fou_variant;
        cc.fou_decay = cfg.fou_a;
        const bool fou = cfg.process == ProcessKind::Fou;
        if (!fou && cfg.process != ProcessKind::Fbm)
            throw ConfigError("predict-continuous covers fbm and fou only");
        const PsiTable table_psi = fou ? tabulate_psi_fou(sim, cc) : tabulate_psi_fbm(sim, cc);
        std::ofstream out(out_path(g, "psi.csv"));
        export_psi_table_csv(sim, table_psi, out);
        std::cout << "wrote " << out_path(g, "psi.csv").string() << "\n";
        if (!path_file.empty()) {
            std::ifstream in(path_file, std::ios::binary);
            if (!in) throw ConfigError("cannot open path file " + path_file);
            const PathBatch batch = import_paths_fpb1(in);
            for (std::size_t p = 0; p < batch.n_paths; ++p) {
                const double value =
                    fou ? predict_fou_continuous(batch.path(p), batch.grid, table_psi, cc)
                        : predict_fbm_continuous(batch.path(p), table_psi);
                std::cout << "path " << p << " prediction " << value << "\n";
            }
        }
        return 0;
    }

    if (train_cmd->parsed() || evaluate->parsed()) {
        const auto detail = harness_detail::run_experiment_detailed(cfg);
        {
            std::ofstream out(out_path(g, "loss.csv"));
            export_loss_trace_csv(detail.trace, out);
        }
        if (evaluate->parsed()) {
            std::ofstream out(out_path(g, "report.csv"));
            write_report_csv(detail.report, out);
            std::cout << "wrote " << out_path(g, "report.csv").string() << "\n";
            for (const auto& row : detail.report.rows)
                std::cout << row.method << " me " << row.stats.me << " mse " << row.stats.mse
                          << " se " << row.stats.se_mse << "\n";
        } else {
            std::ofstream out(out_path(g, "network.fpnn1"), std::ios::binary);
            save_network(detail.net, out);
            std::cout << "wrote " << out_path(g, "network.fpnn1").string() << " and "
                      << out_path(g, "loss.csv").string() << "\n";
        }
        return 0;
    }

    if (table->parsed()) {
        if (table_no < 1 || table_no > 4) throw ConfigError("table number must be 1-4");
        const std::string name = "table" + std::to_string(table_no) + ".csv";
        std::ofstream out(out_path(g, name));
        run_table_sweep(static_cast<TableId>(table_no - 1), parse_scale(g.scale),
                        g.seed_set ? g.seed : cfg.seed, out);
        std::cout << "wrote " << out_path(g, name).string() << "\n";
        return 0;
    }

    if (convergence->parsed()) {
        std::vector<std::size_t> n_list;
        std::stringstream ss(n_list_arg);
        std::string cell;
        while (std::getline(ss, cell, ',')) n_list.push_back(std::stoul(cell));
        std::ofstream out(out_path(g, "convergence.csv"));
        run_convergence_study(cfg.process, cfg.hurst, cfg.s, cfg.horizon, n_list, cfg.seed,
                              cfg.fou_variant, out);
        std::cout << "wrote " << out_path(g, "convergence.csv").string() << "\n";
        return 0;
    }

    if (compare->parsed()) {
        std::vector<double> horizons;
        std::stringstream ss(horizons_arg);
        std::string cell;
        while (std::getline(ss, cell, ',')) horizons.push_back(std::stod(cell));
        std::ofstream out(out_path(g, "compare.csv"));
        compare_exact_vs_nn(cfg, horizons, out);
        std::cout << "wrote " << out_path(g, "compare.csv").string() << "\n";
        return 0;
    }

    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const DomainError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const Error& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
}
