#include "fracpredict/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>

#include "fracpredict/parallel.hpp"
#include "fracpredict/rng.hpp"

namespace fracpredict {

namespace {

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string fmt_short(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%g", v);
    return buf;
}

std::string sanitize_status(std::string s) {
    for (char& c : s)
        if (c == ',' || c == '\n' || c == '\r') c = ';';
    return s;
}

std::function<double(double)> make_integrand(const std::string& name) {
    if (name == "one") return [](double) { return 1.0; };
    if (name == "t") return [](double u) { return u; };
    throw ConfigError("unknown integral_f '" + name + "' (expected one|t)");
}

struct Timer {
    std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    }
};

PathBatch simulate_process(const ExperimentConfig& cfg, const TimeGrid& grid, std::size_t n_paths,
                           std::uint64_t seed) {
    const HurstIndex h(cfg.hurst);
    switch (cfg.process) {
        case ProcessKind::Fbm:
            return sample_fbm(h, grid, n_paths, seed);
        case ProcessKind::Integral:
            return sample_integral_process(make_integrand(cfg.integral_f), h, grid, n_paths, seed);
        case ProcessKind::Fou:
            return sample_fou(FouCoeffs::constants(cfg.fou_k, cfg.fou_a, cfg.fou_sigma), cfg.fou_a0,
                              h, grid, n_paths, seed);
        case ProcessKind::Fcir:
            return sample_fcir(cfg.fcir_lambda, cfg.fcir_sigma, cfg.fcir_r0, h, grid, n_paths, seed);
    }
    throw ConfigError("unknown process kind");
}

ExactPredictor build_exact(const ExperimentConfig& cfg, const TimeGrid& obs,
                           const TimeGrid& sim) {
    const HurstIndex h(cfg.hurst);
    const double horizon = cfg.horizon;
    switch (cfg.process) {
        case ProcessKind::Fbm:
            return build_fbm_predictor(h, obs, horizon);
        case ProcessKind::Integral:
            return build_integral_predictor(make_integrand(cfg.integral_f), h, obs, horizon, sim);
        case ProcessKind::Fou:
            return build_fou_predictor(FouCoeffs::constants(cfg.fou_k, cfg.fou_a, cfg.fou_sigma),
                                       cfg.fou_a0, h, obs, horizon, sim);
        case ProcessKind::Fcir:
            return build_fcir_predictor(cfg.fcir_lambda, cfg.fcir_sigma, cfg.fcir_r0, h, obs,
                                        horizon, sim);
    }
    throw ConfigError("unknown process kind");
}

bool continuous_defined(const ExperimentConfig& cfg) {
    if (cfg.process == ProcessKind::Fbm) return true;
    // the continuous fOU formula covers the centered exponential-kernel case
    return cfg.process == ProcessKind::Fou && cfg.fou_k == 0.0 && cfg.fou_a0 == 0.0;
}

}  // namespace

std::string to_string(ProcessKind p) {
    switch (p) {
        case ProcessKind::Fbm: return "fbm";
        case ProcessKind::Integral: return "integral";
        case ProcessKind::Fou: return "fou";
        case ProcessKind::Fcir: return "fcir";
    }
    return "?";
}

ProcessKind process_from_string(const std::string& s) {
    if (s == "fbm") return ProcessKind::Fbm;
    if (s == "integral") return ProcessKind::Integral;
    if (s == "fou") return ProcessKind::Fou;
    if (s == "fcir") return ProcessKind::Fcir;
    throw ConfigError("unknown process '" + s + "' (expected fbm|integral|fou|fcir)");
}

void ExperimentConfig::validate() const {
    (void)HurstIndex(hurst);
    if (!(0.0 < s && s < horizon)) throw ConfigError("config: need 0 < s < horizon");
    if (n_obs < 1) throw ConfigError("config: N must be >= 1");
    if (sim_refinement < 1) throw ConfigError("config: sim_refinement must be >= 1");
    if (n_test < 100) throw ConfigError("config: n_test must be >= 100");
    const double step = s / static_cast<double>(n_obs * sim_refinement);
    const double ratio = horizon / step;
    if (std::abs(ratio - std::llround(ratio)) > 1e-9 * std::max(1.0, ratio))
        throw ConfigError("config: horizon must be a whole number of simulation steps");
}

TimeGrid ExperimentConfig::simulation_grid() const {
    const double step = s / static_cast<double>(n_obs * sim_refinement);
    const auto n_steps = static_cast<std::size_t>(std::llround(horizon / step));
    return TimeGrid::regular(horizon, n_steps);
}

TimeGrid ExperimentConfig::observation_grid() const {
    const TimeGrid sim = simulation_grid();
    std::vector<double> pts(n_obs);
    for (std::size_t i = 1; i <= n_obs; ++i) pts[i - 1] = sim[i * sim_refinement];
    return TimeGrid(std::move(pts));
}

std::string ExperimentConfig::echo() const {
    std::ostringstream os;
    os << "process=" << to_string(process) << " h=" << fmt_short(hurst) << " s=" << fmt_short(s)
       << " T=" << fmt_short(horizon) << " N=" << n_obs << " sim_refinement=" << sim_refinement
       << " n_batches=" << train.n_batches << " batch_size=" << train.batch_size
       << " lr=" << fmt_short(train.lr_initial) << " n_test=" << n_test << " arch=";
    for (std::size_t i = 0; i < hidden.size(); ++i) os << (i ? "x" : "") << hidden[i];
    os << " seed=" << seed;
    switch (process) {
        case ProcessKind::Fou:
            os << " fou_k=" << fmt_short(fou_k) << " fou_a=" << fmt_short(fou_a)
               << " fou_sigma=" << fmt_short(fou_sigma) << " fou_a0=" << fmt_short(fou_a0);
            break;
        case ProcessKind::Fcir:
            os << " fcir_lambda=" << fmt_short(fcir_lambda)
               << " fcir_sigma=" << fmt_short(fcir_sigma) << " fcir_r0=" << fmt_short(fcir_r0);
            break;
        case ProcessKind::Integral:
            os << " integral_f=" << integral_f;
            break;
        default:
            break;
    }
    return os.str();
}

MeMse evaluate_me_mse(std::span<const double> predictions, std::span<const double> targets) {
    if (predictions.size() != targets.size())
        throw ShapeError("evaluate_me_mse: length mismatch");
    if (predictions.empty()) throw DomainError("evaluate_me_mse: empty input");
    const std::size_t n = predictions.size();
    double sum_e = 0.0, sum_sq = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double e = targets[i] - predictions[i];
        sum_e += e;
        sum_sq += e * e;
    }
    MeMse out;
    out.me = sum_e / static_cast<double>(n);
    out.mse = sum_sq / static_cast<double>(n);
    if (n > 1) {
        double var_sq = 0.0, var_e = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double e = targets[i] - predictions[i];
            var_sq += (e * e - out.mse) * (e * e - out.mse);
            var_e += (e - out.me) * (e - out.me);
        }
        out.se_mse = std::sqrt(var_sq / static_cast<double>(n - 1) / static_cast<double>(n));
        out.se_me = std::sqrt(var_e / static_cast<double>(n - 1) / static_cast<double>(n));
    }
    return out;
}

const MethodReport* PredictionReport::find(const std::string& method) const {
    for (const auto& r : rows)
        if (r.method == method) return &r;
    return nullptr;
}

namespace harness_detail {

DetailedResult run_experiment_detailed(const ExperimentConfig& cfg) {
    cfg.validate();
    Timer timer;
    const TimeGrid sim = cfg.simulation_grid();
    const TimeGrid obs = cfg.observation_grid();
    const HurstIndex h(cfg.hurst);

    ExactPredictor exact = build_exact(cfg, obs, sim);

    // network over raw observation vectors
    std::vector<std::size_t> widths;
    widths.push_back(cfg.n_obs);
    widths.insert(widths.end(), cfg.hidden.begin(), cfg.hidden.end());
    widths.push_back(1);
    MlpNetwork net = mlp_init(widths, derive_seed(cfg.seed, stream_purpose::kInit));

    const auto obs_points = obs.points();
    const BatchGenerator generator = [&](std::size_t b, Matrix& x, Vector& y) {
        const PathBatch batch = simulate_process(
            cfg, sim, x.rows(), derive_seed(cfg.seed, stream_purpose::kTrain, b));
        auto [observed, target] = subsample(batch, obs_points, cfg.horizon);
        for (std::size_t p = 0; p < x.rows(); ++p) {
            const auto row = observed.row(p);
            std::copy(row.begin(), row.end(), x.data() + p * x.cols());
        }
        y = std::move(target);
    };
    TrainResult trained = train(std::move(net), cfg.train, generator);

    const PathBatch test =
        simulate_process(cfg, sim, cfg.n_test, derive_seed(cfg.seed, stream_purpose::kTest));
    auto [observed, targets] = subsample(test, obs_points, cfg.horizon);

    DetailedResult result;
    result.targets = targets;
    result.trace = std::move(trained.trace);

    Vector nn(cfg.n_test), ex(cfg.n_test);
    parallel_for(cfg.n_test, [&](std::size_t i) { nn[i] = trained.net.forward(observed.row(i)); });
    for (std::size_t i = 0; i < cfg.n_test; ++i) {
        try {
            ex[i] = exact.predict(observed.row(i));
        } catch (const OrthantCaseRequired&) {
            ex[i] = fcir_predict_orthant_mc(cfg.fcir_lambda, cfg.fcir_sigma, cfg.fcir_r0, h, obs,
                                            observed.row(i), cfg.horizon, sim, 20000,
                                            derive_seed(cfg.seed, stream_purpose::kOrthant, i))
                        .value;
        }
    }
    result.predictions["NN"] = std::move(nn);
    result.predictions["EXACT"] = std::move(ex);

    if (continuous_defined(cfg)) {
        ContinuousPredictorConfig cc(obs.last(), cfg.horizon, h);
        cc.fou_kernel_variant = cfg.fou_variant;
        cc.fou_decay = cfg.fou_a;
        cc.fou_sigma = cfg.fou_sigma;
        Vector ct(cfg.n_test);
        if (cfg.process == ProcessKind::Fbm) {
            const PsiTable table = tabulate_psi_fbm(sim, cc);
            parallel_for(cfg.n_test,
                         [&](std::size_t i) { ct[i] = predict_fbm_continuous(test.path(i), table); });
        } else {
            const PsiTable table = tabulate_psi_fou(sim, cc);
            parallel_for(cfg.n_test, [&](std::size_t i) {
                ct[i] = predict_fou_continuous(test.path(i), sim, table, cc);
            });
        }
        result.predictions["CONTINUOUS"] = std::move(ct);
    }

    result.report.config_echo = cfg.echo();
    if (exact.transform == ExactPredictor::Transform::Identity)
        result.report.theoretical = theoretical_mse(exact);
    for (const char* method : {"NN", "EXACT", "CONTINUOUS"}) {
        auto it = result.predictions.find(method);
        if (it == result.predictions.end()) continue;
        result.report.rows.push_back({method, evaluate_me_mse(it->second, result.targets)});
    }
    result.report.wall_seconds = timer.seconds();
    result.net = std::move(trained.net);
    return result;
}

}  // namespace harness_detail

PredictionReport run_experiment(const ExperimentConfig& cfg) {
    return harness_detail::run_experiment_detailed(cfg).report;
}

void write_report_csv(const PredictionReport& report, std::ostream& out) {
    out << "# config: " << report.config_echo << "\n";
    out << "# theoretical_mse: " << fmt(report.theoretical) << "\n";
    out << "method,me,se_me,mse,se_mse\n";
    for (const auto& r : report.rows)
        out << r.method << "," << fmt(r.stats.me) << "," << fmt(r.stats.se_me) << ","
            << fmt(r.stats.mse) << "," << fmt(r.stats.se_mse) << "\n";
    out << "# walltime_seconds: " << report.wall_seconds << "\n";
}

namespace {

struct SweepAxes {
    std::vector<double> s_values;
    std::vector<double> h_values;
    std::vector<std::size_t> n_values;
    std::vector<double> t_values;  // Table 2/4
    bool horizon_axis = false;
};

SweepAxes table_axes(TableId table, Scale scale) {
    SweepAxes a;
    a.h_values = {0.1, 0.3, 0.5, 0.7, 0.9};
    const bool horizon_table = (table == TableId::Table2 || table == TableId::Table4);
    if (horizon_table) {
        a.horizon_axis = true;
        a.s_values = {5.0};
        if (scale == Scale::Desk) {
            a.n_values = {32};
            a.t_values = {6.0, 8.0, 10.0};
        } else {
            a.n_values = {4096};
            a.h_values = {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};
            for (double t = 5.5; t < 10.01; t += 0.5) a.t_values.push_back(t);
        }
    } else {
        a.s_values = {2.0, 5.0, 8.0};
        if (scale == Scale::Desk) {
            a.n_values = {16, 32, 64};
        } else {
            for (std::size_t n = 512; n <= 65536; n *= 2) a.n_values.push_back(n);
        }
    }
    return a;
}

/// Smallest refinement multiple making the horizon land on the simulation
/// grid (horizon / ((s/N)/r) integral).
std::size_t refinement_for(double s, std::size_t n_obs, double horizon, std::size_t base) {
    for (std::size_t r = base; r <= 64 * base; ++r) {
        const double steps = horizon * static_cast<double>(n_obs * r) / s;
        if (std::abs(steps - std::llround(steps)) < 1e-9 * std::max(1.0, steps)) return r;
    }
    throw ConfigError("no simulation refinement fits the horizon " + std::to_string(horizon));
}

ExperimentConfig sweep_cell_config(TableId table, Scale scale) {
    ExperimentConfig cfg;
    cfg.process =
        (table == TableId::Table1 || table == TableId::Table2) ? ProcessKind::Fbm : ProcessKind::Fou;
    cfg.fou_k = 0.0;
    cfg.fou_a = 0.5;
    cfg.fou_sigma = 1.0;
    cfg.fou_a0 = 0.0;
    cfg.horizon = 10.0;
    if (scale == Scale::Desk) {
        cfg.train.n_batches = 300;
        cfg.train.batch_size = 1024;
    } else {
        cfg.train.n_batches = 3000;
        cfg.train.batch_size = 4096;
    }
    cfg.n_test = 10000;
    return cfg;
}

}  // namespace

void run_table_sweep(TableId table, Scale scale, std::uint64_t seed, std::ostream& out) {
    const SweepAxes axes = table_axes(table, scale);
    ExperimentConfig base = sweep_cell_config(table, scale);
    const int table_no = static_cast<int>(table) + 1;
    Timer timer;

    out << "# config: table=" << table_no << " scale=" << (scale == Scale::Desk ? "desk" : "paper")
        << " seed=" << seed << " process=" << to_string(base.process)
        << " train=" << base.train.n_batches << "x" << base.train.batch_size
        << " n_test=" << base.n_test << "\n";
    if (scale == Scale::Desk)
        out << "# config: desk-scale mapping: N in {16,32,64} (paper 2^9..2^16), 300 batches of "
               "1024 (paper 3000 of 4096), horizon axis reduced to {6,8,10}\n";

    std::size_t cell_index = 0;
    if (axes.horizon_axis) {
        out << "h,t,me,se_me,mse,se_mse,status\n";
        for (double hv : axes.h_values)
            for (double tv : axes.t_values) {
                ExperimentConfig cfg = base;
                cfg.hurst = hv;
                cfg.s = 5.0;
                cfg.horizon = tv;
                cfg.n_obs = axes.n_values[0];
                cfg.sim_refinement = refinement_for(cfg.s, cfg.n_obs, tv, cfg.sim_refinement);
                cfg.seed = derive_seed(seed, stream_purpose::kSweepCell, cell_index++);
                out << fmt_short(hv) << "," << fmt_short(tv) << ",";
                try {
                    const PredictionReport rep = run_experiment(cfg);
                    const MethodReport* nn = rep.find("NN");
                    out << fmt(nn->stats.me) << "," << fmt(nn->stats.se_me) << ","
                        << fmt(nn->stats.mse) << "," << fmt(nn->stats.se_mse) << ",ok\n";
                } catch (const Error& e) {
                    out << "nan,nan,nan,nan," << sanitize_status(e.what()) << "\n";
                }
            }
    } else {
        out << "s,h,n,me,se_me,mse,se_mse,status\n";
        for (double sv : axes.s_values)
            for (double hv : axes.h_values)
                for (std::size_t nv : axes.n_values) {
                    ExperimentConfig cfg = base;
                    cfg.s = sv;
                    cfg.hurst = hv;
                    cfg.n_obs = nv;
                    cfg.seed = derive_seed(seed, stream_purpose::kSweepCell, cell_index++);
                    out << fmt_short(sv) << "," << fmt_short(hv) << "," << nv << ",";
                    try {
                        const PredictionReport rep = run_experiment(cfg);
                        const MethodReport* nn = rep.find("NN");
                        out << fmt(nn->stats.me) << "," << fmt(nn->stats.se_me) << ","
                            << fmt(nn->stats.mse) << "," << fmt(nn->stats.se_mse) << ",ok\n";
                    } catch (const Error& e) {
                        out << "nan,nan,nan,nan," << sanitize_status(e.what()) << "\n";
                    }
                }
    }
    out << "# walltime_seconds: " << timer.seconds() << "\n";
}

void run_convergence_study(ProcessKind process, double hurst, double s, double horizon,
                           std::span<const std::size_t> n_list, std::uint64_t seed,
                           FouKernelVariant variant, std::ostream& out) {
    if (process != ProcessKind::Fbm && process != ProcessKind::Fou)
        throw ConfigError("convergence study covers fbm and fou only");
    if (n_list.empty()) throw ConfigError("convergence study: empty N list");
    for (std::size_t i = 1; i < n_list.size(); ++i)
        if (n_list[i] <= n_list[i - 1]) throw ConfigError("convergence study: N list must increase");

    const HurstIndex h(hurst);
    const std::size_t max_n = n_list.back();
    const std::size_t refine = 4;
    const double step = s / static_cast<double>(max_n * refine);
    const double ratio = horizon / step;
    if (std::abs(ratio - std::llround(ratio)) > 1e-9 * std::max(1.0, ratio))
        throw ConfigError("convergence study: horizon must be a whole number of steps");
    const TimeGrid grid = TimeGrid::regular(horizon, static_cast<std::size_t>(std::llround(ratio)));
    const std::size_t s_steps = max_n * refine;

    PathBatch batch = (process == ProcessKind::Fbm)
                          ? sample_fbm(h, grid, 1, seed)
                          : sample_fou(FouCoeffs::constants(0.0, 0.5, 1.0), 0.0, h, grid, 1, seed);
    const auto path = batch.path(0);

    ContinuousPredictorConfig cc(grid[s_steps], horizon, h);
    cc.fou_kernel_variant = variant;
    const double continuous = (process == ProcessKind::Fbm)
                                  ? predict_fbm_continuous(path, grid, cc)
                                  : predict_fou_continuous(path, grid, cc);

    out << "# config: convergence process=" << to_string(process) << " h=" << fmt_short(hurst)
        << " s=" << fmt_short(s) << " T=" << fmt_short(horizon) << " seed=" << seed
        << " refine=" << refine << " variant="
        << (variant == FouKernelVariant::ZArgument ? "z_argument" : "as_written") << "\n";
    out << "n,discrete_prediction,continuous_prediction,gap\n";
    for (std::size_t n : n_list) {
        if (s_steps % n != 0)
            throw ConfigError("convergence study: every N must divide the fine grid");
        const std::size_t stride = s_steps / n;
        std::vector<double> pts(n);
        Vector values(n);
        for (std::size_t i = 1; i <= n; ++i) {
            pts[i - 1] = grid[i * stride];
            values[i - 1] = path[i * stride];
        }
        const TimeGrid obs(pts);
        const ExactPredictor pred =
            (process == ProcessKind::Fbm)
                ? build_fbm_predictor(h, obs, horizon)
                : build_fou_predictor(FouCoeffs::constants(0.0, 0.5, 1.0), 0.0, h, obs, horizon,
                                      grid);
        const double discrete = pred.predict(values);
        out << n << "," << fmt(discrete) << "," << fmt(continuous) << ","
            << fmt(std::abs(discrete - continuous)) << "\n";
    }
}

void compare_exact_vs_nn(const ExperimentConfig& base, std::span<const double> horizons,
                         std::ostream& out) {
    if (horizons.empty()) throw ConfigError("compare: empty horizon list");
    out << "# config: compare " << base.echo() << "\n";
    out << "t,mse_exact,se_exact,mse_nn,se_nn,difference,se_difference\n";
    for (std::size_t idx = 0; idx < horizons.size(); ++idx) {
        ExperimentConfig cfg = base;
        cfg.horizon = horizons[idx];
        cfg.sim_refinement = refinement_for(cfg.s, cfg.n_obs, cfg.horizon, cfg.sim_refinement);
        cfg.seed = derive_seed(base.seed, stream_purpose::kSweepCell, idx);
        const auto detail = harness_detail::run_experiment_detailed(cfg);
        const Vector& nn = detail.predictions.at("NN");
        const Vector& ex = detail.predictions.at("EXACT");
        const MeMse m_nn = evaluate_me_mse(nn, detail.targets);
        const MeMse m_ex = evaluate_me_mse(ex, detail.targets);
        // paired per-path difference of squared errors
        const std::size_t n = detail.targets.size();
        double mean_d = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double enn = detail.targets[i] - nn[i];
            const double eex = detail.targets[i] - ex[i];
            mean_d += enn * enn - eex * eex;
        }
        mean_d /= static_cast<double>(n);
        double var_d = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double enn = detail.targets[i] - nn[i];
            const double eex = detail.targets[i] - ex[i];
            const double d = enn * enn - eex * eex - mean_d;
            var_d += d * d;
        }
        const double se_d =
            std::sqrt(var_d / static_cast<double>(n - 1) / static_cast<double>(n));
        out << fmt_short(horizons[idx]) << "," << fmt(m_ex.mse) << "," << fmt(m_ex.se_mse) << ","
            << fmt(m_nn.mse) << "," << fmt(m_nn.se_mse) << "," << fmt(mean_d) << "," << fmt(se_d)
            << "\n";
    }
}

std::map<std::string, std::string> parse_config_kv(std::istream& in) {
    std::map<std::string, std::string> kv;
    std::string line;
    std::size_t line_no = 0;
    auto trim = [](std::string s) {
        const auto a = s.find_first_not_of(" \t\r");
        const auto b = s.find_last_not_of(" \t\r");
        return a == std::string::npos ? std::string{} : s.substr(a, b - a + 1);
    };
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config line " + std::to_string(line_no) + ": expected key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty() || value.empty())
            throw ConfigError("config line " + std::to_string(line_no) + ": empty key or value");
        kv[key] = value;
    }
    return kv;
}

namespace {

std::vector<std::size_t> parse_arch(const std::string& v) {
    std::vector<std::size_t> widths;
    // "64x3" (width x depth) or "64,64,64"
    const auto x = v.find('x');
    if (x != std::string::npos && v.find(',') == std::string::npos) {
        const std::size_t width = std::stoul(v.substr(0, x));
        const std::size_t depth = std::stoul(v.substr(x + 1));
        if (width == 0 || depth == 0) throw ConfigError("arch: width and depth must be >= 1");
        return std::vector<std::size_t>(depth, width);
    }
    std::stringstream ss(v);
    std::string cell;
    while (std::getline(ss, cell, ',')) widths.push_back(std::stoul(cell));
    if (widths.empty()) throw ConfigError("arch: empty");
    return widths;
}

}  // namespace

void apply_config_kv(const std::map<std::string, std::string>& kv, ExperimentConfig& cfg) {
    for (const auto& [key, value] : kv) {
        try {
            if (key == "process") cfg.process = process_from_string(value);
            else if (key == "h" || key == "hurst") cfg.hurst = std::stod(value);
            else if (key == "s") cfg.s = std::stod(value);
            else if (key == "t" || key == "horizon") cfg.horizon = std::stod(value);
            else if (key == "n" || key == "n_obs") cfg.n_obs = std::stoul(value);
            else if (key == "sim_refinement") cfg.sim_refinement = std::stoul(value);
            else if (key == "n_batches") cfg.train.n_batches = std::stoul(value);
            else if (key == "batch_size") cfg.train.batch_size = std::stoul(value);
            else if (key == "lr_initial") cfg.train.lr_initial = std::stod(value);
            else if (key == "lr_decay") cfg.train.lr_decay = std::stod(value);
            else if (key == "lr_decay_every") cfg.train.lr_decay_every = std::stoul(value);
            else if (key == "truncation_c") cfg.train.truncation_c = std::stod(value);
            else if (key == "tail_average") cfg.train.tail_average_fraction = std::stod(value);
            else if (key == "optimizer") {
                if (value == "adam") cfg.train.optimizer = TrainingConfig::Optimizer::Adam;
                else if (value == "sgd") cfg.train.optimizer = TrainingConfig::Optimizer::Sgd;
                else throw ConfigError("optimizer must be adam|sgd");
            }
            else if (key == "n_test") cfg.n_test = std::stoul(value);
            else if (key == "arch") cfg.hidden = parse_arch(value);
            else if (key == "seed") cfg.seed = std::stoull(value);
            else if (key == "fou_k") cfg.fou_k = std::stod(value);
            else if (key == "fou_a") cfg.fou_a = std::stod(value);
            else if (key == "fou_sigma") cfg.fou_sigma = std::stod(value);
            else if (key == "fou_a0") cfg.fou_a0 = std::stod(value);
            else if (key == "fcir_lambda") cfg.fcir_lambda = std::stod(value);
            else if (key == "fcir_sigma") cfg.fcir_sigma = std::stod(value);
            else if (key == "fcir_r0") cfg.fcir_r0 = std::stod(value);
            else if (key == "integral_f") cfg.integral_f = value;
            else if (key == "fou_variant") {
                if (value == "z_argument") cfg.fou_variant = FouKernelVariant::ZArgument;
                else if (value == "as_written") cfg.fou_variant = FouKernelVariant::AsWritten;
                else throw ConfigError("fou_variant must be z_argument|as_written");
            }
            else throw ConfigError("unknown config key '" + key + "'");
        } catch (const ConfigError&) {
            throw;
        } catch (const std::exception&) {
            throw ConfigError("bad value for config key '" + key + "': " + value);
        }
    }
}

}  // namespace fracpredict
