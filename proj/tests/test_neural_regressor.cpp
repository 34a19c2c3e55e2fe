#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <sstream>

#include "fracpredict/gaussian.hpp"
#include "fracpredict/mlp.hpp"
#include "fracpredict/rng.hpp"
#include "test_util.hpp"

using namespace fracpredict;

namespace {

double finite_diff_check(const MlpNetwork& net, std::span<const double> x, double y) {
    const MlpGradient grad = mlp_gradient(net, x, y);
    double worst = 0.0;
    auto loss = [&](const MlpNetwork& n) {
        const double r = n.forward(x) - y;
        return 0.5 * r * r;
    };
    const double step = 1e-6;
    for (std::size_t l = 0; l < net.n_layers(); ++l) {
        for (std::size_t i = 0; i < net.weights[l].rows(); ++i)
            for (std::size_t j = 0; j < net.weights[l].cols(); ++j) {
                MlpNetwork plus = net, minus = net;
                plus.weights[l](i, j) += step;
                minus.weights[l](i, j) -= step;
                const double fd = (loss(plus) - loss(minus)) / (2.0 * step);
                const double an = grad.d_weights[l](i, j);
                const double rel = std::abs(fd - an) / std::max({1e-6, std::abs(fd), std::abs(an)});
                worst = std::max(worst, rel);
            }
        for (std::size_t i = 0; i < net.biases[l].size(); ++i) {
            MlpNetwork plus = net, minus = net;
            plus.biases[l][i] += step;
            minus.biases[l][i] -= step;
            const double fd = (loss(plus) - loss(minus)) / (2.0 * step);
            const double an = grad.d_biases[l][i];
            const double rel = std::abs(fd - an) / std::max({1e-6, std::abs(fd), std::abs(an)});
            worst = std::max(worst, rel);
        }
    }
    return worst;
}

}  // namespace

TEST_CASE("initialization: zero biases, determinism, fan-in scaling") {
    const std::vector<std::size_t> widths{3, 1};
    const MlpNetwork a = mlp_init(widths, 9);
    CHECK(a.biases.back()[0] == 0.0);
    const MlpNetwork b = mlp_init(widths, 9);
    for (std::size_t l = 0; l < a.n_layers(); ++l)
        for (std::size_t i = 0; i < a.weights[l].rows() * a.weights[l].cols(); ++i)
            CHECK(a.weights[l].data()[i] == b.weights[l].data()[i]);

    // empirical variance of first-layer weights across many seeds
    const std::vector<std::size_t> wide{8, 32, 1};
    std::vector<double> draws;
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        const MlpNetwork n = mlp_init(wide, seed);
        for (std::size_t i = 0; i < n.weights[0].rows() * n.weights[0].cols(); ++i)
            draws.push_back(n.weights[0].data()[i]);
    }
    const auto ms = testutil::mean_sd(draws);
    CHECK(ms.sd * ms.sd == doctest::Approx(2.0 / 8.0).epsilon(0.10));

    CHECK_THROWS_AS(mlp_init(std::vector<std::size_t>{3, 2}, 0), ConfigError);
    CHECK_THROWS_AS(mlp_init(std::vector<std::size_t>{3}, 0), ConfigError);
}

TEST_CASE("forward pass structure") {
    // all-zero parameters
    MlpNetwork zero = mlp_init(std::vector<std::size_t>{2, 4, 1}, 3);
    for (auto& w : zero.weights)
        for (std::size_t i = 0; i < w.rows() * w.cols(); ++i) w.data()[i] = 0.0;
    CHECK(zero.forward(Vector{1.0, -2.0}) == 0.0);

    // single affine layer passes negatives through (no output activation)
    MlpNetwork affine;
    affine.layer_widths = {1, 1};
    Matrix a(1, 1);
    a(0, 0) = 1.0;
    affine.weights = {a};
    affine.biases = {Vector(1, 0.0)};
    CHECK(affine.forward(Vector{-3.0}) == -3.0);

    // relu(x) - relu(-x) is the identity
    MlpNetwork ident;
    ident.layer_widths = {1, 2, 1};
    Matrix a1(2, 1), a2(1, 2);
    a1(0, 0) = 1.0;
    a1(1, 0) = -1.0;
    a2(0, 0) = 1.0;
    a2(0, 1) = -1.0;
    ident.weights = {a1, a2};
    ident.biases = {Vector(2, 0.0), Vector(1, 0.0)};
    for (double x : {-2.0, 0.0, 3.0}) CHECK(ident.forward(Vector{x}) == x);

    CHECK_THROWS_AS(ident.forward(Vector{1.0, 2.0}), ShapeError);
}

TEST_CASE("truncation clamp") {
    CHECK(truncate(3.0, 2.0) == 2.0);
    CHECK(truncate(-5.0, 2.0) == -2.0);
    CHECK(truncate(0.5, 2.0) == 0.5);
    CHECK_THROWS_AS(truncate(1.0, 0.0), DomainError);

    MlpNetwork net = mlp_init(std::vector<std::size_t>{2, 8, 1}, 4);
    net.truncation_beta = 0.01;
    RngStream rng(1, 1);
    for (int i = 0; i < 200; ++i) {
        const double out = net.forward(Vector{rng.next_normal() * 10, rng.next_normal() * 10});
        CHECK(std::abs(out) <= 0.01);
    }
}

TEST_CASE("gradient is exact at a perfect fit and in flat regions") {
    MlpNetwork net = mlp_init(std::vector<std::size_t>{2, 4, 1}, 12);
    const Vector x{0.3, -0.7};
    const double y = net.forward(x);
    const MlpGradient g = mlp_gradient(net, x, y);
    for (std::size_t l = 0; l < net.n_layers(); ++l) {
        for (std::size_t i = 0; i < g.d_weights[l].rows() * g.d_weights[l].cols(); ++i)
            CHECK(g.d_weights[l].data()[i] == 0.0);
        for (double v : g.d_biases[l]) CHECK(v == 0.0);
    }

    // all first-layer pre-activations negative => first-layer weights get no signal
    MlpNetwork dead;
    dead.layer_widths = {1, 2, 1};
    Matrix a1(2, 1), a2(1, 2);
    a1(0, 0) = 1.0;
    a1(1, 0) = 2.0;
    a2(0, 0) = 1.0;
    a2(0, 1) = 1.0;
    dead.weights = {a1, a2};
    dead.biases = {Vector(2, 0.0), Vector(1, 0.0)};
    const MlpGradient gd = mlp_gradient(dead, Vector{-1.0}, 5.0);
    CHECK(gd.d_weights[0](0, 0) == 0.0);
    CHECK(gd.d_weights[0](1, 0) == 0.0);
    CHECK(gd.d_biases[1][0] != 0.0);  // output bias still learns
}

namespace {

// The loss is not differentiable on ReLU kinks, where central differences
// measure the average of the two one-sided slopes; skip inputs that put any
// pre-activation close enough to 0 for a parameter step to cross it.
bool near_kink(const MlpNetwork& net, std::span<const double> x, double tol) {
    Vector cur(x.begin(), x.end());
    for (std::size_t l = 0; l < net.n_layers(); ++l) {
        Vector next(net.weights[l].rows());
        for (std::size_t i = 0; i < next.size(); ++i) {
            double s = net.biases[l][i];
            for (std::size_t j = 0; j < cur.size(); ++j) s += net.weights[l](i, j) * cur[j];
            if (l + 1 < net.n_layers() && std::abs(s) < tol) return true;
            next[i] = (l + 1 < net.n_layers()) ? std::max(0.0, s) : s;
        }
        cur = std::move(next);
    }
    return false;
}

}  // namespace

TEST_CASE("gradient matches central finite differences") {
    RngStream rng(271828, 0);
    double worst = 0.0;
    int checked = 0;
    while (checked < 60) {
        const std::size_t in = 1 + static_cast<std::size_t>(rng.next_uniform() * 4);
        const std::size_t hid = 2 + static_cast<std::size_t>(rng.next_uniform() * 14);
        const MlpNetwork net =
            mlp_init(std::vector<std::size_t>{in, hid, hid, 1}, rng.next_u64());
        Vector x(in);
        for (auto& v : x) v = rng.next_normal();
        if (near_kink(net, x, 1e-4)) continue;
        worst = std::max(worst, finite_diff_check(net, x, rng.next_normal()));
        ++checked;
    }
    CHECK(worst < 1e-4);
}

TEST_CASE("forward pass is piecewise linear") {
    RngStream rng(5050, 0);
    for (int rep = 0; rep < 20; ++rep) {
        const MlpNetwork net = mlp_init(std::vector<std::size_t>{3, 16, 16, 1}, rng.next_u64());
        Vector x(3);
        for (auto& v : x) v = rng.next_normal();
        // three nearby points along a ray; collinearity on a fixed activation pattern
        const double eps = 1e-5;
        Vector x1 = x, x2 = x;
        for (auto& v : x1) v *= 1.0 + eps;
        for (auto& v : x2) v *= 1.0 + 2.0 * eps;
        const double f0 = net.forward(x), f1 = net.forward(x1), f2 = net.forward(x2);
        CHECK(std::abs((f2 - f1) - (f1 - f0)) < 1e-9 * std::max(1.0, std::abs(f0)));
    }
}

TEST_CASE("training drives a zero-target loss to zero") {
    TrainingConfig cfg;
    cfg.n_batches = 200;
    cfg.batch_size = 128;
    cfg.optimizer = TrainingConfig::Optimizer::Sgd;
    cfg.lr_initial = 0.2;
    cfg.lr_decay = 1.0;
    RngStream data_rng(33, 0);
    const BatchGenerator gen = [&](std::size_t, Matrix& x, Vector& y) {
        for (std::size_t i = 0; i < x.rows(); ++i) {
            for (std::size_t j = 0; j < x.cols(); ++j) x(i, j) = data_rng.next_normal();
            y[i] = 0.0;
        }
    };
    const auto result = train(mlp_init(std::vector<std::size_t>{4, 16, 1}, 8), cfg, gen);
    CHECK(result.trace.size() == 200);
    CHECK(result.trace.back().loss < 1e-3);
    CHECK(result.trace.back().loss < 1e-3 * result.trace.front().loss);
}

TEST_CASE("step-decay schedule multiplies the rate every decay interval") {
    TrainingConfig cfg;
    cfg.n_batches = 30;
    cfg.batch_size = 16;
    RngStream data_rng(34, 0);
    const BatchGenerator gen = [&](std::size_t, Matrix& x, Vector& y) {
        for (std::size_t i = 0; i < x.rows(); ++i) {
            for (std::size_t j = 0; j < x.cols(); ++j) x(i, j) = data_rng.next_normal();
            y[i] = 0.0;
        }
    };
    const auto result = train(mlp_init(std::vector<std::size_t>{2, 8, 1}, 1), cfg, gen);
    CHECK(result.trace[0].lr == doctest::Approx(0.01));
    CHECK(result.trace[9].lr == doctest::Approx(0.01));
    CHECK(result.trace[10].lr == doctest::Approx(0.01 * 0.95));
    CHECK(result.trace[25].lr == doctest::Approx(0.01 * 0.95 * 0.95));
}

TEST_CASE("training recovers a linear regression function") {
    TrainingConfig cfg;
    cfg.n_batches = 400;
    cfg.batch_size = 256;
    RngStream data_rng(77, 0);
    const BatchGenerator gen = [&](std::size_t, Matrix& x, Vector& y) {
        for (std::size_t i = 0; i < x.rows(); ++i) {
            x(i, 0) = data_rng.next_normal();
            y[i] = 2.0 * x(i, 0) + 0.1 * data_rng.next_normal();
        }
    };
    const auto result = train(mlp_init(std::vector<std::size_t>{1, 16, 16, 1}, 5), cfg, gen);
    double sup = 0.0;
    for (double x = -1.0; x <= 1.0; x += 0.02)
        sup = std::max(sup, std::abs(result.net.forward(Vector{x}) - 2.0 * x));
    CHECK(sup < 0.1);
    // training improves: late-batch loss below early-batch loss
    double early = 0.0, late = 0.0;
    for (std::size_t i = 0; i < 40; ++i) {
        early += result.trace[i].loss;
        late += result.trace[result.trace.size() - 1 - i].loss;
    }
    CHECK(late < early);
}

TEST_CASE("training matches the Gaussian conditioning oracle on bivariate data") {
    // (X, Y) jointly Gaussian: Y = 0.6 X1 - 1.1 X2 + noise
    Matrix cov(3, 3);
    const double w1 = 0.6, w2 = -1.1, noise = 0.25;
    cov(1, 1) = 1.0;
    cov(2, 2) = 1.0;
    cov(1, 2) = cov(2, 1) = 0.3;
    cov(0, 1) = cov(1, 0) = w1 * cov(1, 1) + w2 * cov(1, 2);
    cov(0, 2) = cov(2, 0) = w1 * cov(1, 2) + w2 * cov(2, 2);
    cov(0, 0) = w1 * w1 + w2 * w2 + 2 * w1 * w2 * 0.3 + noise;
    const Vector mean{0, 0, 0};
    const auto cond = gaussian_condition(mean, cov, 0, std::vector<std::size_t>{1, 2});

    TrainingConfig cfg;
    cfg.n_batches = 500;
    cfg.batch_size = 256;
    RngStream data_rng(123, 0);
    const BatchGenerator gen = [&](std::size_t, Matrix& x, Vector& y) {
        for (std::size_t i = 0; i < x.rows(); ++i) {
            const double z1 = data_rng.next_normal(), z2 = data_rng.next_normal();
            const double x1 = z1;
            const double x2 = 0.3 * z1 + std::sqrt(1.0 - 0.09) * z2;
            x(i, 0) = x1;
            x(i, 1) = x2;
            y[i] = w1 * x1 + w2 * x2 + std::sqrt(noise) * data_rng.next_normal();
        }
    };
    const auto result = train(mlp_init(std::vector<std::size_t>{2, 32, 32, 1}, 21), cfg, gen);

    RngStream test_rng(321, 0);
    double rms = 0.0;
    const int n_pts = 400;
    for (int i = 0; i < n_pts; ++i) {
        const double z1 = test_rng.next_normal(), z2 = test_rng.next_normal();
        Vector x{z1, 0.3 * z1 + std::sqrt(1.0 - 0.09) * z2};
        const double d = result.net.forward(x) - cond.predict(x);
        rms += d * d;
    }
    rms = std::sqrt(rms / n_pts);
    CHECK(rms < 0.05);
}

TEST_CASE("training reports divergence with the batch index") {
    TrainingConfig cfg;
    cfg.n_batches = 10;
    cfg.batch_size = 8;
    const BatchGenerator gen = [&](std::size_t b, Matrix& x, Vector& y) {
        for (std::size_t i = 0; i < x.rows(); ++i) {
            x(i, 0) = 1.0;
            y[i] = (b == 3) ? std::numeric_limits<double>::infinity() : 0.0;
        }
    };
    try {
        train(mlp_init(std::vector<std::size_t>{1, 4, 1}, 0), cfg, gen);
        FAIL("expected DivergenceError");
    } catch (const DivergenceError& e) {
        CHECK(e.batch == 3);
    }
}

TEST_CASE("f_sq gate computes |m+n| - |m-n|") {
    const MlpNetwork fsq = build_fsq();
    CHECK(fsq.forward(Vector{0.3, 0.5}) == doctest::Approx(0.6).epsilon(1e-15));
    for (double n : {0.0, 0.4, 1.0}) CHECK(fsq.forward(Vector{0.0, n}) == 0.0);
    CHECK(fsq.forward(Vector{1.0, 1.0}) == 2.0);
    CHECK(fsq.forward(Vector{-0.5, 0.25}) ==
          doctest::Approx(std::abs(-0.25) - std::abs(-0.75)).epsilon(1e-15));
}

TEST_CASE("f_mult is positive iff every coordinate is positive") {
    RngStream rng(888, 0);
    for (std::size_t d : {1UL, 2UL, 3UL, 5UL}) {
        const MlpNetwork fm = build_fmult(d);
        std::size_t w = 0;
        while ((std::size_t{1} << w) < d) ++w;
        // one pair layer per tree level plus a materializing layer between levels
        CHECK(fm.n_layers() == (d == 1 ? 1 : 2 * w));

        Vector x(d, 0.5);
        CHECK(fm.forward(x) > 0.0);
        if (d >= 2) {
            x[1] = 0.0;
            CHECK(fm.forward(x) == 0.0);
        }
        for (int rep = 0; rep < 1000; ++rep) {
            Vector pt(d);
            bool all_positive = true;
            for (auto& v : pt) {
                v = (rng.next_uniform() < 0.25) ? 0.0 : rng.next_uniform();
                all_positive = all_positive && v > 0.0;
            }
            const double out = fm.forward(pt);
            if (all_positive)
                CHECK(out > 0.0);
            else
                CHECK(out == 0.0);
        }
    }
}

TEST_CASE("f_demo is a hard gate outside the ramp") {
    const MlpNetwork gate = build_fdemo(10.0, 2.0);
    CHECK(gate.forward(Vector{0.5}) == 1.0);
    CHECK(gate.forward(Vector{-1.0}) == 0.0);
    CHECK(gate.forward(Vector{0.0}) == 0.0);
    CHECK(gate.forward(Vector{1.0 / 20.0}) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK_THROWS_AS(build_fdemo(1.0, 2.0), ConfigError);
    CHECK_THROWS_AS(build_fdemo(10.0, 0.5), ConfigError);
}

TEST_CASE("network save/load round-trip preserves the forward map") {
    TrainingConfig cfg;
    cfg.n_batches = 5;
    cfg.batch_size = 32;
    RngStream data_rng(9, 9);
    const BatchGenerator gen = [&](std::size_t, Matrix& x, Vector& y) {
        for (std::size_t i = 0; i < x.rows(); ++i) {
            for (std::size_t j = 0; j < x.cols(); ++j) x(i, j) = data_rng.next_normal();
            y[i] = x(i, 0);
        }
    };
    const auto result = train(mlp_init(std::vector<std::size_t>{3, 8, 1}, 2), cfg, gen);

    std::stringstream buf(std::ios::in | std::ios::out | std::ios::binary);
    save_network(result.net, buf);
    CHECK(buf.str().substr(0, 5) == "FPNN1");
    buf.seekg(0);
    const MlpNetwork back = load_network(buf);
    CHECK(back.truncation_beta.has_value());
    CHECK(*back.truncation_beta == *result.net.truncation_beta);
    RngStream probe(100, 0);
    for (int i = 0; i < 50; ++i) {
        Vector x{probe.next_normal(), probe.next_normal(), probe.next_normal()};
        CHECK(back.forward(x) == result.net.forward(x));
    }

    std::stringstream trace_csv;
    export_loss_trace_csv(result.trace, trace_csv);
    std::string line;
    std::getline(trace_csv, line);
    CHECK(line == "batch,loss,lr");
}
