#include "fracpredict/mlp.hpp"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <istream>
#include <ostream>

#include "fracpredict/errors.hpp"
#include "fracpredict/parallel.hpp"
#include "fracpredict/rng.hpp"

namespace fracpredict {

namespace {

void validate_widths(std::span<const std::size_t> widths) {
    if (widths.size() < 2) throw ConfigError("network needs at least input and output widths");
    for (std::size_t w : widths)
        if (w < 1) throw ConfigError("layer widths must be >= 1");
    if (widths.back() != 1) throw ConfigError("output width must be 1 (scalar regression)");
}

void normalize_input(const MlpNetwork& net, std::span<const double> x, Vector& out) {
    out.assign(x.begin(), x.end());
    if (!net.norm_mean.empty())
        for (std::size_t i = 0; i < out.size(); ++i)
            out[i] = (out[i] - net.norm_mean[i]) / net.norm_sd[i];
}

/// Forward keeping the per-layer activations; returns untruncated output.
double forward_trace(const MlpNetwork& net, std::span<const double> x,
                     std::vector<Vector>& activations) {
    const std::size_t n_layers = net.n_layers();
    activations.resize(n_layers + 1);
    normalize_input(net, x, activations[0]);
    for (std::size_t l = 0; l < n_layers; ++l) {
        const Matrix& a = net.weights[l];
        const Vector& prev = activations[l];
        Vector& cur = activations[l + 1];
        cur.assign(a.rows(), 0.0);
        for (std::size_t i = 0; i < a.rows(); ++i) {
            double s = net.biases[l][i];
            const double* row = a.data() + i * a.cols();
            for (std::size_t j = 0; j < a.cols(); ++j) s += row[j] * prev[j];
            cur[i] = (l + 1 < n_layers) ? std::max(0.0, s) : s;  // no activation on output
        }
    }
    return activations[n_layers][0];
}

struct GradBuffer {
    std::vector<Matrix> d_weights;
    std::vector<Vector> d_biases;

    explicit GradBuffer(const MlpNetwork& net) {
        d_weights.reserve(net.n_layers());
        d_biases.reserve(net.n_layers());
        for (std::size_t l = 0; l < net.n_layers(); ++l) {
            d_weights.emplace_back(net.weights[l].rows(), net.weights[l].cols());
            d_biases.emplace_back(net.biases[l].size(), 0.0);
        }
    }

    void add_scaled(const GradBuffer& other, double c) {
        for (std::size_t l = 0; l < d_weights.size(); ++l) {
            double* w = d_weights[l].data();
            const double* o = other.d_weights[l].data();
            const std::size_t n = d_weights[l].rows() * d_weights[l].cols();
            for (std::size_t i = 0; i < n; ++i) w[i] += c * o[i];
            for (std::size_t i = 0; i < d_biases[l].size(); ++i)
                d_biases[l][i] += c * other.d_biases[l][i];
        }
    }
};

/// Accumulate the gradient of residual^2/2 at one sample into `grad`,
/// scaled by `scale`. `activations` must come from forward_trace.
void backward_accumulate(const MlpNetwork& net, const std::vector<Vector>& activations,
                         double residual, double scale, GradBuffer& grad) {
    const std::size_t n_layers = net.n_layers();
    Vector delta(1, residual * scale);
    for (std::size_t l = n_layers; l-- > 0;) {
        const Matrix& a = net.weights[l];
        const Vector& prev = activations[l];
        Matrix& dw = grad.d_weights[l];
        Vector& db = grad.d_biases[l];
        for (std::size_t i = 0; i < a.rows(); ++i) {
            const double d = delta[i];
            if (d != 0.0) {
                db[i] += d;
                double* dwi = dw.data() + i * a.cols();
                for (std::size_t j = 0; j < a.cols(); ++j) dwi[j] += d * prev[j];
            }
        }
        if (l == 0) break;
        Vector next(a.cols(), 0.0);
        for (std::size_t i = 0; i < a.rows(); ++i) {
            const double d = delta[i];
            if (d == 0.0) continue;
            const double* row = a.data() + i * a.cols();
            for (std::size_t j = 0; j < a.cols(); ++j) next[j] += d * row[j];
        }
        // ReLU mask of the layer below (activations[l] is its post-activation)
        for (std::size_t j = 0; j < next.size(); ++j)
            if (activations[l][j] <= 0.0) next[j] = 0.0;
        delta = std::move(next);
    }
}

}  // namespace

double MlpNetwork::forward(std::span<const double> x) const {
    if (x.size() != input_dim()) throw ShapeError("mlp forward: input dimension mismatch");
    std::vector<Vector> acts;
    double out = forward_trace(*this, x, acts);
    if (truncation_beta) out = truncate(out, *truncation_beta);
    return out;
}

MlpNetwork mlp_init(std::span<const std::size_t> layer_widths, std::uint64_t seed) {
    validate_widths(layer_widths);
    MlpNetwork net;
    net.layer_widths.assign(layer_widths.begin(), layer_widths.end());
    RngStream rng(derive_seed(seed, stream_purpose::kInit), 0);
    for (std::size_t l = 0; l + 1 < layer_widths.size(); ++l) {
        const std::size_t fan_in = layer_widths[l];
        const std::size_t fan_out = layer_widths[l + 1];
        Matrix a(fan_out, fan_in);
        const double sd = std::sqrt(2.0 / static_cast<double>(fan_in));
        for (std::size_t i = 0; i < fan_out; ++i)
            for (std::size_t j = 0; j < fan_in; ++j) a(i, j) = sd * rng.next_normal();
        net.weights.push_back(std::move(a));
        net.biases.emplace_back(fan_out, 0.0);
    }
    return net;
}

MlpGradient mlp_gradient(const MlpNetwork& net, std::span<const double> x, double y_target) {
    if (x.size() != net.input_dim()) throw ShapeError("mlp_gradient: input dimension mismatch");
    std::vector<Vector> acts;
    const double raw = forward_trace(net, x, acts);
    double residual;
    if (net.truncation_beta) {
        const double beta = *net.truncation_beta;
        const double clamped = truncate(raw, beta);
        // zero gradient outside the clamp band
        residual = (std::abs(raw) < beta) ? (clamped - y_target) : 0.0;
    } else {
        residual = raw - y_target;
    }
    GradBuffer grad(net);
    backward_accumulate(net, acts, residual, 1.0, grad);
    return {std::move(grad.d_weights), std::move(grad.d_biases)};
}

TrainResult train(MlpNetwork net, const TrainingConfig& config, const BatchGenerator& generator) {
    if (!(config.lr_initial > 0.0)) throw ConfigError("train: lr_initial must be > 0");
    if (!(config.lr_decay > 0.0 && config.lr_decay <= 1.0))
        throw ConfigError("train: lr_decay must lie in (0, 1]");
    if (config.n_batches == 0 || config.batch_size == 0)
        throw ConfigError("train: batch counts must be >= 1");
    if (config.lr_decay_every == 0) throw ConfigError("train: lr_decay_every must be >= 1");
    if (!(config.truncation_c > 0.0)) throw ConfigError("train: truncation_c must be > 0");
    if (config.tail_average_fraction < 0.0 || config.tail_average_fraction > 1.0)
        throw ConfigError("train: tail_average_fraction must lie in [0, 1]");

    const std::size_t n_layers = net.n_layers();
    net.truncation_beta.reset();  // truncation applies at evaluation, not in the loss

    // Adam state
    std::vector<Matrix> m_w, v_w;
    std::vector<Vector> m_b, v_b;
    for (std::size_t l = 0; l < n_layers; ++l) {
        m_w.emplace_back(net.weights[l].rows(), net.weights[l].cols());
        v_w.emplace_back(net.weights[l].rows(), net.weights[l].cols());
        m_b.emplace_back(net.biases[l].size(), 0.0);
        v_b.emplace_back(net.biases[l].size(), 0.0);
    }
    const double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;

    Matrix x(config.batch_size, net.input_dim());
    Vector y(config.batch_size);
    std::vector<LossTracePoint> trace;
    trace.reserve(config.n_batches);

    const std::size_t avg_count = static_cast<std::size_t>(
        std::ceil(config.tail_average_fraction * static_cast<double>(config.n_batches)));
    const std::size_t avg_start = config.n_batches - avg_count;
    std::vector<Matrix> sum_w;
    std::vector<Vector> sum_b;
    if (avg_count > 0)
        for (std::size_t l = 0; l < n_layers; ++l) {
            sum_w.emplace_back(net.weights[l].rows(), net.weights[l].cols());
            sum_b.emplace_back(net.biases[l].size(), 0.0);
        }

    // fixed-size chunks keep the gradient reduction order independent of the
    // worker count
    const std::size_t chunk = 128;
    const std::size_t n_chunks = (config.batch_size + chunk - 1) / chunk;

    for (std::size_t b = 0; b < config.n_batches; ++b) {
        generator(b, x, y);
        if (x.rows() != config.batch_size || x.cols() != net.input_dim() ||
            y.size() != config.batch_size)
            throw ShapeError("train: generator returned a misshaped batch");

        if (b == 0 && net.norm_mean.empty()) {
            const std::size_t d = net.input_dim();
            net.norm_mean.assign(d, 0.0);
            net.norm_sd.assign(d, 0.0);
            for (std::size_t i = 0; i < config.batch_size; ++i)
                for (std::size_t j = 0; j < d; ++j) net.norm_mean[j] += x(i, j);
            for (double& m : net.norm_mean) m /= static_cast<double>(config.batch_size);
            for (std::size_t i = 0; i < config.batch_size; ++i)
                for (std::size_t j = 0; j < d; ++j) {
                    const double c = x(i, j) - net.norm_mean[j];
                    net.norm_sd[j] += c * c;
                }
            for (double& s : net.norm_sd)
                s = std::max(1e-12, std::sqrt(s / static_cast<double>(config.batch_size)));
        }

        std::vector<GradBuffer> chunk_grads;
        chunk_grads.reserve(n_chunks);
        for (std::size_t c = 0; c < n_chunks; ++c) chunk_grads.emplace_back(net);
        Vector chunk_loss(n_chunks, 0.0);

        parallel_for(n_chunks, [&](std::size_t c) {
            const std::size_t lo = c * chunk;
            const std::size_t hi = std::min(config.batch_size, lo + chunk);
            std::vector<Vector> acts;
            for (std::size_t i = lo; i < hi; ++i) {
                const double out = forward_trace(net, x.row(i), acts);
                const double r = out - y[i];
                chunk_loss[c] += r * r;
                backward_accumulate(net, acts, r, 2.0, chunk_grads[c]);
            }
        });

        double loss = 0.0;
        for (double cl : chunk_loss) loss += cl;
        loss /= static_cast<double>(config.batch_size);
        if (!std::isfinite(loss)) throw DivergenceError(b);

        GradBuffer grad(net);
        for (const auto& cg : chunk_grads)
            grad.add_scaled(cg, 1.0 / static_cast<double>(config.batch_size));

        const double lr =
            config.lr_initial * std::pow(config.lr_decay, static_cast<double>(b / config.lr_decay_every));
        const double t = static_cast<double>(b + 1);

        for (std::size_t l = 0; l < n_layers; ++l) {
            const std::size_t nw = net.weights[l].rows() * net.weights[l].cols();
            double* w = net.weights[l].data();
            const double* g = grad.d_weights[l].data();
            double* mw = m_w[l].data();
            double* vw = v_w[l].data();
            if (config.optimizer == TrainingConfig::Optimizer::Adam) {
                const double bc1 = 1.0 - std::pow(beta1, t);
                const double bc2 = 1.0 - std::pow(beta2, t);
                for (std::size_t i = 0; i < nw; ++i) {
                    mw[i] = beta1 * mw[i] + (1.0 - beta1) * g[i];
                    vw[i] = beta2 * vw[i] + (1.0 - beta2) * g[i] * g[i];
                    w[i] -= lr * (mw[i] / bc1) / (std::sqrt(vw[i] / bc2) + eps);
                }
                for (std::size_t i = 0; i < net.biases[l].size(); ++i) {
                    const double gb = grad.d_biases[l][i];
                    m_b[l][i] = beta1 * m_b[l][i] + (1.0 - beta1) * gb;
                    v_b[l][i] = beta2 * v_b[l][i] + (1.0 - beta2) * gb * gb;
                    net.biases[l][i] -= lr * (m_b[l][i] / bc1) / (std::sqrt(v_b[l][i] / bc2) + eps);
                }
            } else {
                for (std::size_t i = 0; i < nw; ++i) w[i] -= lr * g[i];
                for (std::size_t i = 0; i < net.biases[l].size(); ++i)
                    net.biases[l][i] -= lr * grad.d_biases[l][i];
            }
        }
        trace.push_back({b, loss, lr});

        if (avg_count > 0 && b >= avg_start)
            for (std::size_t l = 0; l < n_layers; ++l) {
                const std::size_t nw = net.weights[l].rows() * net.weights[l].cols();
                for (std::size_t i = 0; i < nw; ++i)
                    sum_w[l].data()[i] += net.weights[l].data()[i];
                for (std::size_t i = 0; i < net.biases[l].size(); ++i)
                    sum_b[l][i] += net.biases[l][i];
            }
    }

    if (avg_count > 0)
        for (std::size_t l = 0; l < n_layers; ++l) {
            const std::size_t nw = net.weights[l].rows() * net.weights[l].cols();
            for (std::size_t i = 0; i < nw; ++i)
                net.weights[l].data()[i] = sum_w[l].data()[i] / static_cast<double>(avg_count);
            for (std::size_t i = 0; i < net.biases[l].size(); ++i)
                net.biases[l][i] = sum_b[l][i] / static_cast<double>(avg_count);
        }

    const double n_total =
        static_cast<double>(config.n_batches) * static_cast<double>(config.batch_size);
    net.truncation_beta = config.truncation_c * std::log(n_total);
    return {std::move(net), std::move(trace)};
}

MlpNetwork build_fsq() {
    MlpNetwork net;
    net.layer_widths = {2, 4, 1};
    Matrix a1(4, 2);
    const double rows[4][2] = {{1, 1}, {-1, -1}, {1, -1}, {-1, 1}};
    for (std::size_t i = 0; i < 4; ++i)
        for (std::size_t j = 0; j < 2; ++j) a1(i, j) = rows[i][j];
    Matrix a2(1, 4);
    a2(0, 0) = 1;
    a2(0, 1) = 1;
    a2(0, 2) = -1;
    a2(0, 3) = -1;
    net.weights = {std::move(a1), std::move(a2)};
    net.biases = {Vector(4, 0.0), Vector(1, 0.0)};
    return net;
}

MlpNetwork build_fmult(std::size_t d) {
    if (d == 0) throw ConfigError("build_fmult: d must be >= 1");
    MlpNetwork net;
    if (d == 1) {
        net.layer_widths = {1, 1};
        Matrix a(1, 1);
        a(0, 0) = 1.0;
        net.weights = {std::move(a)};
        net.biases = {Vector(1, 0.0)};
        return net;
    }
    std::size_t w = 0;
    while ((std::size_t{1} << w) < d) ++w;
    const std::size_t padded = std::size_t{1} << w;

    net.layer_widths.push_back(d);
    // entry layer: pairs over the 1-padded input; constants fold into biases
    {
        const std::size_t pairs = padded / 2;
        Matrix a(4 * pairs, d);
        Vector b(4 * pairs, 0.0);
        const double sign_a[4] = {1, -1, 1, -1};
        const double sign_b[4] = {1, -1, -1, 1};
        for (std::size_t p = 0; p < pairs; ++p) {
            const std::size_t ia = 2 * p, ib = 2 * p + 1;
            for (std::size_t u = 0; u < 4; ++u) {
                const std::size_t r = 4 * p + u;
                if (ia < d)
                    a(r, ia) += sign_a[u];
                else
                    b[r] += sign_a[u];
                if (ib < d)
                    a(r, ib) += sign_b[u];
                else
                    b[r] += sign_b[u];
            }
        }
        net.weights.push_back(std::move(a));
        net.biases.push_back(std::move(b));
        net.layer_widths.push_back(4 * pairs);
    }
    // Inner levels. Each gate value is materialized by its own ReLU row that
    // touches only that gate's four units: a gate fed a zero cancels within
    // its own running sum, so the zero is bit-exact and propagates as an
    // exactly-zero column into the next level (gate values are nonnegative on
    // [0,1]^d inputs, so the materializing ReLU is the identity).
    for (std::size_t level = 1; level < w; ++level) {
        const std::size_t gates = padded >> level;  // gates of the previous level
        {
            Matrix m(gates, 4 * gates);
            for (std::size_t g = 0; g < gates; ++g) {
                m(g, 4 * g + 0) = 1;
                m(g, 4 * g + 1) = 1;
                m(g, 4 * g + 2) = -1;
                m(g, 4 * g + 3) = -1;
            }
            net.weights.push_back(std::move(m));
            net.biases.emplace_back(gates, 0.0);
            net.layer_widths.push_back(gates);
        }
        const std::size_t pairs = gates / 2;
        Matrix a(4 * pairs, gates);
        const double sign_a[4] = {1, -1, 1, -1};
        const double sign_b[4] = {1, -1, -1, 1};
        for (std::size_t p = 0; p < pairs; ++p)
            for (std::size_t u = 0; u < 4; ++u) {
                a(4 * p + u, 2 * p) = sign_a[u];
                a(4 * p + u, 2 * p + 1) = sign_b[u];
            }
        net.weights.push_back(std::move(a));
        net.biases.emplace_back(4 * pairs, 0.0);
        net.layer_widths.push_back(4 * pairs);
    }
    // final combine
    Matrix out(1, 4);
    out(0, 0) = 1;
    out(0, 1) = 1;
    out(0, 2) = -1;
    out(0, 3) = -1;
    net.weights.push_back(std::move(out));
    net.biases.emplace_back(1, 0.0);
    net.layer_widths.push_back(1);
    return net;
}

MlpNetwork build_fdemo(double c2, double c5) {
    if (!(c5 >= 1.0)) throw ConfigError("build_fdemo: c5 must be >= 1");
    if (!(c2 >= c5)) throw ConfigError("build_fdemo: need c2 >= c5");
    MlpNetwork net;
    net.layer_widths = {1, 1, 1, 1};
    Matrix a1(1, 1), a2(1, 1), a3(1, 1);
    a1(0, 0) = 1.0;
    a2(0, 0) = -c2;
    a3(0, 0) = -1.0;
    net.weights = {std::move(a1), std::move(a2), std::move(a3)};
    net.biases = {Vector(1, 0.0), Vector(1, 1.0), Vector(1, 1.0)};
    return net;
}

namespace {

constexpr char kNetMagic[5] = {'F', 'P', 'N', 'N', '1'};

void put_u64(std::ostream& out, std::uint64_t v) {
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xff);
    out.write(reinterpret_cast<const char*>(b), 8);
}

std::uint64_t get_u64(std::istream& in) {
    unsigned char b[8];
    in.read(reinterpret_cast<char*>(b), 8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
    return v;
}

void put_f64(std::ostream& out, double v) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, 8);
    put_u64(out, bits);
}

double get_f64(std::istream& in) {
    const std::uint64_t bits = get_u64(in);
    double v;
    std::memcpy(&v, &bits, 8);
    return v;
}

}  // namespace

void save_network(const MlpNetwork& net, std::ostream& out) {
    out.write(kNetMagic, 5);
    put_u64(out, 1);  // version
    put_u64(out, net.layer_widths.size());
    for (std::size_t w : net.layer_widths) put_u64(out, w);
    put_u64(out, net.truncation_beta ? 1 : 0);
    put_f64(out, net.truncation_beta.value_or(0.0));
    put_u64(out, net.norm_mean.size());
    for (double v : net.norm_mean) put_f64(out, v);
    for (double v : net.norm_sd) put_f64(out, v);
    for (std::size_t l = 0; l < net.n_layers(); ++l) {
        const Matrix& a = net.weights[l];
        for (std::size_t i = 0; i < a.rows() * a.cols(); ++i) put_f64(out, a.data()[i]);
        for (double v : net.biases[l]) put_f64(out, v);
    }
}

MlpNetwork load_network(std::istream& in) {
    char magic[5];
    in.read(magic, 5);
    if (!in || std::memcmp(magic, kNetMagic, 5) != 0)
        throw DomainError("network file: bad magic");
    if (get_u64(in) != 1) throw DomainError("network file: unsupported version");
    MlpNetwork net;
    net.layer_widths.resize(get_u64(in));
    for (auto& w : net.layer_widths) w = get_u64(in);
    validate_widths(net.layer_widths);
    const bool has_beta = get_u64(in) != 0;
    const double beta = get_f64(in);
    if (has_beta) net.truncation_beta = beta;
    const std::size_t norm = get_u64(in);
    net.norm_mean.resize(norm);
    net.norm_sd.resize(norm);
    for (auto& v : net.norm_mean) v = get_f64(in);
    for (auto& v : net.norm_sd) v = get_f64(in);
    for (std::size_t l = 0; l + 1 < net.layer_widths.size(); ++l) {
        Matrix a(net.layer_widths[l + 1], net.layer_widths[l]);
        for (std::size_t i = 0; i < a.rows() * a.cols(); ++i) a.data()[i] = get_f64(in);
        Vector b(net.layer_widths[l + 1]);
        for (auto& v : b) v = get_f64(in);
        net.weights.push_back(std::move(a));
        net.biases.push_back(std::move(b));
    }
    if (!in) throw DomainError("network file: truncated stream");
    return net;
}

void export_loss_trace_csv(std::span<const LossTracePoint> trace, std::ostream& out) {
    out << "batch,loss,lr\n";
    char buf[80];
    for (const auto& p : trace) {
        std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g\n", p.batch, p.loss, p.lr);
        out << buf;
    }
}

}  // namespace fracpredict
