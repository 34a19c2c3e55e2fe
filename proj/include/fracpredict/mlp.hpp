#ifndef FRACPREDICT_MLP_HPP
#define FRACPREDICT_MLP_HPP

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fracpredict/linalg.hpp"

namespace fracpredict {

/// T_beta clamp.
inline double truncate(double u, double beta) {
    if (!(beta > 0.0)) throw DomainError("truncate: beta must be > 0");
    return std::max(-beta, std::min(beta, u));
}

/// Fully connected scalar-output ReLU network. Affine maps alternate with
/// componentwise ReLU; the output layer is affine. Inputs are standardized by
/// the stored normalization vectors when present, and the output is clamped to
/// [-beta, beta] when truncation_beta is set.
struct MlpNetwork {
    std::vector<std::size_t> layer_widths;  // (lambda_0, ..., lambda_L), lambda_L == 1
    std::vector<Matrix> weights;            // A_l: lambda_l x lambda_{l-1}
    std::vector<Vector> biases;
    std::optional<double> truncation_beta;
    Vector norm_mean, norm_sd;  // empty => raw inputs

    std::size_t input_dim() const { return layer_widths.front(); }
    std::size_t n_layers() const { return weights.size(); }

    double forward(std::span<const double> x) const;
};

MlpNetwork mlp_init(std::span<const std::size_t> layer_widths, std::uint64_t seed);

/// Exact gradient of (1/2)|net(x) - y|^2 by reverse accumulation. Truncation,
/// when set, contributes identity inside (-beta, beta) and zero outside.
struct MlpGradient {
    std::vector<Matrix> d_weights;
    std::vector<Vector> d_biases;
};

MlpGradient mlp_gradient(const MlpNetwork& net, std::span<const double> x, double y_target);

struct TrainingConfig {
    std::size_t n_batches = 3000;
    std::size_t batch_size = 4096;
    double lr_initial = 0.01;
    double lr_decay = 0.95;
    std::size_t lr_decay_every = 10;
    std::uint64_t seed = 0;
    double truncation_c = 10.0;  // beta = truncation_c * log(n_batches * batch_size)
    enum class Optimizer { Adam, Sgd } optimizer = Optimizer::Adam;
    // Polyak tail averaging: return the parameter average over the last
    // fraction of batches (0 = last iterate). Damps the terminal-lr
    // oscillation that otherwise leaves a batch-mean offset in the network.
    double tail_average_fraction = 0.0;
};

struct LossTracePoint {
    std::size_t batch;
    double loss;
    double lr;
};

/// Fills X (batch_size x input_dim) and Y (batch_size) with a fresh batch.
using BatchGenerator = std::function<void(std::size_t batch_index, Matrix& x, Vector& y)>;

struct TrainResult {
    MlpNetwork net;
    std::vector<LossTracePoint> trace;
};

/// Empirical-L2-risk training on freshly generated batches with the step-decay
/// schedule. Input normalization is estimated from the first batch; the output
/// truncation bound is installed on the returned network only (the training
/// loss is untruncated).
TrainResult train(MlpNetwork net, const TrainingConfig& config, const BatchGenerator& generator);

/// One-hidden-layer fragment computing |m+n| - |m-n| (= 2 min(m,n) for m,n >= 0).
MlpNetwork build_fsq();

/// Tree of the min gates over the 1-padded input: output > 0 iff all inputs
/// are > 0 on [0,1]^d, exactly 0 otherwise. Depth ceil(log2 d).
MlpNetwork build_fmult(std::size_t d);

/// Ramp gate -relu(-c2 relu(x) + 1) + 1: exactly 1 for x >= 1/c2, exactly 0
/// for x <= 0.
MlpNetwork build_fdemo(double c2, double c5);

/// Versioned binary format, magic "FPNN1".
void save_network(const MlpNetwork& net, std::ostream& out);
MlpNetwork load_network(std::istream& in);

/// CSV columns `batch, loss, lr`.
void export_loss_trace_csv(std::span<const LossTracePoint> trace, std::ostream& out);

}  // namespace fracpredict

#endif
