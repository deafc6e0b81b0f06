#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "damf/dataset.hpp"
#include "damf/matrix.hpp"

namespace damf {

// Gate blocks are stacked in the order f, g, i, o (hidden rows each).
struct LstmWeights {
    Eigen::MatrixXd W;      // 4H x input
    Eigen::MatrixXd R;      // 4H x H
    Eigen::VectorXd b;      // 4H
    Eigen::RowVectorXd w_out;  // 1 x H
    double b_out = 0.0;

    LstmWeights() = default;
    LstmWeights(std::size_t input, std::size_t hidden);  // zero-filled

    std::size_t input_size() const noexcept { return static_cast<std::size_t>(W.cols()); }
    std::size_t hidden_size() const noexcept { return static_cast<std::size_t>(R.cols()); }
    std::size_t parameter_count() const noexcept;
    std::vector<double*> parameter_blocks();  // aligned with block_sizes()
    std::vector<std::size_t> block_sizes() const;
    bool operator==(const LstmWeights& o) const;
};

struct LstmState {
    Eigen::VectorXd h;
    Eigen::VectorXd c;
};

LstmState lstm_cell_forward(const Eigen::VectorXd& x, const LstmState& prev, const LstmWeights& w);

// One sequence step over a batch (samples as columns).
struct LstmStep {
    Eigen::MatrixXd x;
    Eigen::MatrixXd f, g, i, o;
    Eigen::MatrixXd c, h;
};

struct LstmCache {
    std::vector<LstmStep> steps;
    Eigen::MatrixXd mask;     // dropout multipliers on the final h (empty: none)
    Eigen::MatrixXd h_final;  // after dropout
};

// `sequence` holds one input x batch matrix per time step, oldest first.
// Starts from the zero state and projects the final hidden state.
Eigen::RowVectorXd lstm_forward(const std::vector<Eigen::MatrixXd>& sequence, const LstmWeights& w,
                                LstmCache* cache = nullptr, const Eigen::MatrixXd* dropout_mask = nullptr);
// Single sample: rows are time steps.
double lstm_forward(const Eigen::MatrixXd& sequence, const LstmWeights& w);

// Gradients of a scalar loss given d loss / d prediction per sample.
LstmWeights lstm_backward(const LstmCache& cache, const LstmWeights& w, const Eigen::RowVectorXd& d_pred);

struct FfecWeights {
    Eigen::MatrixXd W1;
    Eigen::VectorXd b1;
    Eigen::MatrixXd W2;
    Eigen::VectorXd b2;
    Eigen::RowVectorXd w3;
    double b3 = 0.0;

    FfecWeights() = default;
    FfecWeights(std::size_t input, std::size_t layer1, std::size_t layer2);  // zero-filled

    std::size_t input_size() const noexcept { return static_cast<std::size_t>(W1.cols()); }
    std::size_t parameter_count() const noexcept;
    std::vector<double*> parameter_blocks();
    std::vector<std::size_t> block_sizes() const;
    bool operator==(const FfecWeights& o) const;
};

struct FfecCache {
    Eigen::MatrixXd u, a1, z1, a2, z2;
};

// Columns of `u` are [lstm prediction, history...].
Eigen::RowVectorXd ffec_forward(const Eigen::MatrixXd& u, const FfecWeights& w, FfecCache* cache = nullptr);
FfecWeights ffec_backward(const FfecCache& cache, const FfecWeights& w, const Eigen::RowVectorXd& d_out);
double ffec_correct(double lstm_pred, std::span<const double> history, const FfecWeights& w);

struct AdamConfig {
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

struct AdamMoments {
    std::vector<double> m;
    std::vector<double> v;
};

// One Adam update at step t >= 1 with bias-corrected moments.
void adam_step(std::span<double> params, std::span<const double> grads, AdamMoments& moments, long t,
               const AdamConfig& cfg);

struct TrainConfig {
    std::size_t units = 200;
    double dropout = 0.2;
    double lstm_learning_rate = 1e-4;
    double ffec_learning_rate = 1e-3;
    int lstm_epochs = 200;
    int ffec_epochs = 200;
    std::size_t batch = 256;
    std::size_t ffec_layer1 = 256;
    std::size_t ffec_layer2 = 128;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    std::uint64_t seed = 42;

    void validate() const;
};

struct LstmFfecModel {
    LstmWeights lstm;
    FfecWeights ffec;
    std::size_t lag_depth = 0;
    std::size_t exogenous = 0;

    bool operator==(const LstmFfecModel& o) const = default;
};

// Per-step LSTM input for each row: [lag price, exogenous values at the target
// hour, hour/23, day/6], one step per lag (oldest first).
std::vector<Eigen::MatrixXd> lstm_inputs(const SupervisedDataset& ds, std::span<const std::size_t> rows);
// FFEC input columns: [lstm prediction, the row's lag prices].
Eigen::MatrixXd ffec_inputs(const SupervisedDataset& ds, std::span<const std::size_t> rows,
                            const Eigen::RowVectorXd& lstm_pred);

LstmFfecModel init_lstm_ffec(std::size_t lag_depth, std::size_t exogenous, const TrainConfig& cfg);
LstmFfecModel train_lstm_ffec(const SupervisedDataset& train, const TrainConfig& cfg);
std::vector<double> lstm_ffec_predict(const LstmFfecModel& model, const SupervisedDataset& ds);
// Stage-one output only.
std::vector<double> lstm_predict(const LstmFfecModel& model, const SupervisedDataset& ds);

}  // namespace damf
