#include "damf/lstm.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "damf/error.hpp"

namespace damf {

namespace {

using Eigen::MatrixXd;
using Eigen::RowVectorXd;
using Eigen::VectorXd;

MatrixXd sigmoid(const MatrixXd& z) { return (1.0 / (1.0 + (-z.array()).exp())).matrix(); }

void require(bool ok, const char* what) {
    if (!ok) {
        throw Error(ErrorCode::DimensionMismatch, what);
    }
}

void fill_uniform(double* p, std::size_t n, double bound, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> dist(-bound, bound);
    for (std::size_t k = 0; k < n; ++k) {
        p[k] = dist(rng);
    }
}

}  // namespace

LstmWeights::LstmWeights(std::size_t input, std::size_t hidden)
    : W(MatrixXd::Zero(4 * hidden, input)), R(MatrixXd::Zero(4 * hidden, hidden)), b(VectorXd::Zero(4 * hidden)),
      w_out(RowVectorXd::Zero(hidden)) {}

std::size_t LstmWeights::parameter_count() const noexcept {
    const auto sizes = block_sizes();
    return std::accumulate(sizes.begin(), sizes.end(), std::size_t{0});
}

std::vector<double*> LstmWeights::parameter_blocks() { return {W.data(), R.data(), b.data(), w_out.data(), &b_out}; }

std::vector<std::size_t> LstmWeights::block_sizes() const {
    return {static_cast<std::size_t>(W.size()), static_cast<std::size_t>(R.size()), static_cast<std::size_t>(b.size()),
            static_cast<std::size_t>(w_out.size()), 1};
}

bool LstmWeights::operator==(const LstmWeights& o) const {
    return W.rows() == o.W.rows() && W.cols() == o.W.cols() && R.cols() == o.R.cols() && W == o.W && R == o.R &&
           b == o.b && w_out == o.w_out && b_out == o.b_out;
}

LstmState lstm_cell_forward(const VectorXd& x, const LstmState& prev, const LstmWeights& w) {
    const Eigen::Index H = w.R.cols();
    require(x.size() == w.W.cols(), "input length differs from the input weight width");
    require(prev.h.size() == H && prev.c.size() == H, "state length differs from the hidden size");
    const VectorXd z = w.W * x + w.R * prev.h + w.b;
    const VectorXd f = sigmoid(z.segment(0, H));
    const VectorXd g = z.segment(H, H).array().tanh().matrix();
    const VectorXd i = sigmoid(z.segment(2 * H, H));
    const VectorXd o = sigmoid(z.segment(3 * H, H));
    LstmState next;
    next.c = (f.array() * prev.c.array() + i.array() * g.array()).matrix();
    next.h = (o.array() * next.c.array().tanh()).matrix();
    return next;
}

RowVectorXd lstm_forward(const std::vector<MatrixXd>& sequence, const LstmWeights& w, LstmCache* cache,
                         const MatrixXd* dropout_mask) {
    require(!sequence.empty(), "empty input sequence");
    const Eigen::Index H = w.R.cols();
    const Eigen::Index B = sequence.front().cols();
    MatrixXd h = MatrixXd::Zero(H, B);
    MatrixXd c = MatrixXd::Zero(H, B);
    if (cache) {
        cache->steps.clear();
        cache->steps.reserve(sequence.size());
    }
    for (const MatrixXd& x : sequence) {
        require(x.rows() == w.W.cols() && x.cols() == B, "sequence step has the wrong shape");
        MatrixXd z = w.W * x + w.R * h;
        z.colwise() += w.b;
        MatrixXd f = sigmoid(z.topRows(H));
        MatrixXd g = z.middleRows(H, H).array().tanh().matrix();
        MatrixXd i = sigmoid(z.middleRows(2 * H, H));
        MatrixXd o = sigmoid(z.bottomRows(H));
        c = (f.array() * c.array() + i.array() * g.array()).matrix();
        h = (o.array() * c.array().tanh()).matrix();
        if (cache) {
            cache->steps.push_back(LstmStep{x, std::move(f), std::move(g), std::move(i), std::move(o), c, h});
        }
    }
    if (dropout_mask) {
        require(dropout_mask->rows() == H && dropout_mask->cols() == B, "dropout mask has the wrong shape");
        h = (h.array() * dropout_mask->array()).matrix();
    }
    RowVectorXd pred = w.w_out * h;
    pred.array() += w.b_out;
    if (cache) {
        cache->mask = dropout_mask ? *dropout_mask : MatrixXd();
        cache->h_final = h;
    }
    return pred;
}

double lstm_forward(const MatrixXd& sequence, const LstmWeights& w) {
    std::vector<MatrixXd> steps;
    steps.reserve(static_cast<std::size_t>(sequence.rows()));
    for (Eigen::Index t = 0; t < sequence.rows(); ++t) {
        steps.push_back(sequence.row(t).transpose());
    }
    return lstm_forward(steps, w)(0);
}

LstmWeights lstm_backward(const LstmCache& cache, const LstmWeights& w, const RowVectorXd& d_pred) {
    const Eigen::Index H = w.R.cols();
    LstmWeights grad(static_cast<std::size_t>(w.W.cols()), static_cast<std::size_t>(H));
    grad.w_out = d_pred * cache.h_final.transpose();
    grad.b_out = d_pred.sum();

    MatrixXd dh = w.w_out.transpose() * d_pred;
    if (cache.mask.size() > 0) {
        dh = (dh.array() * cache.mask.array()).matrix();
    }
    MatrixXd dc = MatrixXd::Zero(dh.rows(), dh.cols());
    MatrixXd dz(4 * H, dh.cols());
    for (std::size_t t = cache.steps.size(); t-- > 0;) {
        const LstmStep& s = cache.steps[t];
        const MatrixXd zero = MatrixXd::Zero(H, dh.cols());
        const MatrixXd& c_prev = t > 0 ? cache.steps[t - 1].c : zero;
        const MatrixXd& h_prev = t > 0 ? cache.steps[t - 1].h : zero;
        const Eigen::ArrayXXd tc = s.c.array().tanh();
        const Eigen::ArrayXXd d_o = dh.array() * tc;
        dc = (dc.array() + dh.array() * s.o.array() * (1.0 - tc * tc)).matrix();
        dz.topRows(H) = (dc.array() * c_prev.array() * s.f.array() * (1.0 - s.f.array())).matrix();
        dz.middleRows(H, H) = (dc.array() * s.i.array() * (1.0 - s.g.array() * s.g.array())).matrix();
        dz.middleRows(2 * H, H) = (dc.array() * s.g.array() * s.i.array() * (1.0 - s.i.array())).matrix();
        dz.bottomRows(H) = (d_o * s.o.array() * (1.0 - s.o.array())).matrix();
        grad.W.noalias() += dz * s.x.transpose();
        grad.R.noalias() += dz * h_prev.transpose();
        grad.b += dz.rowwise().sum();
        dh = w.R.transpose() * dz;
        dc = (dc.array() * s.f.array()).matrix();
    }
    return grad;
}

FfecWeights::FfecWeights(std::size_t input, std::size_t layer1, std::size_t layer2)
    : W1(MatrixXd::Zero(layer1, input)), b1(VectorXd::Zero(layer1)), W2(MatrixXd::Zero(layer2, layer1)),
      b2(VectorXd::Zero(layer2)), w3(RowVectorXd::Zero(layer2)) {}

std::size_t FfecWeights::parameter_count() const noexcept {
    const auto sizes = block_sizes();
    return std::accumulate(sizes.begin(), sizes.end(), std::size_t{0});
}

std::vector<double*> FfecWeights::parameter_blocks() {
    return {W1.data(), b1.data(), W2.data(), b2.data(), w3.data(), &b3};
}

std::vector<std::size_t> FfecWeights::block_sizes() const {
    return {static_cast<std::size_t>(W1.size()), static_cast<std::size_t>(b1.size()),
            static_cast<std::size_t>(W2.size()), static_cast<std::size_t>(b2.size()),
            static_cast<std::size_t>(w3.size()), 1};
}

bool FfecWeights::operator==(const FfecWeights& o) const {
    return W1.rows() == o.W1.rows() && W1.cols() == o.W1.cols() && W2.rows() == o.W2.rows() && W1 == o.W1 &&
           b1 == o.b1 && W2 == o.W2 && b2 == o.b2 && w3 == o.w3 && b3 == o.b3;
}

RowVectorXd ffec_forward(const MatrixXd& u, const FfecWeights& w, FfecCache* cache) {
    require(u.rows() == w.W1.cols(), "corrector input has the wrong length");
    MatrixXd a1 = w.W1 * u;
    a1.colwise() += w.b1;
    MatrixXd z1 = a1.cwiseMax(0.0);
    MatrixXd a2 = w.W2 * z1;
    a2.colwise() += w.b2;
    MatrixXd z2 = a2.cwiseMax(0.0);
    RowVectorXd out = w.w3 * z2;
    out.array() += w.b3;
    if (cache) {
        *cache = FfecCache{u, std::move(a1), std::move(z1), std::move(a2), std::move(z2)};
    }
    return out;
}

FfecWeights ffec_backward(const FfecCache& cache, const FfecWeights& w, const RowVectorXd& d_out) {
    FfecWeights grad(static_cast<std::size_t>(w.W1.cols()), static_cast<std::size_t>(w.W1.rows()),
                     static_cast<std::size_t>(w.W2.rows()));
    grad.w3 = d_out * cache.z2.transpose();
    grad.b3 = d_out.sum();
    const MatrixXd da2 = ((w.w3.transpose() * d_out).array() * (cache.a2.array() > 0.0).cast<double>()).matrix();
    grad.W2 = da2 * cache.z1.transpose();
    grad.b2 = da2.rowwise().sum();
    const MatrixXd da1 = ((w.W2.transpose() * da2).array() * (cache.a1.array() > 0.0).cast<double>()).matrix();
    grad.W1 = da1 * cache.u.transpose();
    grad.b1 = da1.rowwise().sum();
    return grad;
}

double ffec_correct(double lstm_pred, std::span<const double> history, const FfecWeights& w) {
    require(history.size() + 1 == w.input_size(), "history length differs from the corrector input");
    MatrixXd u(history.size() + 1, 1);
    u(0, 0) = lstm_pred;
    for (std::size_t k = 0; k < history.size(); ++k) {
        u(static_cast<Eigen::Index>(k + 1), 0) = history[k];
    }
    return ffec_forward(u, w)(0);
}

void adam_step(std::span<double> params, std::span<const double> grads, AdamMoments& moments, long t,
               const AdamConfig& cfg) {
    if (t < 1 || grads.size() != params.size()) {
        throw Error(ErrorCode::InvalidArgument, "adam_step needs t >= 1 and one gradient per parameter");
    }
    if (moments.m.size() != params.size()) {
        moments.m.assign(params.size(), 0.0);
        moments.v.assign(params.size(), 0.0);
    }
    const double c1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(t));
    const double c2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(t));
    for (std::size_t k = 0; k < params.size(); ++k) {
        moments.m[k] = cfg.beta1 * moments.m[k] + (1.0 - cfg.beta1) * grads[k];
        moments.v[k] = cfg.beta2 * moments.v[k] + (1.0 - cfg.beta2) * grads[k] * grads[k];
        const double m_hat = moments.m[k] / c1;
        const double v_hat = moments.v[k] / c2;
        params[k] -= cfg.learning_rate * m_hat / (std::sqrt(v_hat) + cfg.epsilon);
    }
}

void TrainConfig::validate() const {
    auto fail = [](const char* what) { throw Error(ErrorCode::InvalidArgument, what); };
    if (units == 0) fail("units must be >= 1");
    if (!(dropout >= 0.0 && dropout < 1.0)) fail("dropout must be in [0, 1)");
    if (!(lstm_learning_rate > 0.0) || !(ffec_learning_rate > 0.0)) fail("learning rates must be > 0");
    if (lstm_epochs < 0 || ffec_epochs < 0) fail("epochs must be >= 0");
    if (batch == 0) fail("batch must be >= 1");
    if (ffec_layer1 == 0 || ffec_layer2 == 0) fail("corrector layers must be >= 1");
    if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0)) fail("Adam betas must be in [0, 1)");
    if (!(epsilon > 0.0)) fail("Adam epsilon must be > 0");
}

std::vector<MatrixXd> lstm_inputs(const SupervisedDataset& ds, std::span<const std::size_t> rows) {
    const std::size_t n = ds.lag_depth;
    const std::size_t exo = ds.exogenous_count();
    const std::size_t input = 1 + exo + 2;
    const bool calendar = ds.categorical_slots.size() == 2;
    std::vector<MatrixXd> steps(n, MatrixXd::Zero(static_cast<Eigen::Index>(input), static_cast<Eigen::Index>(rows.size())));
    for (std::size_t j = 0; j < rows.size(); ++j) {
        const auto x = ds.X.row(rows[j]);
        const auto col = static_cast<Eigen::Index>(j);
        const double hour = calendar ? x[ds.categorical_slots[0]] / 23.0 : 0.0;
        const double dow = calendar ? x[ds.categorical_slots[1]] / 6.0 : 0.0;
        for (std::size_t s = 0; s < n; ++s) {
            MatrixXd& m = steps[s];
            m(0, col) = x[s];
            for (std::size_t e = 0; e < exo; ++e) {
                m(static_cast<Eigen::Index>(1 + e), col) = x[n + e];
            }
            m(static_cast<Eigen::Index>(1 + exo), col) = hour;
            m(static_cast<Eigen::Index>(2 + exo), col) = dow;
        }
    }
    return steps;
}

MatrixXd ffec_inputs(const SupervisedDataset& ds, std::span<const std::size_t> rows, const RowVectorXd& lstm_pred) {
    const std::size_t n = ds.lag_depth;
    MatrixXd u(static_cast<Eigen::Index>(n + 1), static_cast<Eigen::Index>(rows.size()));
    for (std::size_t j = 0; j < rows.size(); ++j) {
        const auto x = ds.X.row(rows[j]);
        const auto col = static_cast<Eigen::Index>(j);
        u(0, col) = lstm_pred(col);
        for (std::size_t s = 0; s < n; ++s) {
            u(static_cast<Eigen::Index>(s + 1), col) = x[s];
        }
    }
    return u;
}

LstmFfecModel init_lstm_ffec(std::size_t lag_depth, std::size_t exogenous, const TrainConfig& cfg) {
    cfg.validate();
    std::mt19937_64 rng(cfg.seed);
    LstmFfecModel model;
    model.lag_depth = lag_depth;
    model.exogenous = exogenous;
    const std::size_t input = 1 + exogenous + 2;
    const std::size_t H = cfg.units;
    model.lstm = LstmWeights(input, H);
    const double lstm_bound = 1.0 / std::sqrt(static_cast<double>(input + H));
    fill_uniform(model.lstm.W.data(), static_cast<std::size_t>(model.lstm.W.size()), lstm_bound, rng);
    fill_uniform(model.lstm.R.data(), static_cast<std::size_t>(model.lstm.R.size()), lstm_bound, rng);
    model.lstm.b.segment(0, static_cast<Eigen::Index>(H)).setOnes();
    fill_uniform(model.lstm.w_out.data(), H, 1.0 / std::sqrt(static_cast<double>(H)), rng);

    model.ffec = FfecWeights(lag_depth + 1, cfg.ffec_layer1, cfg.ffec_layer2);
    fill_uniform(model.ffec.W1.data(), static_cast<std::size_t>(model.ffec.W1.size()),
                 1.0 / std::sqrt(static_cast<double>(lag_depth + 1)), rng);
    fill_uniform(model.ffec.W2.data(), static_cast<std::size_t>(model.ffec.W2.size()),
                 1.0 / std::sqrt(static_cast<double>(cfg.ffec_layer1)), rng);
    fill_uniform(model.ffec.w3.data(), cfg.ffec_layer2, 1.0 / std::sqrt(static_cast<double>(cfg.ffec_layer2)), rng);
    return model;
}

namespace {

template <typename Weights>
void apply_adam(Weights& w, Weights& g, std::vector<AdamMoments>& moments, long t, const AdamConfig& cfg) {
    const std::vector<double*> pw = w.parameter_blocks();
    const std::vector<double*> pg = g.parameter_blocks();
    const std::vector<std::size_t> sizes = w.block_sizes();
    moments.resize(sizes.size());
    for (std::size_t k = 0; k < sizes.size(); ++k) {
        adam_step(std::span<double>(pw[k], sizes[k]), std::span<const double>(pg[k], sizes[k]), moments[k], t, cfg);
    }
}

RowVectorXd mae_gradient(const RowVectorXd& pred, const RowVectorXd& target) {
    const double scale = 1.0 / static_cast<double>(pred.size());
    RowVectorXd d(pred.size());
    for (Eigen::Index k = 0; k < pred.size(); ++k) {
        const double diff = pred(k) - target(k);
        d(k) = diff > 0.0 ? scale : (diff < 0.0 ? -scale : 0.0);
    }
    return d;
}

std::vector<std::vector<std::size_t>> epoch_batches(std::size_t n, std::size_t batch, std::mt19937_64& rng) {
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::shuffle(order.begin(), order.end(), rng);
    std::vector<std::vector<std::size_t>> out;
    for (std::size_t first = 0; first < n; first += batch) {
        out.emplace_back(order.begin() + static_cast<std::ptrdiff_t>(first),
                         order.begin() + static_cast<std::ptrdiff_t>(std::min(n, first + batch)));
    }
    return out;
}

RowVectorXd targets_of(const SupervisedDataset& ds, std::span<const std::size_t> rows) {
    RowVectorXd y(static_cast<Eigen::Index>(rows.size()));
    for (std::size_t j = 0; j < rows.size(); ++j) {
        y(static_cast<Eigen::Index>(j)) = ds.y[rows[j]];
    }
    return y;
}

constexpr std::size_t kPredictChunk = 256;

template <typename Fn>
std::vector<double> predict_chunks(const SupervisedDataset& ds, Fn&& fn) {
    std::vector<double> out(ds.size());
    std::vector<std::size_t> rows;
    for (std::size_t first = 0; first < ds.size(); first += kPredictChunk) {
        rows.clear();
        for (std::size_t r = first; r < std::min(ds.size(), first + kPredictChunk); ++r) {
            rows.push_back(r);
        }
        const RowVectorXd p = fn(rows);
        for (std::size_t j = 0; j < rows.size(); ++j) {
            out[rows[j]] = p(static_cast<Eigen::Index>(j));
        }
    }
    return out;
}

void check_layout(const LstmFfecModel& model, const SupervisedDataset& ds) {
    if (ds.lag_depth != model.lag_depth || ds.exogenous_count() != model.exogenous) {
        throw Error(ErrorCode::FeatureCountMismatch, "dataset layout differs from the trained network");
    }
}

}  // namespace

LstmFfecModel train_lstm_ffec(const SupervisedDataset& train, const TrainConfig& cfg) {
    cfg.validate();
    if (train.size() == 0) {
        throw Error(ErrorCode::EmptyDataset, "no training rows");
    }
    if (train.lag_depth == 0) {
        throw Error(ErrorCode::InvalidArgument, "dataset has no lag columns");
    }
    LstmFfecModel model = init_lstm_ffec(train.lag_depth, train.exogenous_count(), cfg);
    std::mt19937_64 rng(cfg.seed ^ 0x9e3779b97f4a7c15ULL);
    const auto H = static_cast<Eigen::Index>(cfg.units);

    AdamConfig lstm_adam{cfg.lstm_learning_rate, cfg.beta1, cfg.beta2, cfg.epsilon};
    std::vector<AdamMoments> lstm_moments;
    long t = 0;
    std::bernoulli_distribution keep(1.0 - cfg.dropout);
    const double keep_scale = 1.0 / (1.0 - cfg.dropout);
    for (int epoch = 0; epoch < cfg.lstm_epochs; ++epoch) {
        for (const auto& rows : epoch_batches(train.size(), cfg.batch, rng)) {
            const auto inputs = lstm_inputs(train, rows);
            MatrixXd mask(H, static_cast<Eigen::Index>(rows.size()));
            for (Eigen::Index k = 0; k < mask.size(); ++k) {
                mask.data()[k] = cfg.dropout > 0.0 ? (keep(rng) ? keep_scale : 0.0) : 1.0;
            }
            LstmCache cache;
            const RowVectorXd pred = lstm_forward(inputs, model.lstm, &cache, &mask);
            LstmWeights grad = lstm_backward(cache, model.lstm, mae_gradient(pred, targets_of(train, rows)));
            apply_adam(model.lstm, grad, lstm_moments, ++t, lstm_adam);
        }
    }

    // Stage two: the LSTM is frozen and only the corrector learns.
    AdamConfig ffec_adam{cfg.ffec_learning_rate, cfg.beta1, cfg.beta2, cfg.epsilon};
    std::vector<AdamMoments> ffec_moments;
    const std::vector<double> stage_one = lstm_predict(model, train);
    t = 0;
    for (int epoch = 0; epoch < cfg.ffec_epochs; ++epoch) {
        for (const auto& rows : epoch_batches(train.size(), cfg.batch, rng)) {
            RowVectorXd lp(static_cast<Eigen::Index>(rows.size()));
            for (std::size_t j = 0; j < rows.size(); ++j) {
                lp(static_cast<Eigen::Index>(j)) = stage_one[rows[j]];
            }
            FfecCache cache;
            const RowVectorXd out = ffec_forward(ffec_inputs(train, rows, lp), model.ffec, &cache);
            FfecWeights grad = ffec_backward(cache, model.ffec, mae_gradient(out, targets_of(train, rows)));
            apply_adam(model.ffec, grad, ffec_moments, ++t, ffec_adam);
        }
    }
    return model;
}

std::vector<double> lstm_predict(const LstmFfecModel& model, const SupervisedDataset& ds) {
    check_layout(model, ds);
    return predict_chunks(ds, [&](std::span<const std::size_t> rows) {
        return lstm_forward(lstm_inputs(ds, rows), model.lstm);
    });
}

std::vector<double> lstm_ffec_predict(const LstmFfecModel& model, const SupervisedDataset& ds) {
    check_layout(model, ds);
    return predict_chunks(ds, [&](std::span<const std::size_t> rows) {
        const RowVectorXd lp = lstm_forward(lstm_inputs(ds, rows), model.lstm);
        return ffec_forward(ffec_inputs(ds, rows, lp), model.ffec);
    });
}

}  // namespace damf
