#include "noisespec/nn.hpp"

#include <cmath>
#include <numeric>

#include "noisespec/error.hpp"
#include "noisespec/rng.hpp"

namespace noisespec::nn {
namespace {

const double kLogFloor = std::log(kProbabilityFloor);

// Standard normal from two uniforms (Box-Muller); platform independent,
// unlike std::normal_distribution.
double gaussian(std::mt19937_64& g)
{
    double u1 = 0.0;
    while (u1 <= 0.0) u1 = uniform01(g);
    const double u2 = uniform01(g);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.14159265358979323846 * u2);
}

Matrix log_softmax(const Matrix& Z)
{
    Matrix out(Z.rows(), Z.cols());
    for (Eigen::Index i = 0; i < Z.rows(); ++i) {
        const double m = Z.row(i).maxCoeff();
        const double lse = m + std::log((Z.row(i).array() - m).exp().sum());
        out.row(i) = Z.row(i).array() - lse;
    }
    return out;
}

void check_finite(const Matrix& A, std::size_t layer)
{
    if (!A.allFinite())
        throw SimulationError("non-finite activation in layer " + std::to_string(layer + 1));
}

Matrix one_hot(const Vector& labels, int classes)
{
    Matrix T = Matrix::Zero(labels.size(), classes);
    for (Eigen::Index i = 0; i < labels.size(); ++i) {
        const auto c = static_cast<Eigen::Index>(labels[i]);
        if (c < 0 || c >= classes) throw DomainError("class label out of range");
        T(i, c) = 1.0;
    }
    return T;
}

Matrix rows_of(const Matrix& A, const std::vector<Eigen::Index>& idx, std::size_t begin, std::size_t end)
{
    Matrix out(static_cast<Eigen::Index>(end - begin), A.cols());
    for (std::size_t k = begin; k < end; ++k) out.row(static_cast<Eigen::Index>(k - begin)) = A.row(idx[k]);
    return out;
}

} // namespace

std::string to_string(NetTask t) { return t == NetTask::regression ? "regression" : "classification"; }

double relu(double x) { return x > 0.0 ? x : 0.0; }

Matrix softmax(const Matrix& Z) { return log_softmax(Z).array().exp(); }

double mse_loss(const Matrix& Y, const Matrix& T)
{
    if (Y.rows() != T.rows() || Y.cols() != T.cols()) throw ShapeError("mse_loss: shape mismatch");
    return (Y - T).array().square().sum() / static_cast<double>(Y.rows());
}

double cross_entropy_loss(const Matrix& P, const Matrix& T)
{
    if (P.rows() != T.rows() || P.cols() != T.cols()) throw ShapeError("cross_entropy_loss: shape mismatch");
    double acc = 0.0;
    for (Eigen::Index i = 0; i < P.rows(); ++i)
        for (Eigen::Index c = 0; c < P.cols(); ++c)
            if (T(i, c) != 0.0) acc -= T(i, c) * std::log(std::max(P(i, c), kProbabilityFloor));
    return acc / static_cast<double>(P.rows());
}

Network::Network(std::vector<int> layers, NetTask task, std::uint64_t seed)
    : layers_(std::move(layers)), task_(task)
{
    if (layers_.size() < 2) throw DomainError("network needs at least input and output layers");
    for (const int n : layers_)
        if (n < 1) throw DomainError("layer sizes must be >= 1");
    auto g = derive_stream(seed, 0);
    for (std::size_t l = 0; l + 1 < layers_.size(); ++l) {
        const int in = layers_[l], out = layers_[l + 1];
        const double sd = std::sqrt(2.0 / in);
        Eigen::MatrixXd w(in, out);
        for (Eigen::Index j = 0; j < out; ++j)
            for (Eigen::Index i = 0; i < in; ++i) w(i, j) = sd * gaussian(g);
        W_.push_back(std::move(w));
        b_.push_back(Eigen::VectorXd::Zero(out));
    }
}

std::size_t Network::parameter_count() const
{
    std::size_t n = 0;
    for (std::size_t l = 0; l < W_.size(); ++l) n += static_cast<std::size_t>(W_[l].size() + b_[l].size());
    return n;
}

double& Network::parameter(std::size_t k)
{
    for (std::size_t l = 0; l < W_.size(); ++l) {
        const auto nw = static_cast<std::size_t>(W_[l].size());
        if (k < nw) return W_[l].data()[k];
        k -= nw;
        const auto nb = static_cast<std::size_t>(b_[l].size());
        if (k < nb) return b_[l].data()[k];
        k -= nb;
    }
    throw DomainError("parameter index out of range");
}

Matrix Network::forward(const Matrix& X) const
{
    if (X.cols() != layers_.front())
        throw ShapeError("network: expected " + std::to_string(layers_.front()) + " inputs, got " +
                         std::to_string(X.cols()));
    Matrix A = X;
    for (std::size_t l = 0; l < W_.size(); ++l) {
        Matrix Z = A * W_[l];
        Z.rowwise() += b_[l].transpose();
        check_finite(Z, l);
        const bool head = l + 1 == W_.size();
        if (head && task_ == NetTask::classification) return softmax(Z);
        A = Z.cwiseMax(0.0);
    }
    return A;
}

double Network::loss(const Matrix& X, const Matrix& T) const
{
    const Matrix Y = forward(X);
    return task_ == NetTask::classification ? cross_entropy_loss(Y, T) : mse_loss(Y, T);
}

Gradients Network::backward(const Matrix& X, const Matrix& T) const
{
    if (X.rows() != T.rows() || T.cols() != layers_.back()) throw ShapeError("backward: target shape");
    const std::size_t L = W_.size();
    const auto B = static_cast<double>(X.rows());
    std::vector<Matrix> A(L + 1), Z(L);
    A[0] = X;
    for (std::size_t l = 0; l < L; ++l) {
        Z[l] = A[l] * W_[l];
        Z[l].rowwise() += b_[l].transpose();
        check_finite(Z[l], l);
        A[l + 1] = Z[l].cwiseMax(0.0);
    }

    Gradients g;
    g.dW.resize(L);
    g.db.resize(L);
    Matrix dZ(Z[L - 1].rows(), Z[L - 1].cols());
    if (task_ == NetTask::classification) {
        const Matrix logp = log_softmax(Z[L - 1]);
        double loss = 0.0;
        for (Eigen::Index i = 0; i < logp.rows(); ++i) {
            bool clipped = false;
            for (Eigen::Index c = 0; c < logp.cols(); ++c)
                if (T(i, c) != 0.0) {
                    if (logp(i, c) < kLogFloor) clipped = true;
                    loss -= T(i, c) * std::max(logp(i, c), kLogFloor);
                }
            dZ.row(i) = clipped ? Eigen::RowVectorXd::Zero(logp.cols())
                                : Eigen::RowVectorXd(logp.row(i).array().exp().matrix() - T.row(i));
        }
        g.loss = loss / B;
        dZ /= B;
    } else {
        const Matrix& Y = A[L];
        g.loss = mse_loss(Y, T);
        dZ = (2.0 / B) * (Y - T);
        dZ = dZ.cwiseProduct((Z[L - 1].array() > 0.0).cast<double>().matrix());
    }
    for (std::size_t l = L; l-- > 0;) {
        g.dW[l] = A[l].transpose() * dZ;
        g.db[l] = dZ.colwise().sum().transpose();
        if (l > 0) {
            Matrix dA = dZ * W_[l].transpose();
            dZ = dA.cwiseProduct((Z[l - 1].array() > 0.0).cast<double>().matrix());
        }
    }
    return g;
}

nlohmann::json Network::to_json() const
{
    nlohmann::json weights = nlohmann::json::array(), biases = nlohmann::json::array();
    for (std::size_t l = 0; l < W_.size(); ++l) {
        // Row-major (fan_in rows).
        std::vector<double> w;
        w.reserve(static_cast<std::size_t>(W_[l].size()));
        for (Eigen::Index i = 0; i < W_[l].rows(); ++i)
            for (Eigen::Index j = 0; j < W_[l].cols(); ++j) w.push_back(W_[l](i, j));
        weights.push_back(std::move(w));
        biases.push_back(std::vector<double>(b_[l].data(), b_[l].data() + b_[l].size()));
    }
    return {{"layers", layers_}, {"task", to_string(task_)}, {"weights", weights}, {"biases", biases}};
}

Network Network::from_json(const nlohmann::json& j)
{
    Network net;
    net.layers_ = j.at("layers").get<std::vector<int>>();
    net.task_ = j.at("task").get<std::string>() == "classification" ? NetTask::classification : NetTask::regression;
    const auto& weights = j.at("weights");
    const auto& biases = j.at("biases");
    if (net.layers_.size() < 2 || weights.size() != net.layers_.size() - 1 || biases.size() != weights.size())
        throw ShapeError("network model: layer count mismatch");
    for (std::size_t l = 0; l + 1 < net.layers_.size(); ++l) {
        const int in = net.layers_[l], out = net.layers_[l + 1];
        const auto w = weights[l].get<std::vector<double>>();
        const auto b = biases[l].get<std::vector<double>>();
        if (w.size() != static_cast<std::size_t>(in) * static_cast<std::size_t>(out) ||
            b.size() != static_cast<std::size_t>(out))
            throw ShapeError("network model: parameter shape mismatch in layer " + std::to_string(l + 1));
        Eigen::MatrixXd W(in, out);
        for (int i = 0; i < in; ++i)
            for (int k = 0; k < out; ++k) W(i, k) = w[static_cast<std::size_t>(i) * static_cast<std::size_t>(out) + static_cast<std::size_t>(k)];
        net.W_.push_back(std::move(W));
        net.b_.push_back(Eigen::Map<const Eigen::VectorXd>(b.data(), out));
    }
    return net;
}

AdamState::AdamState(const Network& net)
{
    for (std::size_t l = 0; l < net.n_layers(); ++l) {
        sW.push_back(Eigen::MatrixXd::Zero(net.W(l).rows(), net.W(l).cols()));
        rW.push_back(Eigen::MatrixXd::Zero(net.W(l).rows(), net.W(l).cols()));
        sb.push_back(Eigen::VectorXd::Zero(net.b(l).size()));
        rb.push_back(Eigen::VectorXd::Zero(net.b(l).size()));
    }
}

void adam_step(Network& net, const Gradients& g, AdamState& st, double lr)
{
    ++st.t;
    const double c1 = 1.0 - std::pow(kAdamRho1, static_cast<double>(st.t));
    const double c2 = 1.0 - std::pow(kAdamRho2, static_cast<double>(st.t));
    const auto step = [&](auto& theta, const auto& grad, auto& s, auto& r) {
        s = kAdamRho1 * s + (1.0 - kAdamRho1) * grad;
        r = kAdamRho2 * r + (1.0 - kAdamRho2) * grad.cwiseProduct(grad);
        theta.array() -= lr * (s.array() / c1) / ((r.array() / c2).sqrt() + kAdamEpsilon);
    };
    for (std::size_t l = 0; l < net.n_layers(); ++l) {
        step(net.W(l), g.dW[l], st.sW[l], st.rW[l]);
        step(net.b(l), g.db[l], st.sb[l], st.rb[l]);
    }
}

Vector NetModel::predict(const Matrix& X) const
{
    const Matrix Y = net.forward(X);
    Vector out(Y.rows());
    for (Eigen::Index i = 0; i < Y.rows(); ++i) {
        if (net.task() == NetTask::classification) {
            Eigen::Index c = 0;
            Y.row(i).maxCoeff(&c);
            out[i] = static_cast<double>(c);
        } else {
            out[i] = Y(i, 0) - target_offset;
        }
    }
    return out;
}

Matrix NetModel::predict_proba(const Matrix& X) const
{
    if (net.task() != NetTask::classification) throw TaskMismatchError("probabilities need a classifier");
    return net.forward(X);
}

double target_offset_for(const Vector& y)
{
    const double lo = y.minCoeff(), hi = y.maxCoeff();
    if (lo > 0.0) return 0.0;
    return -lo + 0.1 * std::max(hi - lo, 1e-12);
}

TrainResult train(const Matrix& X, const Vector& labels, const Matrix& X_val, const Vector& labels_val,
                  const NetConfig& cfg, const EpochCallback& on_epoch)
{
    if (X.rows() < 1 || X.rows() != labels.size()) throw ShapeError("train: X and labels differ in length");
    if (X_val.rows() != labels_val.size()) throw ShapeError("train: validation shape");
    if (cfg.batch_size < 1 || cfg.epochs < 1) throw DomainError("train: batch size and epochs must be >= 1");
    if (!(cfg.learning_rate > 0.0)) throw DomainError("train: learning rate must be > 0");
    if (cfg.layers.front() != X.cols()) throw ShapeError("train: input layer does not match feature width");
    const bool classify = cfg.task == NetTask::classification;
    if (!classify && cfg.layers.back() != 1) throw DomainError("train: regression needs one output");

    TrainResult res;
    res.model.net = Network(cfg.layers, cfg.task, cfg.seed);
    res.model.target_offset = classify ? 0.0 : target_offset_for(labels);
    const auto targets = [&](const Vector& v) -> Matrix {
        if (classify) return one_hot(v, cfg.layers.back());
        return (v.array() + res.model.target_offset).matrix();
    };
    const Matrix T = targets(labels);
    const Matrix T_val = X_val.rows() > 0 ? targets(labels_val) : Matrix();

    Network& net = res.model.net;
    // Start the ReLU head at the best constant predictor. With random head
    // weights the early Adam steps can push every row below zero, after which
    // the head never receives a gradient again.
    if (!classify) {
        const std::size_t last = net.n_layers() - 1;
        net.W(last).setZero();
        net.b(last)[0] = T.mean();
    }
    AdamState state(net);
    std::vector<Eigen::Index> order(static_cast<std::size_t>(X.rows()));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    const auto bs = static_cast<std::size_t>(cfg.batch_size);

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        auto g = derive_stream(cfg.seed, 1 + static_cast<std::uint64_t>(epoch));
        shuffle(order.begin(), order.end(), g);
        double epoch_loss = 0.0;
        for (std::size_t begin = 0; begin < order.size(); begin += bs) {
            const std::size_t end = std::min(order.size(), begin + bs);
            const Gradients grad = net.backward(rows_of(X, order, begin, end), rows_of(T, order, begin, end));
            if (!std::isfinite(grad.loss))
                throw SimulationError("training diverged at epoch " + std::to_string(epoch + 1));
            epoch_loss += grad.loss;
            adam_step(net, grad, state, cfg.learning_rate);
        }
        double val_loss = 0.0, metric = 0.0;
        if (X_val.rows() > 0) {
            const Matrix Y = net.forward(X_val);
            if (classify) {
                val_loss = cross_entropy_loss(Y, T_val);
                const Vector pred = res.model.predict(X_val);
                metric = (pred.array() == labels_val.array()).cast<double>().mean();
            } else {
                val_loss = mse_loss(Y, T_val);
                metric = val_loss;
            }
        }
        res.log.train_loss.push_back(epoch_loss);
        res.log.val_loss.push_back(val_loss);
        res.log.val_metric.push_back(metric);
        if (on_epoch) on_epoch(epoch + 1, epoch_loss, val_loss, metric);
    }
    return res;
}

} // namespace noisespec::nn
