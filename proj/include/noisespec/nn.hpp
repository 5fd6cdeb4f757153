#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <json.hpp>

#include "noisespec/matrix.hpp"

namespace noisespec::nn {

enum class NetTask { regression, classification };

std::string to_string(NetTask t);

inline constexpr double kProbabilityFloor = 1e-12;
inline constexpr double kAdamRho1 = 0.9;
inline constexpr double kAdamRho2 = 0.999;
inline constexpr double kAdamEpsilon = 1e-8;

struct NetConfig {
    std::vector<int> layers{200, 128, 64, 32, 1};
    NetTask task = NetTask::regression;
    double learning_rate = 1e-4;
    int batch_size = 64;
    int epochs = 3000;
    std::uint64_t seed = 0;
};

struct Gradients {
    std::vector<Eigen::MatrixXd> dW;
    std::vector<Eigen::VectorXd> db;
    double loss = 0.0;
};

/// Fully connected ReLU network. W[l] is fan_in x fan_out, samples are rows.
/// The head is softmax (classification) or ReLU (regression).
class Network {
public:
    Network() = default;
    /// He-normal weights (std sqrt(2 / fan_in)) and zero biases.
    Network(std::vector<int> layers, NetTask task, std::uint64_t seed);

    const std::vector<int>& layers() const noexcept { return layers_; }
    NetTask task() const noexcept { return task_; }
    std::size_t n_layers() const noexcept { return W_.size(); }
    Eigen::MatrixXd& W(std::size_t l) { return W_[l]; }
    Eigen::VectorXd& b(std::size_t l) { return b_[l]; }
    const Eigen::MatrixXd& W(std::size_t l) const { return W_[l]; }
    const Eigen::VectorXd& b(std::size_t l) const { return b_[l]; }

    /// Flat view of all parameters (weights then bias, layer by layer).
    std::size_t parameter_count() const;
    double& parameter(std::size_t k);

    /// Head outputs; throws SimulationError naming the layer on NaN/Inf.
    Matrix forward(const Matrix& X) const;
    /// Batch-mean MSE or cross-entropy. Classification targets are one-hot.
    double loss(const Matrix& X, const Matrix& T) const;
    /// Exact reverse-mode gradient of loss(X, T).
    Gradients backward(const Matrix& X, const Matrix& T) const;

    nlohmann::json to_json() const;
    static Network from_json(const nlohmann::json& j);

private:
    std::vector<int> layers_;
    NetTask task_ = NetTask::regression;
    std::vector<Eigen::MatrixXd> W_;
    std::vector<Eigen::VectorXd> b_;
};

double relu(double x);
/// Row-wise softmax computed through log-sum-exp.
Matrix softmax(const Matrix& Z);
double mse_loss(const Matrix& Y, const Matrix& T);
double cross_entropy_loss(const Matrix& P, const Matrix& T);

struct AdamState {
    std::vector<Eigen::MatrixXd> sW, rW;
    std::vector<Eigen::VectorXd> sb, rb;
    long t = 0;

    explicit AdamState(const Network& net);
};

void adam_step(Network& net, const Gradients& g, AdamState& state, double learning_rate);

/// Trained network plus the regression target shift (predictions subtract it).
struct NetModel {
    Network net;
    double target_offset = 0.0;

    Vector predict(const Matrix& X) const;            // regression value or class index
    Matrix predict_proba(const Matrix& X) const;       // classification only
};

struct TrainLog {
    std::vector<double> train_loss;  // sum of batch means per epoch
    std::vector<double> val_loss;    // mean over the validation rows
    std::vector<double> val_metric;  // accuracy or MSE on the original scale
};

struct TrainResult {
    NetModel model;
    TrainLog log;
};

using EpochCallback = std::function<void(int epoch, double train_loss, double val_loss, double val_metric)>;

/// Mini-batch Adam on shuffled batches; the final-epoch parameters are kept.
/// `labels` are class indices for classification and target values otherwise.
TrainResult train(const Matrix& X, const Vector& labels, const Matrix& X_val, const Vector& labels_val,
                  const NetConfig& cfg, const EpochCallback& on_epoch = {});

/// Shift applied to regression targets so that a ReLU head can reach them.
double target_offset_for(const Vector& y);

} // namespace noisespec::nn
