#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "noisespec/matrix.hpp"

namespace noisespec::svr {

enum class KernelType { linear, poly, rbf };

std::string to_string(KernelType k);
KernelType parse_kernel(const std::string& s);

/// linear: <a, b>; poly: (gamma <a, b> + coef0)^degree; rbf: exp(-gamma |a - b|^2).
struct Kernel {
    KernelType type = KernelType::rbf;
    double gamma = 0.0;  // 0: 1 / (p * mean feature variance) at fit time
    int degree = 3;
    double coef0 = 1.0;

    double operator()(const double* a, const double* b, Eigen::Index p) const;
};

struct SvrConfig {
    Kernel kernel;
    double C = 1.0;
    double epsilon = 0.01;
    double tol = 1e-3;          // maximal KKT violation at termination
    long max_iter = 10'000'000;  // pairwise updates
};

/// Per-feature standardization; zero-variance columns keep unit scale.
struct Scaler {
    Vector mean;
    Vector scale;

    static Scaler fit(const Matrix& X);
    Matrix transform(const Matrix& X) const;
};

class SvrModel {
public:
    Vector predict(const Matrix& X) const;

    const Matrix& support_vectors() const noexcept { return sv_; }  // standardized
    const Vector& coefficients() const noexcept { return coef_; }    // alpha_i - alpha_i*
    double bias() const noexcept { return bias_; }
    const Kernel& kernel() const noexcept { return kernel_; }
    const Scaler& scaler() const noexcept { return scaler_; }
    const SvrConfig& config() const noexcept { return cfg_; }
    bool converged() const noexcept { return converged_; }
    long iterations() const noexcept { return iterations_; }
    /// Dual objective after every pass of N pairwise updates, and at the end.
    const std::vector<double>& objective_history() const noexcept { return objective_; }

    nlohmann::json to_json() const;
    static SvrModel from_json(const nlohmann::json& j);

private:
    friend SvrModel fit_svr(const Matrix& X, const Vector& y, const SvrConfig& cfg);

    Matrix sv_;
    Vector coef_;
    double bias_ = 0.0;
    Kernel kernel_;
    Scaler scaler_;
    SvrConfig cfg_;
    bool converged_ = false;
    long iterations_ = 0;
    std::vector<double> objective_;
};

/// epsilon-SVR dual solved by SMO with second-order working-set selection.
SvrModel fit_svr(const Matrix& X, const Vector& y, const SvrConfig& cfg = {});

} // namespace noisespec::svr
