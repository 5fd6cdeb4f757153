#include "noisespec/svr.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "noisespec/error.hpp"

namespace noisespec::svr {
namespace {

constexpr double kTau = 1e-12;
constexpr double kInf = std::numeric_limits<double>::infinity();

// Dual over 2l variables: index t < l carries alpha_t (sign +1), t >= l
// carries alpha*_{t-l} (sign -1). Minimizes 1/2 a'Qa + p'a subject to
// y'a = 0 and 0 <= a <= C.
class Solver {
public:
    Solver(const Matrix& K, const Vector& target, const SvrConfig& cfg)
        : K_(K), l_(static_cast<std::size_t>(K.rows())), C_(cfg.C), tol_(cfg.tol), max_iter_(cfg.max_iter),
          alpha_(2 * l_, 0.0), grad_(2 * l_), p_(2 * l_), sign_(2 * l_)
    {
        for (std::size_t i = 0; i < l_; ++i) {
            const double yi = target[static_cast<Eigen::Index>(i)];
            p_[i] = cfg.epsilon - yi;
            p_[i + l_] = cfg.epsilon + yi;
            sign_[i] = 1;
            sign_[i + l_] = -1;
        }
        grad_ = p_;
    }

    void run()
    {
        const long pass = static_cast<long>(l_);
        while (iterations_ < max_iter_) {
            if (iterations_ % pass == 0) objective_.push_back(objective());
            std::size_t i = 0, j = 0;
            if (!select(i, j)) {
                converged_ = true;
                break;
            }
            update(i, j);
            ++iterations_;
        }
        objective_.push_back(objective());
    }

    double coefficient(std::size_t i) const { return alpha_[i] - alpha_[i + l_]; }
    double rho() const;
    bool converged() const { return converged_; }
    long iterations() const { return iterations_; }
    const std::vector<double>& objective_history() const { return objective_; }

private:
    double q(std::size_t a, std::size_t b) const
    {
        return sign_[a] * sign_[b] * K_(static_cast<Eigen::Index>(a % l_), static_cast<Eigen::Index>(b % l_));
    }
    double qd(std::size_t a) const { return K_(static_cast<Eigen::Index>(a % l_), static_cast<Eigen::Index>(a % l_)); }
    bool upper(std::size_t t) const { return alpha_[t] >= C_; }
    bool lower(std::size_t t) const { return alpha_[t] <= 0.0; }

    double objective() const
    {
        double f = 0.0;
        for (std::size_t t = 0; t < 2 * l_; ++t) f += alpha_[t] * (grad_[t] + p_[t]);
        return 0.5 * f;
    }

    bool select(std::size_t& out_i, std::size_t& out_j) const
    {
        double gmax = -kInf;
        long i = -1;
        for (std::size_t t = 0; t < 2 * l_; ++t) {
            if (sign_[t] == 1) {
                if (!upper(t) && -grad_[t] >= gmax) {
                    gmax = -grad_[t];
                    i = static_cast<long>(t);
                }
            } else if (!lower(t) && grad_[t] >= gmax) {
                gmax = grad_[t];
                i = static_cast<long>(t);
            }
        }
        if (i < 0) return false;
        const auto iu = static_cast<std::size_t>(i);

        double gmax2 = -kInf, best = kInf;
        long j = -1;
        for (std::size_t t = 0; t < 2 * l_; ++t) {
            if (sign_[t] == 1) {
                if (lower(t)) continue;
                const double diff = gmax + grad_[t];
                gmax2 = std::max(gmax2, grad_[t]);
                if (diff > 0.0) {
                    double quad = qd(iu) + qd(t) - 2.0 * sign_[iu] * q(iu, t);
                    if (quad <= 0.0) quad = kTau;
                    const double obj = -(diff * diff) / quad;
                    if (obj <= best) {
                        best = obj;
                        j = static_cast<long>(t);
                    }
                }
            } else {
                if (upper(t)) continue;
                const double diff = gmax - grad_[t];
                gmax2 = std::max(gmax2, -grad_[t]);
                if (diff > 0.0) {
                    double quad = qd(iu) + qd(t) + 2.0 * sign_[iu] * q(iu, t);
                    if (quad <= 0.0) quad = kTau;
                    const double obj = -(diff * diff) / quad;
                    if (obj <= best) {
                        best = obj;
                        j = static_cast<long>(t);
                    }
                }
            }
        }
        if (gmax + gmax2 < tol_ || j < 0) return false;
        out_i = iu;
        out_j = static_cast<std::size_t>(j);
        return true;
    }

    void update(std::size_t i, std::size_t j)
    {
        const double old_i = alpha_[i], old_j = alpha_[j];
        const double qij = q(i, j);
        double& ai = alpha_[i];
        double& aj = alpha_[j];
        if (sign_[i] != sign_[j]) {
            double quad = qd(i) + qd(j) + 2.0 * qij;
            if (quad <= 0.0) quad = kTau;
            const double delta = (-grad_[i] - grad_[j]) / quad;
            const double diff = ai - aj;
            ai += delta;
            aj += delta;
            if (diff > 0.0) {
                if (aj < 0.0) {
                    aj = 0.0;
                    ai = diff;
                }
            } else if (ai < 0.0) {
                ai = 0.0;
                aj = -diff;
            }
            if (diff > 0.0) {
                if (ai > C_) {
                    ai = C_;
                    aj = C_ - diff;
                }
            } else if (aj > C_) {
                aj = C_;
                ai = C_ + diff;
            }
        } else {
            double quad = qd(i) + qd(j) - 2.0 * qij;
            if (quad <= 0.0) quad = kTau;
            const double delta = (grad_[i] - grad_[j]) / quad;
            const double sum = ai + aj;
            ai -= delta;
            aj += delta;
            if (sum > C_) {
                if (ai > C_) {
                    ai = C_;
                    aj = sum - C_;
                }
            } else if (aj < 0.0) {
                aj = 0.0;
                ai = sum;
            }
            if (sum > C_) {
                if (aj > C_) {
                    aj = C_;
                    ai = sum - C_;
                }
            } else if (ai < 0.0) {
                ai = 0.0;
                aj = sum;
            }
        }
        const double di = ai - old_i, dj = aj - old_j;
        for (std::size_t t = 0; t < 2 * l_; ++t) grad_[t] += q(i, t) * di + q(j, t) * dj;
    }

    const Matrix& K_;
    std::size_t l_;
    double C_;
    double tol_;
    long max_iter_;
    std::vector<double> alpha_, grad_, p_;
    std::vector<int> sign_;
    bool converged_ = false;
    long iterations_ = 0;
    std::vector<double> objective_;
};

double Solver::rho() const
{
    double ub = kInf, lb = -kInf, sum_free = 0.0;
    int n_free = 0;
    for (std::size_t t = 0; t < 2 * l_; ++t) {
        const double yg = sign_[t] * grad_[t];
        if (upper(t)) {
            if (sign_[t] == -1) ub = std::min(ub, yg);
            else lb = std::max(lb, yg);
        } else if (lower(t)) {
            if (sign_[t] == 1) ub = std::min(ub, yg);
            else lb = std::max(lb, yg);
        } else {
            ++n_free;
            sum_free += yg;
        }
    }
    return n_free > 0 ? sum_free / n_free : 0.5 * (ub + lb);
}

} // namespace

std::string to_string(KernelType k)
{
    switch (k) {
    case KernelType::linear: return "linear";
    case KernelType::poly: return "poly";
    case KernelType::rbf: return "rbf";
    }
    return "?";
}

KernelType parse_kernel(const std::string& s)
{
    if (s == "linear") return KernelType::linear;
    if (s == "poly") return KernelType::poly;
    if (s == "rbf") return KernelType::rbf;
    throw UsageError("unknown kernel '" + s + "' (linear, poly, rbf)");
}

double Kernel::operator()(const double* a, const double* b, Eigen::Index p) const
{
    const Eigen::Map<const Vector> va(a, p), vb(b, p);
    switch (type) {
    case KernelType::linear: return va.dot(vb);
    case KernelType::poly: return std::pow(gamma * va.dot(vb) + coef0, degree);
    case KernelType::rbf: return std::exp(-gamma * (va - vb).squaredNorm());
    }
    return 0.0;
}

Scaler Scaler::fit(const Matrix& X)
{
    Scaler s;
    const auto n = static_cast<double>(X.rows());
    s.mean = X.colwise().mean().transpose();
    s.scale.resize(X.cols());
    for (Eigen::Index j = 0; j < X.cols(); ++j) {
        const double var = (X.col(j).array() - s.mean[j]).square().sum() / n;
        s.scale[j] = var > 0.0 ? std::sqrt(var) : 1.0;
    }
    return s;
}

Matrix Scaler::transform(const Matrix& X) const
{
    if (X.cols() != mean.size())
        throw ShapeError("scaler: expected " + std::to_string(mean.size()) + " features, got " +
                         std::to_string(X.cols()));
    Matrix out = X;
    for (Eigen::Index i = 0; i < out.rows(); ++i)
        out.row(i) = (out.row(i) - mean.transpose()).cwiseQuotient(scale.transpose());
    return out;
}

SvrModel fit_svr(const Matrix& X, const Vector& y, const SvrConfig& cfg)
{
    const auto n = X.rows();
    if (n < 2) throw DomainError("fit_svr: need at least two rows");
    if (y.size() != n) throw ShapeError("fit_svr: X and y row counts differ");
    if (!X.allFinite() || !y.allFinite()) throw DomainError("fit_svr: non-finite input");
    if (!(cfg.C > 0.0)) throw DomainError("fit_svr: C must be > 0");
    if (!(cfg.epsilon >= 0.0)) throw DomainError("fit_svr: epsilon must be >= 0");
    if (cfg.kernel.gamma < 0.0) throw DomainError("fit_svr: kernel gamma must be > 0");
    if (cfg.kernel.type == KernelType::poly && cfg.kernel.degree < 1)
        throw DomainError("fit_svr: polynomial degree must be >= 1");

    SvrModel model;
    model.cfg_ = cfg;
    model.scaler_ = Scaler::fit(X);
    const Matrix Z = model.scaler_.transform(X);
    model.kernel_ = cfg.kernel;
    if (model.kernel_.gamma == 0.0) {
        const double mean_var = (Z.rowwise() - Z.colwise().mean()).array().square().mean();
        model.kernel_.gamma = 1.0 / (static_cast<double>(Z.cols()) * (mean_var > 0.0 ? mean_var : 1.0));
    }
    model.cfg_.kernel = model.kernel_;

    const auto p = Z.cols();
    Matrix K(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j <= i; ++j) {
            const double v = model.kernel_(Z.row(i).data(), Z.row(j).data(), p);
            K(i, j) = v;
            K(j, i) = v;
        }

    Solver solver(K, y, cfg);
    solver.run();
    model.converged_ = solver.converged();
    model.iterations_ = solver.iterations();
    model.objective_ = solver.objective_history();
    model.bias_ = -solver.rho();

    std::vector<Eigen::Index> support;
    for (Eigen::Index i = 0; i < n; ++i)
        if (solver.coefficient(static_cast<std::size_t>(i)) != 0.0) support.push_back(i);
    model.sv_.resize(static_cast<Eigen::Index>(support.size()), p);
    model.coef_.resize(static_cast<Eigen::Index>(support.size()));
    for (std::size_t k = 0; k < support.size(); ++k) {
        model.sv_.row(static_cast<Eigen::Index>(k)) = Z.row(support[k]);
        model.coef_[static_cast<Eigen::Index>(k)] = solver.coefficient(static_cast<std::size_t>(support[k]));
    }
    return model;
}

Vector SvrModel::predict(const Matrix& X) const
{
    const Matrix Z = scaler_.transform(X);
    Vector out(Z.rows());
    for (Eigen::Index i = 0; i < Z.rows(); ++i) {
        double f = bias_;
        for (Eigen::Index k = 0; k < sv_.rows(); ++k)
            f += coef_[k] * kernel_(sv_.row(k).data(), Z.row(i).data(), Z.cols());
        out[i] = f;
    }
    return out;
}

namespace {

nlohmann::json vec_json(const Vector& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

Vector json_vec(const nlohmann::json& j)
{
    const auto v = j.get<std::vector<double>>();
    return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

} // namespace

nlohmann::json SvrModel::to_json() const
{
    nlohmann::json svs = nlohmann::json::array();
    for (Eigen::Index k = 0; k < sv_.rows(); ++k)
        svs.push_back(std::vector<double>(sv_.row(k).data(), sv_.row(k).data() + sv_.cols()));
    return {
        {"kernel",
         {{"type", to_string(kernel_.type)},
          {"gamma", kernel_.gamma},
          {"degree", kernel_.degree},
          {"coef0", kernel_.coef0}}},
        {"C", cfg_.C},
        {"epsilon", cfg_.epsilon},
        {"tol", cfg_.tol},
        {"max_iter", cfg_.max_iter},
        {"converged", converged_},
        {"iterations", iterations_},
        {"bias", bias_},
        {"scaler", {{"mean", vec_json(scaler_.mean)}, {"scale", vec_json(scaler_.scale)}}},
        {"coefficients", vec_json(coef_)},
        {"support_vectors", std::move(svs)},
    };
}

SvrModel SvrModel::from_json(const nlohmann::json& j)
{
    SvrModel m;
    const auto& k = j.at("kernel");
    m.kernel_.type = parse_kernel(k.at("type").get<std::string>());
    m.kernel_.gamma = k.at("gamma");
    m.kernel_.degree = k.at("degree");
    m.kernel_.coef0 = k.at("coef0");
    m.cfg_.kernel = m.kernel_;
    m.cfg_.C = j.at("C");
    m.cfg_.epsilon = j.at("epsilon");
    m.cfg_.tol = j.at("tol");
    m.cfg_.max_iter = j.at("max_iter");
    m.converged_ = j.at("converged");
    m.iterations_ = j.at("iterations");
    m.bias_ = j.at("bias");
    m.scaler_.mean = json_vec(j.at("scaler").at("mean"));
    m.scaler_.scale = json_vec(j.at("scaler").at("scale"));
    m.coef_ = json_vec(j.at("coefficients"));
    const auto& svs = j.at("support_vectors");
    const auto p = m.scaler_.mean.size();
    m.sv_.resize(static_cast<Eigen::Index>(svs.size()), p);
    for (std::size_t r = 0; r < svs.size(); ++r) {
        const auto row = svs[r].get<std::vector<double>>();
        if (static_cast<Eigen::Index>(row.size()) != p) throw ShapeError("svr model: support vector width");
        m.sv_.row(static_cast<Eigen::Index>(r)) = Eigen::Map<const Eigen::RowVectorXd>(row.data(), p);
    }
    if (m.coef_.size() != m.sv_.rows()) throw ShapeError("svr model: coefficient count");
    return m;
}

} // namespace noisespec::svr
