#include "noisespec/bath.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <numbers>
#include <sstream>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/ooura_fourier_integrals.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include "noisespec/error.hpp"

namespace noisespec::bath {
namespace {

constexpr double kPi = std::numbers::pi;

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};

// coth(w / 2kT), with kT = 0 meaning the zero-temperature branch.
double thermal_factor(double omega, double kT)
{
    if (kT == 0.0) return 1.0;
    return 1.0 / std::tanh(omega / (2.0 * kT));
}

double ohmic_j(const OhmicFamily& sd, double omega)
{
    if (omega == 0.0) return 0.0;
    return sd.eta * std::pow(sd.omega_c, 1.0 - sd.s) * std::pow(omega, sd.s) *
           std::exp(-omega / sd.omega_c);
}

double drude_j(const LorentzDrude& sd, double omega)
{
    return 2.0 * sd.gamma * sd.omega_c * omega / (omega * omega + sd.omega_c * sd.omega_c);
}

void check_tolerance(const char* what, double value, double error, const QuadratureOptions& opt)
{
    const double target = std::max(opt.abs_tol, opt.rel_tol * std::abs(value));
    if (!(error <= target) || !std::isfinite(value)) {
        std::ostringstream msg;
        msg << what << ": quadrature did not converge (achieved error " << error
            << ", requested " << target << ")";
        throw QuadratureError(msg.str(), error);
    }
}

// int_0^upper f. The first piece [0, split] goes to tanh-sinh, which copes
// with the w^s (s < 1) endpoint behaviour of sub-Ohmic integrands; the
// oscillatory remainder goes to adaptive Gauss-Kronrod.
template <class F>
double finite_range(const char* what, F&& f, double upper, double split, const QuadratureOptions& opt)
{
    split = std::min(split, upper);
    double err_head = 0.0, err_tail = 0.0, l1 = 0.0;
    std::size_t levels = 0;
    double head = 0.0, tail = 0.0;
    try {
        boost::math::quadrature::tanh_sinh<double> ts;
        head = ts.integrate(f, 0.0, split, opt.rel_tol * 1e-2, &err_head, &l1, &levels);
        if (split < upper)
            tail = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
                f, split, upper, opt.max_depth, opt.rel_tol, &err_tail, &l1);
    } catch (const std::exception& e) {
        throw QuadratureError(std::string(what) + ": " + e.what(),
                              std::numeric_limits<double>::infinity());
    }
    const double value = head + tail;
    check_tolerance(what, value, err_head + err_tail, opt);
    return value;
}

double head_split(double omega_c, double t)
{
    return t > 0.0 ? std::min(omega_c, 2.0 * kPi / t) : omega_c;
}

} // namespace

void validate(const SpectralDensity& sd)
{
    std::visit(overloaded{
                   [](const OhmicFamily& o) {
                       if (!(o.eta >= 0.0)) throw DomainError("OhmicFamily: eta must be >= 0");
                       if (!(o.s > 0.0)) throw DomainError("OhmicFamily: s must be > 0");
                       if (!(o.omega_c > 0.0))
                           throw DomainError("OhmicFamily: omega_c must be > 0");
                   },
                   [](const LorentzDrude& l) {
                       if (!(l.gamma >= 0.0))
                           throw DomainError("LorentzDrude: gamma must be >= 0");
                       if (!(l.omega_c > 0.0))
                           throw DomainError("LorentzDrude: omega_c must be > 0");
                   }},
               sd);
}

double evaluate_sd(const SpectralDensity& sd, double omega)
{
    if (!(omega >= 0.0)) throw DomainError("evaluate_sd: omega must be >= 0");
    validate(sd);
    return std::visit(overloaded{[&](const OhmicFamily& o) { return ohmic_j(o, omega); },
                                 [&](const LorentzDrude& l) { return drude_j(l, omega); }},
                      sd);
}

cplx correlation(const BathSpec& bath, double t, const QuadratureOptions& opt)
{
    if (!(t >= 0.0)) throw DomainError("correlation: t must be >= 0");
    if (!(bath.temperature_kT >= 0.0)) throw DomainError("correlation: kT must be >= 0");
    validate(bath.sd);
    const double kT = bath.temperature_kT;

    if (const auto* o = std::get_if<OhmicFamily>(&bath.sd)) {
        const double upper = opt.omega_max_factor * o->omega_c;
        const double re = finite_range(
            "correlation (real part)",
            [&](double w) { return w == 0.0 ? 0.0 : ohmic_j(*o, w) * thermal_factor(w, kT) * std::cos(w * t); },
            upper, head_split(o->omega_c, t), opt);
        const double im = t == 0.0 ? 0.0
                                   : -finite_range(
                                         "correlation (imaginary part)",
                                         [&](double w) { return ohmic_j(*o, w) * std::sin(w * t); },
                                         upper, head_split(o->omega_c, t), opt);
        return {re, im};
    }

    // The Drude weight decays like 1/w, so both parts are oscillatory integrals
    // with slowly decaying envelopes; the double-exponential Fourier rule
    // handles the tail without truncation.
    const auto& ld = std::get<LorentzDrude>(bath.sd);
    if (t < opt.short_time_floor)
        throw DomainError("correlation: UV-divergent real part for the Lorentz-Drude bath at t < " +
                          std::to_string(opt.short_time_floor));
    const auto envelope_re = [&](double w) {
        // J(w) coth(w / 2kT) -> 4 gamma kT / wc; the direct product overflows near 0
        if (kT > 0.0 && w < 1e-8 * kT) return 4.0 * ld.gamma * kT / ld.omega_c;
        if (w == 0.0) return 0.0;
        return drude_j(ld, w) * thermal_factor(w, kT);
    };
    const auto envelope_im = [&](double w) { return drude_j(ld, w); };

    // The rule's own stopping test is relative; aim well below the requested
    // tolerance so the returned estimate clears check_tolerance.
    const double rule_tol = 1e-4 * opt.rel_tol;
    boost::math::quadrature::ooura_fourier_cos<double> cos_rule(rule_tol, 8);
    boost::math::quadrature::ooura_fourier_sin<double> sin_rule(rule_tol, 8);
    const auto [re, re_err] = cos_rule.integrate(envelope_re, t);
    const auto [im, im_err] = sin_rule.integrate(envelope_im, t);
    check_tolerance("correlation (real part)", re, re_err, opt);
    check_tolerance("correlation (imaginary part)", im, im_err, opt);
    return {re, -im};
}

cplx ExponentialDecomposition::evaluate(double t) const
{
    cplx sum = 0.0;
    for (const auto& term : terms) sum += term.amplitude * std::exp(-term.rate * t);
    return sum;
}

ExponentialDecomposition matsubara_decompose(const BathSpec& bath, int n_matsubara)
{
    const auto* ld = std::get_if<LorentzDrude>(&bath.sd);
    if (ld == nullptr) throw DomainError("matsubara_decompose: requires a Lorentz-Drude bath");
    validate(bath.sd);
    if (!(bath.temperature_kT > 0.0))
        throw DomainError("matsubara_decompose: requires kT > 0");
    if (n_matsubara < 0) throw DomainError("matsubara_decompose: K must be >= 0");

    const double g = ld->gamma;
    const double wc = ld->omega_c;
    double kT = bath.temperature_kT;

    ExponentialDecomposition out;
    out.n_matsubara = n_matsubara;

    // nu_k = wc makes both c_0 (through cot) and c_k singular. The nearest
    // Matsubara index decides; every k is checked, not only k <= K.
    const double ratio = wc / (2.0 * kPi * kT);
    const double k_near = std::round(ratio);
    if (k_near >= 1.0 && std::abs(k_near - ratio) < kResonanceEpsilon * ratio) {
        const double side = ratio >= k_near ? -1.0 : 1.0;
        // New kT puts nu_k at wc (1 + side * eps).
        const double shifted = wc * (1.0 + side * kResonanceEpsilon) / (2.0 * kPi * k_near);
        std::ostringstream msg;
        msg << "Matsubara rate nu_" << static_cast<int>(k_near) << " within "
            << kResonanceEpsilon << " of omega_c; kT shifted from " << kT << " to " << shifted;
        out.warnings.push_back(msg.str());
        kT = shifted;
    }

    out.effective_kT = kT;
    const double cot = 1.0 / std::tan(wc / (2.0 * kT));
    out.terms.push_back({kPi * g * wc * cplx(cot, -1.0), wc});
    double captured = out.terms.front().amplitude.real() / wc;
    for (int k = 1; k <= n_matsubara; ++k) {
        const double nu = 2.0 * kPi * k * kT;
        const double c = kPi * 4.0 * g * wc * nu * kT / (nu * nu - wc * wc);
        out.terms.push_back({cplx(c, 0.0), nu});
        captured += c / nu;
    }
    out.residual_weight = kPi * 2.0 * g * kT / wc - captured;
    return out;
}

double decoherence_gamma(const OhmicFamily& sd, double temperature_kT, double t,
                         const QuadratureOptions& opt)
{
    validate(sd);
    if (!(t >= 0.0)) throw DomainError("decoherence_gamma: t must be >= 0");
    if (!(temperature_kT >= 0.0)) throw DomainError("decoherence_gamma: kT must be >= 0");
    if (t == 0.0 || sd.eta == 0.0) return 0.0;
    const auto integrand = [&](double w) {
        if (w == 0.0) return 0.0;
        // (1 - cos wt) / w^2 = 2 (sin(wt/2) / w)^2, exact near w = 0.
        const double q = std::sin(0.5 * w * t) / w;
        return 4.0 * ohmic_j(sd, w) * thermal_factor(w, temperature_kT) * 2.0 * q * q;
    };
    return finite_range("decoherence_gamma", integrand, opt.omega_max_factor * sd.omega_c,
                        head_split(sd.omega_c, t), opt);
}

} // namespace noisespec::bath
