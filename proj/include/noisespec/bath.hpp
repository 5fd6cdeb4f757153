#pragma once

#include <complex>
#include <string>
#include <variant>
#include <vector>

namespace noisespec::bath {

using cplx = std::complex<double>;

/// J(w) = eta * wc^(1-s) * w^s * exp(-w / wc).
struct OhmicFamily {
    double eta = 0.25;
    double s = 1.0;
    double omega_c = 0.5;
};

/// J(w) = 2 gamma wc w / (w^2 + wc^2); peak value gamma at w = wc.
struct LorentzDrude {
    double gamma = 0.25;
    double omega_c = 0.5;
};

using SpectralDensity = std::variant<OhmicFamily, LorentzDrude>;

void validate(const SpectralDensity& sd);

/// Spectral weight J(omega); throws DomainError for omega < 0.
double evaluate_sd(const SpectralDensity& sd, double omega);

/// E_r = 2 gamma.
inline double reorganization_energy(const LorentzDrude& ld) { return 2.0 * ld.gamma; }

struct BathSpec {
    SpectralDensity sd;
    double temperature_kT = 0.0;  // k_B T in units of omega0; 0 selects coth -> 1
};

struct QuadratureOptions {
    double abs_tol = 1e-10;
    double rel_tol = 1e-8;
    /// Integration range [0, omega_max_factor * wc] for the exponential cutoff.
    double omega_max_factor = 50.0;
    /// Real part of the Lorentz-Drude correlation diverges logarithmically as t -> 0.
    double short_time_floor = 1e-3;
    unsigned max_depth = 20;
};

/// C(t) = int_0^inf J(w) [cos(wt) coth(w / 2kT) - i sin(wt)] dw.
cplx correlation(const BathSpec& bath, double t, const QuadratureOptions& opt = {});

struct ExpTerm {
    cplx amplitude;  // c_k
    double rate;     // nu_k
};

/// C(t) ~ sum_k c_k exp(-nu_k t) for a Lorentz-Drude bath.
struct ExponentialDecomposition {
    std::vector<ExpTerm> terms;
    int n_matsubara = 0;
    /// Temperature actually used (differs from the input near a resonance).
    double effective_kT = 0.0;
    /// sum over the discarded Matsubara terms of c_k / nu_k.
    double residual_weight = 0.0;
    std::vector<std::string> warnings;

    cplx evaluate(double t) const;
};

/// Relative distance below which a Matsubara rate is treated as resonant
/// with the Drude pole; the temperature used for the expansion is shifted so
/// that |nu_k - wc| = kResonanceEpsilon * wc.
inline constexpr double kResonanceEpsilon = 0.02;

ExponentialDecomposition matsubara_decompose(const BathSpec& bath, int n_matsubara);

/// Gamma(t) = 4 int_0^inf J(w) coth(w / 2kT) (1 - cos wt) / w^2 dw.
double decoherence_gamma(const OhmicFamily& sd, double temperature_kT, double t,
                         const QuadratureOptions& opt = {});

} // namespace noisespec::bath
