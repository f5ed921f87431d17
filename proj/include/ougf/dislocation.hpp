#pragma once

#include <functional>
#include <string>
#include <vector>

#include "ougf/levy.hpp"
#include "ougf/quadrature.hpp"

namespace ougf {

// Decreasing sequence s1 >= s2 >= ... >= 0 with sum <= 1. Zero entries are
// dropped; the empty partition is the killing atom.
class MassPartition {
public:
    MassPartition() = default;
    static MassPartition of(std::vector<double> parts);  // sorts, validates
    static MassPartition killing() { return MassPartition(); }

    const std::vector<double>& parts() const { return parts_; }
    std::size_t count() const { return parts_.size(); }  // #s
    double s1() const { return parts_.empty() ? 0.0 : parts_.front(); }
    bool is_killing() const { return parts_.empty(); }
    bool is_single() const { return parts_.size() == 1; }

private:
    std::vector<double> parts_;
};

struct WeightedPartition {
    double rate;  // > 0
    MassPartition s;
};

// Sigma-finite dislocation measure on mass-partitions, subject to
// int (1-s1)^2 nu(ds) < infinity. Two forms:
//   - a finite list of weighted atoms (possibly including the killing atom);
//   - a binary density g(s1) on [1/2, 1) with children (s1, 1-s1), where
//     g(s1) ~ coef * (1-s1)^{-tail_alpha} near s1 -> 1 (tail_alpha < 3).
// A truncation level l < inf suppresses children with s_i <= e^{-l} (i >= 2);
// s1 itself always survives. For the binary density this splits [1/2, 1) into
// a two-child region [1/2, 1-e^{-l}] and a single-child region (1-e^{-l}, 1).
class DislocationMeasure {
public:
    DislocationMeasure() = default;

    static DislocationMeasure atoms(std::vector<WeightedPartition> atoms);
    // g(s1) = coef * (1 - s1)^{-alpha} on [1/2, 1); requires alpha < 3.
    static DislocationMeasure binary_density(double coef, double alpha);
    // g(s1) = s1^{-2} + (1-s1)^{-2} on [1/2, 1).
    static DislocationMeasure rrt();
    // general binary density supplied in u = 1 - s1 coordinates (u keeps full
    // precision near s1 -> 1, where s1 itself rounds to 1).
    static DislocationMeasure binary_density_fn(std::function<double(double)> g_u,
                                                double tail_alpha, std::string family);

    bool is_atoms() const { return !is_density_; }
    bool is_density() const { return is_density_; }
    double level() const { return level_; }
    const std::vector<WeightedPartition>& atom_list() const { return atoms_; }
    // density against ds1, parameterized by u = 1 - s1
    double density_u(double u) const { return g_u_(u); }
    double density_at(double s1) const { return g_u_(1.0 - s1); }
    double tail_alpha() const { return tail_alpha_; }
    const std::string& family() const { return family_; }
    double coef() const { return coef_; }
    double alpha() const { return alpha_; }

    // Entrywise child suppression at the given level; composing truncations
    // keeps the smaller level.
    DislocationMeasure truncated(double level) const;

    // int (1-s1)^2 nu(ds); must be finite for a valid measure.
    double squared_mass(const QuadratureSettings& settings = {}) const;

private:
    bool is_density_ = false;
    std::vector<WeightedPartition> atoms_;
    std::function<double(double)> g_u_;
    double tail_alpha_ = 0.0;
    double level_ = kInf;
    std::string family_ = "atom_list";
    double coef_ = 0.0, alpha_ = 0.0;
};

struct GFCharacteristics {
    double sigma = 0.0;
    double drift_c = 0.0;
    DislocationMeasure nu;
    double theta = 0.0;
};

// kappa(q) = sigma^2 q^2 / 2 + c q + int(sum_i s_i^q - 1 + q (1 - s1)) nu(ds),
// with 0^0 = 0 for the killing atom. Returns +inf outside dom(kappa).
double cumulant(const GFCharacteristics& gf, double q,
                const QuadratureSettings& settings = {});

// Phi*(q) = sigma^2 q^2 / 2 + c q + int(s1^q - 1 + q (1 - s1)) nu(ds);
// finite for every q >= 0. Laplace exponent of the selected fragment's log.
double phi_star(const GFCharacteristics& gf, double q,
                const QuadratureSettings& settings = {});

// q in dom(kappa), i.e. int sum_{i>=2} s_i^q nu(ds) < inf. Always true for
// q >= 2; decided from the tail exponent for densities.
bool in_dom(const GFCharacteristics& gf, double q);

// The cut map at the given level (see DislocationMeasure::truncated).
DislocationMeasure truncate(const DislocationMeasure& nu, double level);

// Phi_alpha(q) = kappa(q + alpha) - kappa(alpha); requires alpha in dom.
double tilt_exponent(const GFCharacteristics& gf, double alpha, double q,
                     const QuadratureSettings& settings = {});

// Explicit characteristics (sigma, c_alpha, Lambda_alpha, 0) of the tilted
// Levy process, for simulating the spine. Atom measures only.
LevyCharacteristics tilt_levy(const GFCharacteristics& gf, double alpha,
                              const QuadratureSettings& settings = {});

// int x^q stationary(dx) = exp(int_0^inf (kappa(q e^{-theta s}) - kappa(0)) ds),
// evaluated through u = e^{-theta s}. Requires theta > 0, kappa(0) < inf and
// the log-log moment condition.
double stationary_gf_moment(const GFCharacteristics& gf, double q,
                            const QuadratureSettings& settings = {});

// Twice-differentiable test function with caller-supplied derivatives.
struct C2Function {
    std::function<double(double)> f;
    std::function<double(double)> df;
    std::function<double(double)> d2f;
};

// L f(x) = sigma^2 x^2 f''(x)/2 + (c + sigma^2/2 - theta log x) x f'(x)
//          + int(sum_i f(x s_i) - f(x) + x f'(x) (1 - s1)) nu(ds).
// For an infinite-mass nu the test function must vanish near zero.
double generator_apply(const GFCharacteristics& gf, const C2Function& fn, double x,
                       const QuadratureSettings& settings = {});

// kappa(q) = Phi(q) + int (1 - e^y)^q Lambda(dy); +inf allowed for q < 2.
double cumulant_from_levy(const LevyCharacteristics& levy, double q,
                          const QuadratureSettings& settings = {});

// Binary-correspondence helpers: a binary dislocation measure and a
// spectrally negative jump measure carry the same cumulant.
// levy_of_binary maps (sigma, c, nu, theta) with binary nu to
// (sigma, c', Lambda, k, theta); binary_gf_of_levy is the inverse direction,
// mapping each jump y to the pair (max(e^y, 1-e^y), min(e^y, 1-e^y)).
LevyCharacteristics levy_of_binary(const GFCharacteristics& gf);
GFCharacteristics binary_gf_of_levy(const LevyCharacteristics& levy, double theta,
                                    const QuadratureSettings& settings = {});

// (psi(q), h(q)) of the level-l system: psi drives the single-particle motion,
// h the branching; psi + h = kappa of the truncated measure.
struct PsiH {
    double psi;
    double h;
};
PsiH psi_h_decompose(const GFCharacteristics& gf, double level, double q,
                     const QuadratureSettings& settings = {});

// Upper bound on E || X(t) - X^l(t) ||_{l q}^q:
//   K(q,t) * (1 - exp(-int (1-s1)^2 nu(ds) * int_0^t e^{-l (q e^{-theta r} - 2)} dr)),
// where K(q,t) = exp(int_0^t kappa(q e^{-theta r}) dr).
// Requires q > 2 max(e^{theta t}, 1) and q in dom.
double truncation_error_bound(const GFCharacteristics& gf, double level, double q,
                              double t, const QuadratureSettings& settings = {});

struct LLNConditions {
    double kappa0 = 0.0;  // int (#s - 1) nu(ds), may be +inf
    bool kappa0_finite = false;
    bool supercritical = false;  // 0 < kappa0 < inf
    double gamma = 2.0;
    double gamma_moment = 0.0;  // int_{multi} (#s)^gamma nu(ds), may be +inf
    bool gamma_moment_finite = false;
    double loglog_moment = 0.0;  // int sum_i 1{0<s_i<1/2} log|log s_i| nu(ds)
    bool loglog_finite = false;
    bool all_hold() const {
        return kappa0_finite && supercritical && gamma_moment_finite && loglog_finite;
    }
};
LLNConditions check_lln_conditions(const GFCharacteristics& gf, double gamma = 2.0,
                                   const QuadratureSettings& settings = {});

}  // namespace ougf
