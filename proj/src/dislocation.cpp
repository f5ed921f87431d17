#include "ougf/dislocation.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "ougf/special.hpp"

namespace ougf {

namespace {

// s^q with the 0^0 = 0 convention.
double pow0(double s, double q) {
    if (s <= 0.0) return 0.0;
    return std::pow(s, q);
}

}  // namespace

MassPartition MassPartition::of(std::vector<double> parts) {
    MassPartition p;
    double sum = 0.0;
    for (double s : parts) {
        if (s < 0.0 || s > 1.0)
            throw std::invalid_argument("mass-partition entries must lie in [0, 1]");
        if (s > 0.0) {
            p.parts_.push_back(s);
            sum += s;
        }
    }
    std::sort(p.parts_.begin(), p.parts_.end(), std::greater<double>());
    if (sum > 1.0 + 1e-12)
        throw std::invalid_argument("mass-partition entries must sum to at most 1");
    return p;
}

DislocationMeasure DislocationMeasure::atoms(std::vector<WeightedPartition> atoms) {
    for (const auto& a : atoms)
        if (!(a.rate > 0.0)) throw std::invalid_argument("atom rate must be > 0");
    DislocationMeasure nu;
    nu.atoms_ = std::move(atoms);
    return nu;
}

DislocationMeasure DislocationMeasure::binary_density(double coef, double alpha) {
    if (!(coef > 0.0)) throw std::invalid_argument("binary_density requires coef > 0");
    if (!(alpha < 3.0))
        throw std::invalid_argument("binary_density requires alpha < 3 (squared-mass condition)");
    DislocationMeasure nu;
    nu.is_density_ = true;
    nu.g_u_ = [coef, alpha](double u) { return coef * std::pow(u, -alpha); };
    nu.tail_alpha_ = alpha;
    nu.family_ = "binary_density";
    nu.coef_ = coef;
    nu.alpha_ = alpha;
    return nu;
}

DislocationMeasure DislocationMeasure::rrt() {
    DislocationMeasure nu;
    nu.is_density_ = true;
    nu.g_u_ = [](double u) {
        const double s1 = 1.0 - u;
        return 1.0 / (s1 * s1) + 1.0 / (u * u);
    };
    nu.tail_alpha_ = 2.0;
    nu.family_ = "rrt";
    return nu;
}

DislocationMeasure DislocationMeasure::binary_density_fn(std::function<double(double)> g_u,
                                                         double tail_alpha,
                                                         std::string family) {
    DislocationMeasure nu;
    nu.is_density_ = true;
    nu.g_u_ = std::move(g_u);
    nu.tail_alpha_ = tail_alpha;
    nu.family_ = std::move(family);
    return nu;
}

DislocationMeasure DislocationMeasure::truncated(double level) const {
    if (!(level >= 0.0)) throw std::invalid_argument("truncation level must be >= 0");
    DislocationMeasure out = *this;
    out.level_ = std::min(level_, level);
    if (!is_density_) {
        const double threshold = std::exp(-out.level_);
        for (auto& atom : out.atoms_) {
            const auto& parts = atom.s.parts();
            if (parts.empty()) continue;
            std::vector<double> kept;
            kept.push_back(parts[0]);  // the closest child always survives
            for (std::size_t i = 1; i < parts.size(); ++i)
                if (parts[i] > threshold) kept.push_back(parts[i]);
            atom.s = MassPartition::of(std::move(kept));
        }
    }
    return out;
}

DislocationMeasure truncate(const DislocationMeasure& nu, double level) {
    return nu.truncated(level);
}

namespace {

// Integral of F(u) against the binary density in u = 1 - s1 coordinates, via
// the v = sqrt(u) substitution. F_two applies on the two-child region
// u in (e^{-l}, 1/2], F_single on the single-child region u in (0, e^{-l}].
// The lower endpoint is floored at u = 1e-120: below it the density would
// overflow while the integrable-power contribution is far under any tolerance.
constexpr double kEndpointFloorV = 1e-60;

double density_integral(const DislocationMeasure& nu,
                        const std::function<double(double)>& F_two,
                        const std::function<double(double)>& F_single,
                        const QuadratureSettings& settings) {
    const double u_star = std::exp(-nu.level());  // 0 when level = inf
    double total = 0.0;
    const double two_lo = std::min(u_star, 0.5);
    if (two_lo < 0.5) {
        auto integrand = [&](double v) {
            const double u = v * v;
            return 2.0 * v * F_two(u) * nu.density_u(u);
        };
        total += adaptive_integrate(integrand,
                                    std::max(std::sqrt(two_lo), kEndpointFloorV),
                                    std::sqrt(0.5), settings);
    }
    if (u_star > 0.0) {
        const double single_hi = std::min(u_star, 0.5);
        auto integrand = [&](double v) {
            const double u = v * v;
            return 2.0 * v * F_single(u) * nu.density_u(u);
        };
        total += adaptive_integrate(integrand, kEndpointFloorV,
                                    std::sqrt(single_hi), settings);
    }
    return total;
}

// sum over the measure of a per-atom functional; the density case receives
// (u, two_child) through the region split above.
double measure_integral(const DislocationMeasure& nu,
                        const std::function<double(const MassPartition&)>& F_atom,
                        const std::function<double(double)>& F_two,
                        const std::function<double(double)>& F_single,
                        const QuadratureSettings& settings) {
    if (nu.is_atoms()) {
        double sum = 0.0;
        for (const auto& a : nu.atom_list()) sum += a.rate * F_atom(a.s);
        return sum;
    }
    return density_integral(nu, F_two, F_single, settings);
}

}  // namespace

double DislocationMeasure::squared_mass(const QuadratureSettings& settings) const {
    return measure_integral(
        *this,
        [](const MassPartition& s) {
            const double u = 1.0 - s.s1();
            return u * u;
        },
        [](double u) { return u * u; }, [](double u) { return u * u; }, settings);
}

bool in_dom(const GFCharacteristics& gf, double q) {
    if (!(q >= 0.0)) throw std::domain_error("in_dom requires q >= 0");
    const DislocationMeasure& nu = gf.nu;
    if (nu.is_atoms()) return true;  // finite atom lists have bounded tails
    if (nu.level() < kInf) return true;  // truncation bounds s_i away from 0
    return q > nu.tail_alpha() - 1.0;
}

double cumulant(const GFCharacteristics& gf, double q, const QuadratureSettings& settings) {
    if (!(q >= 0.0)) throw std::domain_error("cumulant requires q >= 0");
    if (!in_dom(gf, q)) return kInf;
    const double base = 0.5 * gf.sigma * gf.sigma * q * q + gf.drift_c * q;
    const double integral = measure_integral(
        gf.nu,
        [q](const MassPartition& s) {
            double sum = 0.0;
            for (double si : s.parts()) sum += std::pow(si, q);
            return sum - 1.0 + q * (1.0 - s.s1());
        },
        [q](double u) { return pow1m_compensated(u, q) + std::pow(u, q); },
        [q](double u) { return pow1m_compensated(u, q); }, settings);
    return base + integral;
}

double phi_star(const GFCharacteristics& gf, double q, const QuadratureSettings& settings) {
    if (!(q >= 0.0)) throw std::domain_error("phi_star requires q >= 0");
    const double base = 0.5 * gf.sigma * gf.sigma * q * q + gf.drift_c * q;
    const double integral = measure_integral(
        gf.nu,
        [q](const MassPartition& s) {
            return pow0(s.s1(), q) - 1.0 + q * (1.0 - s.s1());
        },
        [q](double u) { return pow1m_compensated(u, q); },
        [q](double u) { return pow1m_compensated(u, q); }, settings);
    return base + integral;
}

double tilt_exponent(const GFCharacteristics& gf, double alpha, double q,
                     const QuadratureSettings& settings) {
    if (!in_dom(gf, alpha)) throw std::domain_error("alpha outside dom(kappa)");
    return cumulant(gf, q + alpha, settings) - cumulant(gf, alpha, settings);
}

LevyCharacteristics tilt_levy(const GFCharacteristics& gf, double alpha,
                              const QuadratureSettings& settings) {
    (void)settings;
    if (!gf.nu.is_atoms())
        throw std::invalid_argument(
            "tilt_levy supports atom measures; truncate and atomise densities first");
    if (!in_dom(gf, alpha)) throw std::domain_error("alpha outside dom(kappa)");
    LevyCharacteristics levy;
    levy.sigma = gf.sigma;
    levy.kill_rate = 0.0;
    double drift = gf.drift_c + gf.sigma * gf.sigma * alpha;
    std::vector<JumpAtom> jumps;
    for (const auto& a : gf.nu.atom_list()) {
        double correction = 1.0 - a.s.s1();
        for (double si : a.s.parts()) {
            correction -= std::pow(si, alpha) * (1.0 - si);
            if (si < 1.0)
                jumps.push_back({std::log(si), a.rate * std::pow(si, alpha)});
        }
        drift += a.rate * correction;
    }
    levy.drift_c = drift;
    levy.jumps = JumpSpec::atoms(std::move(jumps));
    return levy;
}

double stationary_gf_moment(const GFCharacteristics& gf, double q,
                            const QuadratureSettings& settings) {
    if (!(q >= 0.0)) throw std::domain_error("stationary_gf_moment requires q >= 0");
    if (!(gf.theta > 0.0))
        throw std::domain_error("stationary_gf_moment requires theta > 0 (inward)");
    const LLNConditions cond = check_lln_conditions(gf, 2.0, settings);
    if (!cond.kappa0_finite)
        throw std::domain_error("stationary_gf_moment requires kappa(0) < infinity");
    if (!cond.loglog_finite)
        throw std::domain_error("stationary_gf_moment requires the log-log moment condition");
    if (q == 0.0) return 1.0;
    const double kappa0 = cond.kappa0;
    // u = e^{-theta s}
    const double integral = adaptive_integrate(
        [&](double u) { return (cumulant(gf, q * u, settings) - kappa0) / u; }, 0.0,
        1.0, settings);
    return std::exp(integral / gf.theta);
}

double generator_apply(const GFCharacteristics& gf, const C2Function& fn, double x,
                       const QuadratureSettings& settings) {
    if (!(x > 0.0)) throw std::domain_error("generator_apply requires x > 0");
    const double fx = fn.f(x);
    const double dfx = fn.df(x);
    const double local = 0.5 * gf.sigma * gf.sigma * x * x * fn.d2f(x) +
                         (gf.drift_c + 0.5 * gf.sigma * gf.sigma -
                          gf.theta * std::log(x)) *
                             x * dfx;
    // f(x(1-u)) - f(x) + x f'(x) u, evaluated through the second derivative
    // when u is too small for direct subtraction.
    auto compensated_first = [&](double u) {
        if (u < 1e-5) {
            const double h = x * u;
            return 0.5 * h * h * fn.d2f(x * (1.0 - 0.5 * u));
        }
        return fn.f(x * (1.0 - u)) - fx + x * dfx * u;
    };
    const double integral = measure_integral(
        gf.nu,
        [&](const MassPartition& s) {
            double sum = 0.0;
            for (double si : s.parts()) sum += fn.f(x * si);
            return sum - fx + x * dfx * (1.0 - s.s1());
        },
        [&](double u) { return compensated_first(u) + fn.f(x * u); },
        [&](double u) { return compensated_first(u); }, settings);
    return local + integral;
}

double cumulant_from_levy(const LevyCharacteristics& levy, double q,
                          const QuadratureSettings& settings) {
    if (!(q >= 0.0)) throw std::domain_error("cumulant_from_levy requires q >= 0");
    if (levy.jumps.is_density() && q <= levy.jumps.tail_alpha() - 1.0) return kInf;
    const double phi = laplace_exponent(levy, q, settings);
    const double extra = jump_integral(
        levy.jumps, [q](double u) { return pow0(u, q); }, settings);
    return phi + extra;
}

LevyCharacteristics levy_of_binary(const GFCharacteristics& gf) {
    LevyCharacteristics levy;
    levy.sigma = gf.sigma;
    if (gf.nu.is_density()) {
        if (gf.nu.level() < kInf)
            throw std::invalid_argument("levy_of_binary expects an untruncated binary measure");
        levy.drift_c = gf.drift_c;
        // y = log s1 with s1 in [1/2, 1): lambda(y) dy = g(s1) ds1; the
        // child coordinate u = 1 - e^y = -expm1(y) keeps precision near 0-
        levy.jumps = JumpSpec::density(
            [nu = gf.nu](double y) {
                return nu.density_u(-std::expm1(y)) * std::exp(y);
            },
            /*eps=*/0.0, gf.nu.tail_alpha(), 0.5, 1.0);
        return levy;
    }
    double kill = 0.0;
    std::vector<JumpAtom> jumps;
    for (const auto& a : gf.nu.atom_list()) {
        if (a.s.is_killing()) {
            kill += a.rate;
            continue;
        }
        const auto& parts = a.s.parts();
        const double total = parts[0] + (parts.size() > 1 ? parts[1] : 0.0);
        if (parts.size() != 2 || std::abs(total - 1.0) > 1e-12)
            throw std::invalid_argument(
                "levy_of_binary requires strictly binary conservative atoms");
        jumps.push_back({std::log(parts[0]), a.rate});
    }
    levy.kill_rate = kill;
    levy.drift_c = gf.drift_c + kill;
    levy.jumps = JumpSpec::atoms(std::move(jumps));
    return levy;
}

GFCharacteristics binary_gf_of_levy(const LevyCharacteristics& levy, double theta,
                                    const QuadratureSettings& settings) {
    constexpr double kLog2 = 0.6931471805599453;
    GFCharacteristics gf;
    gf.sigma = levy.sigma;
    gf.theta = theta;
    if (levy.jumps.is_density()) {
        if (levy.kill_rate != 0.0)
            throw std::invalid_argument(
                "killing requires the atom form of the dislocation measure");
        auto lam = [jumps = levy.jumps](double y) { return jumps.density_at(y); };
        const double w_lo = levy.jumps.w_lo(), w_hi = levy.jumps.w_hi();
        // fold the two branches w and 1-w onto s1 = max(w, 1-w)
        gf.nu = DislocationMeasure::binary_density_fn(
            [lam, w_lo, w_hi](double s1) {
                double g = 0.0;
                if (s1 > w_lo && s1 < w_hi) g += lam(std::log(s1)) / s1;
                const double w = 1.0 - s1;
                if (w > w_lo && w < w_hi) g += lam(std::log(w)) / w;
                return g;
            },
            levy.jumps.tail_alpha(), "binary_of_levy");
        double drift_corr = 0.0;
        if (w_lo < 0.5) {
            // int (1 - 2 e^y) Lambda(dy) over e^y < 1/2
            drift_corr = adaptive_integrate(
                [&](double w) { return (1.0 - 2.0 * w) * lam(std::log(w)) / w; },
                w_lo, std::min(0.5, w_hi), settings);
        }
        gf.drift_c = levy.drift_c + drift_corr;
        return gf;
    }
    std::vector<WeightedPartition> atoms;
    double drift_corr = 0.0;
    for (const auto& a : levy.jumps.atom_list()) {
        const double w = std::exp(a.y);
        atoms.push_back({a.rate, MassPartition::of({std::max(w, 1.0 - w),
                                                    std::min(w, 1.0 - w)})});
        if (a.y < -kLog2) drift_corr += a.rate * (1.0 - 2.0 * w);
    }
    if (levy.kill_rate > 0.0)
        atoms.push_back({levy.kill_rate, MassPartition::killing()});
    gf.nu = DislocationMeasure::atoms(std::move(atoms));
    gf.drift_c = levy.drift_c - levy.kill_rate + drift_corr;
    return gf;
}

PsiH psi_h_decompose(const GFCharacteristics& gf, double level, double q,
                     const QuadratureSettings& settings) {
    if (!(q >= 0.0)) throw std::domain_error("psi_h_decompose requires q >= 0");
    const DislocationMeasure nu = gf.nu.truncated(level);
    double psi = 0.5 * gf.sigma * gf.sigma * q * q;
    double drift = gf.drift_c;
    double h = 0.0;
    if (nu.is_atoms()) {
        double single_part = 0.0;
        for (const auto& a : nu.atom_list()) {
            if (a.s.is_single()) {
                const double s1 = a.s.s1();
                single_part += a.rate * (pow0(s1, q) - 1.0 + q * (1.0 - s1));
            } else {
                drift += a.rate * (1.0 - a.s.s1());
                double sum = 0.0;
                for (double si : a.s.parts()) sum += std::pow(si, q);
                h += a.rate * (sum - 1.0);
            }
        }
        psi += drift * q + single_part;
        return {psi, h};
    }
    // density: two-child region feeds h and the drift compensation,
    // single-child region feeds psi's jump integral
    const double comp = density_integral(
        nu, [](double u) { return u; }, [](double) { return 0.0; }, settings);
    const double single_part = density_integral(
        nu, [](double) { return 0.0; },
        [q](double u) { return pow1m_compensated(u, q); }, settings);
    h = density_integral(
        nu, [q](double u) { return pow1m_compensated(u, q) + std::pow(u, q) - q * u; },
        [](double) { return 0.0; }, settings);
    psi += (drift + comp) * q + single_part;
    return {psi, h};
}

double truncation_error_bound(const GFCharacteristics& gf, double level, double q,
                              double t, const QuadratureSettings& settings) {
    const double bound_q = 2.0 * std::max(std::exp(gf.theta * t), 1.0);
    if (!(q > bound_q))
        throw std::domain_error("truncation_error_bound requires q > 2 max(e^{theta t}, 1)");
    if (!in_dom(gf, q)) throw std::domain_error("q outside dom(kappa)");
    const double big_k = std::exp(adaptive_integrate(
        [&](double r) { return cumulant(gf, q * std::exp(-gf.theta * r), settings); },
        0.0, t, settings));
    const double mass = gf.nu.squared_mass(settings);
    const double inner = adaptive_integrate(
        [&](double r) {
            return std::exp(-level * (q * std::exp(-gf.theta * r) - 2.0));
        },
        0.0, t, settings);
    return big_k * (1.0 - std::exp(-mass * inner));
}

LLNConditions check_lln_conditions(const GFCharacteristics& gf, double gamma,
                                   const QuadratureSettings& settings) {
    if (!(gamma > 1.0 && gamma <= 2.0))
        throw std::domain_error("gamma must lie in (1, 2]");
    LLNConditions out;
    out.gamma = gamma;
    const DislocationMeasure& nu = gf.nu;

    if (nu.is_atoms()) {
        double kappa0 = 0.0, gmom = 0.0, loglog = 0.0;
        for (const auto& a : nu.atom_list()) {
            const double count = static_cast<double>(a.s.count());
            kappa0 += a.rate * (count - 1.0);
            if (!a.s.is_single()) gmom += a.rate * std::pow(count, gamma);
            for (double si : a.s.parts())
                if (si < 0.5) loglog += a.rate * std::log(-std::log(si));
        }
        out.kappa0 = kappa0;
        out.kappa0_finite = true;
        out.gamma_moment = gmom;
        out.gamma_moment_finite = true;
        out.loglog_moment = loglog;
        out.loglog_finite = true;
    } else {
        const bool truncated = nu.level() < kInf;
        const bool finite_two_mass = truncated || nu.tail_alpha() < 1.0;
        if (finite_two_mass) {
            const double two_mass = density_integral(
                nu, [](double) { return 1.0; }, [](double) { return 0.0; }, settings);
            out.kappa0 = two_mass;  // every two-child atom contributes #s - 1 = 1
            out.kappa0_finite = true;
            out.gamma_moment = std::pow(2.0, gamma) * two_mass;
            out.gamma_moment_finite = true;
            out.loglog_moment = density_integral(
                nu,
                [](double u) { return u < 0.5 ? std::log(-std::log(u)) : 0.0; },
                [](double) { return 0.0; }, settings);
            out.loglog_finite = true;
        } else {
            out.kappa0 = kInf;
            out.kappa0_finite = false;
            out.gamma_moment = kInf;
            out.gamma_moment_finite = false;
            out.loglog_moment = kInf;
            out.loglog_finite = nu.tail_alpha() < 1.0;
        }
    }
    out.supercritical = out.kappa0_finite && out.kappa0 > 0.0;
    return out;
}

}  // namespace ougf
