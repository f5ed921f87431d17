#include "ougf/levy.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "ougf/special.hpp"

namespace ougf {

JumpSpec JumpSpec::atoms(std::vector<JumpAtom> atoms) {
    JumpSpec spec;
    for (const auto& a : atoms) {
        if (!(a.y < 0.0)) throw std::invalid_argument("jump atom must have y < 0");
        if (!(a.rate > 0.0)) throw std::invalid_argument("jump atom must have rate > 0");
    }
    spec.has_atoms_ = !atoms.empty();
    spec.atoms_ = std::move(atoms);
    return spec;
}

JumpSpec JumpSpec::density(std::function<double(double)> lambda, double eps,
                           double tail_alpha, double w_lo, double w_hi) {
    if (!(w_lo >= 0.0 && w_hi <= 1.0 && w_lo < w_hi))
        throw std::invalid_argument("density support must satisfy 0 <= w_lo < w_hi <= 1");
    JumpSpec spec;
    spec.has_density_ = true;
    spec.lambda_ = std::move(lambda);
    spec.eps_ = eps;
    spec.tail_alpha_ = tail_alpha;
    spec.w_lo_ = w_lo;
    spec.w_hi_ = w_hi;
    spec.y_lo_ = w_lo > 0.0 ? std::log(w_lo) : -kInf;
    spec.y_hi_ = std::log(w_hi);
    return spec;
}

void LevyCharacteristics::validate() const {
    if (!(sigma >= 0.0)) throw std::invalid_argument("sigma must be >= 0");
    if (!(kill_rate >= 0.0)) throw std::invalid_argument("kill_rate must be >= 0");
}

double jump_integral(const JumpSpec& jumps, const std::function<double(double)>& F,
                     const QuadratureSettings& settings) {
    if (jumps.empty()) return 0.0;
    if (jumps.is_atoms()) {
        double sum = 0.0;
        for (const auto& a : jumps.atom_list()) sum += a.rate * F(-std::expm1(a.y));
        return sum;
    }
    // u = 1 - e^y in (1 - w_hi, 1 - w_lo); Lambda(dy) = lambda(log(1-u))/(1-u) du.
    // The v = sqrt(u) substitution regularises integrable singularities at
    // u -> 0; the endpoint is floored where the density would overflow.
    const double u_lo = 1.0 - jumps.w_hi();
    const double u_hi = 1.0 - jumps.w_lo();
    auto integrand_v = [&](double v) {
        const double u = v * v;
        // y = log(1-u) via log1p so densities written with expm1 recover u
        return 2.0 * v * F(u) * jumps.density_at(std::log1p(-u)) / (1.0 - u);
    };
    return adaptive_integrate(integrand_v, std::max(std::sqrt(u_lo), 1e-60),
                              std::sqrt(u_hi), settings);
}

namespace {

// Convergence of a nonnegative tail integral probed over dyadic windows:
// windows that fall below tolerance or keep shrinking geometrically converge;
// otherwise a power-law exponent fitted to the last windows decides (sum of
// C k^{-p} converges iff p > 1). make_window integrates one window and
// reports success; window edges double from lo toward hi_edge.
bool dyadic_windows_converge(
    const std::function<bool(double, double, double*)>& make_window, double lo,
    double hi_edge, double abs_tol) {
    constexpr int kMaxWindows = 40;
    std::vector<double> values;
    double edge = lo;
    for (int k = 0; k < kMaxWindows; ++k) {
        const double next = std::min(edge * 2.0, hi_edge);
        double value = 0.0;
        if (!make_window(edge, next, &value)) return false;
        if (!std::isfinite(value)) return false;
        if (next >= hi_edge) return true;  // bounded support exhausted
        if (std::abs(value) < abs_tol) return true;
        values.push_back(std::abs(value));
        edge = next;
    }
    // geometric decay: compare the last window against one a few steps back
    const std::size_t n = values.size();
    if (values[n - 1] < 0.25 * values[n - 5]) return true;
    // power-law fit between the middle and the last window
    const std::size_t a = n / 2, b = n - 1;
    if (values[b] <= 0.0) return true;
    if (values[a] <= 0.0) return false;
    const double p = std::log(values[a] / values[b]) /
                     std::log(static_cast<double>(b + 1) / static_cast<double>(a + 1));
    return p > 1.15;
}

}  // namespace

bool jump_measure_integrable(const JumpSpec& jumps, const QuadratureSettings& settings) {
    if (jumps.empty() || jumps.is_atoms()) return true;  // finite atom lists
    if (jumps.tail_alpha() >= 3.0) return false;  // u^2 against u^{-alpha} diverges
    QuadratureSettings probe = settings;
    probe.max_subdivisions = std::min(settings.max_subdivisions, 400);
    probe.abs_tol = std::max(settings.abs_tol, 1e-9);
    probe.rel_tol = std::max(settings.rel_tol, 1e-9);

    // near piece, u = 1 - e^y in (0, 1/4]: int y^2 Lambda(dy) over halving
    // windows toward u = 0; a power-law density u^{-alpha} gives geometric
    // window values with ratio 2^{alpha - 3}
    const double u_min = 1.0 - jumps.w_hi();
    const double u_max = std::min(0.25, 1.0 - jumps.w_lo());
    if (u_min < u_max) {
        auto window = [&](double u_a, double u_b, double* out) {
            const IntegrationResult res = try_integrate(
                [&](double u) {
                    const double y = std::log1p(-u);
                    return y * y * jumps.density_at(y) / (1.0 - u);
                },
                u_a, u_b, probe);
            *out = res.value;
            return res.converged;
        };
        std::vector<double> values;
        double hi = u_max;
        bool decided = false, ok = false;
        for (int k = 0; k < 140 && !decided; ++k) {
            const double lo = std::max(0.5 * hi, u_min);
            double value = 0.0;
            if (!window(lo, hi, &value) || !std::isfinite(value)) {
                decided = true;
                ok = false;
                break;
            }
            if (lo <= u_min) {
                decided = true;
                ok = true;
                break;
            }
            if (value < probe.abs_tol) {
                decided = true;
                ok = true;
                break;
            }
            values.push_back(value);
            hi = lo;
        }
        if (!decided) {
            // still above tolerance after 140 halvings: converges only if the
            // windows kept shrinking geometrically
            const std::size_t n = values.size();
            ok = values[n - 1] < 0.5 * values[n - 6];
        }
        if (!ok) return false;
    }

    // far piece, y <= -1: the Levy mass over doubling windows
    if (jumps.w_lo() < std::exp(-1.0)) {
        const double abs_y_end =
            jumps.w_lo() > 0.0 ? -std::log(jumps.w_lo()) : kInf;
        const double lo = std::max(1.0, -std::log(jumps.w_hi()));
        auto window = [&](double a, double b, double* out) {
            const IntegrationResult res = try_integrate(
                [&](double y) { return jumps.density_at(y); }, -b, -a, probe);
            *out = res.value;
            return res.converged;
        };
        if (!dyadic_windows_converge(window, lo, abs_y_end, probe.abs_tol))
            return false;
    }
    return true;
}

double laplace_exponent(const LevyCharacteristics& levy, double q,
                        const QuadratureSettings& settings) {
    levy.validate();
    if (!(q >= 0.0)) throw std::domain_error("laplace_exponent requires q >= 0");
    double phi = -levy.kill_rate + 0.5 * levy.sigma * levy.sigma * q * q +
                 levy.drift_c * q;
    phi += jump_integral(
        levy.jumps, [q](double u) { return pow1m_compensated(u, q); }, settings);
    return phi;
}

namespace {

// (1 - e^{-theta dt}) / theta with the theta -> 0 limit.
double relax1(double theta, double dt) {
    if (theta == 0.0) return dt;
    return -std::expm1(-theta * dt) / theta;
}

// (1 - e^{-2 theta dt}) / (2 theta) with the theta -> 0 limit.
double relax2(double theta, double dt) {
    if (theta == 0.0) return dt;
    return -std::expm1(-2.0 * theta * dt) / (2.0 * theta);
}

}  // namespace

PreparedDriver::PreparedDriver(const OUParams& params, const QuadratureSettings& settings) {
    const LevyCharacteristics& levy = params.levy;
    levy.validate();
    sigma_ = levy.sigma;
    theta_ = params.theta;
    kill_rate_ = levy.kill_rate;
    drift_b_ = levy.drift_c;
    if (levy.jumps.empty()) return;

    if (levy.jumps.is_atoms()) {
        double cum = 0.0;
        for (const auto& a : levy.jumps.atom_list()) {
            cum += a.rate;
            atom_y_.push_back(a.y);
            atom_cum_.push_back(cum);
            drift_b_ += a.rate * (-std::expm1(a.y));  // rate * (1 - e^y)
        }
        jump_rate_ = cum;
        return;
    }

    const double eps = levy.jumps.eps();
    if (!(eps > 0.0))
        throw std::invalid_argument("infinite activity requires epsilon truncation");
    if (!jump_measure_integrable(levy.jumps, settings))
        throw std::invalid_argument(
            "jump measure violates the (|y|^2 and 1)-integrability condition");
    // Retained jumps: 1 - e^y > eps, i.e. w = e^y < 1 - eps.
    const double w_lo = levy.jumps.w_lo();
    const double w_hi = std::min(levy.jumps.w_hi(), 1.0 - eps);
    if (w_hi <= w_lo) return;  // everything truncated away

    auto h = [&](double w) { return levy.jumps.density_at(std::log(w)) / w; };
    constexpr int kCells = 2048;
    grid_w_.resize(kCells + 1);
    grid_cdf_.resize(kCells + 1);
    QuadratureSettings cell_settings = settings;
    cell_settings.abs_tol = std::max(settings.abs_tol, 1e-12);
    double cum = 0.0;
    grid_cdf_[0] = 0.0;
    for (int i = 0; i <= kCells; ++i)
        grid_w_[i] = w_lo + (w_hi - w_lo) * static_cast<double>(i) / kCells;
    for (int i = 1; i <= kCells; ++i) {
        cum += adaptive_integrate(h, grid_w_[i - 1], grid_w_[i], cell_settings);
        grid_cdf_[i] = cum;
    }
    jump_rate_ = cum;
    drift_b_ += jump_integral(
        JumpSpec::density([&levy](double y) { return levy.jumps.density_at(y); }, eps,
                          levy.jumps.tail_alpha(), w_lo, w_hi),
        [](double u) { return u; }, settings);
}

double PreparedDriver::sample_jump(RandomStream& stream) const {
    if (!atom_cum_.empty()) {
        const double u = stream.uniform() * jump_rate_;
        auto it = std::lower_bound(atom_cum_.begin(), atom_cum_.end(), u);
        const std::size_t idx =
            std::min<std::size_t>(it - atom_cum_.begin(), atom_y_.size() - 1);
        return atom_y_[idx];
    }
    // piecewise-linear CDF inversion over the tabulated grid
    const double target = stream.uniform() * jump_rate_;
    auto it = std::upper_bound(grid_cdf_.begin(), grid_cdf_.end(), target);
    std::size_t hi = std::min<std::size_t>(it - grid_cdf_.begin(), grid_cdf_.size() - 1);
    if (hi == 0) hi = 1;
    const double c0 = grid_cdf_[hi - 1], c1 = grid_cdf_[hi];
    const double frac = (c1 > c0) ? (target - c0) / (c1 - c0) : 0.5;
    const double w = grid_w_[hi - 1] + frac * (grid_w_[hi] - grid_w_[hi - 1]);
    return std::log(std::min(std::max(w, 1e-300), 1.0 - 1e-16));
}

double OUPath::value_at(double t) const {
    if (t < 0.0 || t > horizon_)
        throw std::domain_error("value_at: time outside the simulated horizon");
    if (t >= kill_time_) return -kInf;
    // last recorded event with time <= t
    const OUEvent* last = nullptr;
    for (const auto& ev : events_) {
        if (ev.t <= t) last = &ev;
        else break;
    }
    double t0 = 0.0, z0 = 0.0;
    if (last != nullptr) {
        if (last->t == t) return last->z_post;
        t0 = last->t;
        z0 = last->z_post;
    } else {
        // before the first event: start state is stored as an Obs at t = 0
        t0 = 0.0;
        z0 = events_.empty() ? terminal_ : events_.front().z_pre;
    }
    if (sigma_ != 0.0)
        throw std::logic_error("value_at: diffusive path sampled only at recorded times");
    const double dt = t - t0;
    return std::exp(-theta_ * dt) * z0 + drift_b_ * relax1(theta_, dt);
}

OUPath PreparedDriver::simulate(double z0, double horizon, RandomStream stream,
                                const std::vector<double>& obs_times) const {
    if (!(horizon >= 0.0)) throw std::invalid_argument("horizon must be >= 0");
    for (std::size_t i = 0; i < obs_times.size(); ++i) {
        if (obs_times[i] < 0.0 || obs_times[i] > horizon ||
            (i > 0 && obs_times[i] < obs_times[i - 1]))
            throw std::invalid_argument("obs_times must be sorted within [0, horizon]");
    }
    const PreparedDriver& driver = *this;

    OUPath path;
    path.theta_ = driver.theta();
    path.sigma_ = driver.sigma();
    path.drift_b_ = driver.drift_b();
    path.horizon_ = horizon;
    path.obs_times_ = obs_times;
    path.obs_values_.assign(obs_times.size(), -kInf);

    double t = 0.0;
    double z = z0;
    path.events_.push_back({0.0, z0, z0, OUEvent::Kind::Obs});

    const double kill_at = driver.kill_rate() > 0.0
                               ? stream.exponential(driver.kill_rate())
                               : kInf;
    double next_jump =
        driver.jump_rate() > 0.0 ? stream.exponential(driver.jump_rate()) : kInf;
    std::size_t obs_i = 0;

    auto advance_to = [&](double target) {
        const double dt = target - t;
        if (dt <= 0.0) { t = target; return; }
        const double mean =
            std::exp(-driver.theta() * dt) * z + driver.drift_b() * relax1(driver.theta(), dt);
        if (driver.sigma() > 0.0) {
            const double sd = driver.sigma() * std::sqrt(relax2(driver.theta(), dt));
            z = mean + sd * stream.normal();
        } else {
            z = mean;
        }
        t = target;
    };

    while (true) {
        const double next_obs = obs_i < obs_times.size() ? obs_times[obs_i] : kInf;
        const double target = std::min({kill_at, next_jump, next_obs, horizon});
        // tie order: kill, then jump, then observation, then horizon
        if (kill_at <= target && kill_at <= horizon) {
            advance_to(kill_at);
            path.events_.push_back({t, z, -kInf, OUEvent::Kind::Kill});
            path.kill_time_ = t;
            path.terminal_ = -kInf;
            while (obs_i < obs_times.size()) path.obs_values_[obs_i++] = -kInf;
            return path;
        }
        if (next_jump <= target && next_jump <= horizon) {
            advance_to(next_jump);
            const double y = driver.sample_jump(stream);
            path.events_.push_back({t, z, z + y, OUEvent::Kind::Jump});
            z += y;
            next_jump = t + stream.exponential(driver.jump_rate());
            continue;
        }
        if (next_obs <= target && next_obs <= horizon) {
            advance_to(next_obs);
            path.events_.push_back({t, z, z, OUEvent::Kind::Obs});
            path.obs_values_[obs_i++] = z;
            continue;
        }
        advance_to(horizon);
        path.events_.push_back({t, z, z, OUEvent::Kind::End});
        path.terminal_ = z;
        return path;
    }
}

OUPath simulate_ou(const OUParams& params, double z0, double horizon,
                   RandomStream stream, const std::vector<double>& obs_times) {
    const PreparedDriver driver(params, QuadratureSettings{});
    return driver.simulate(z0, horizon, stream, obs_times);
}

double ou_laplace_transform(const OUParams& params, double z0, double q, double t,
                            const QuadratureSettings& settings) {
    if (!(q >= 0.0 && t >= 0.0))
        throw std::domain_error("ou_laplace_transform requires q, t >= 0");
    if (t == 0.0) return std::exp(z0 * q);
    if (params.theta == 0.0)
        return std::exp(z0 * q + laplace_exponent(params.levy, q, settings) * t);
    const double integral = adaptive_integrate(
        [&](double s) {
            return laplace_exponent(params.levy, q * std::exp(-params.theta * s), settings);
        },
        0.0, t, settings);
    return std::exp(std::exp(-params.theta * t) * z0 * q + integral);
}

namespace {

// int log|y| Lambda(dy) < infinity over (-inf, -log 2)? Exact for atoms,
// dyadic windows with the power-law fit for densities.
bool log_tail_finite(const JumpSpec& jumps, const QuadratureSettings& settings) {
    constexpr double kLog2 = 0.6931471805599453;
    if (jumps.empty() || jumps.is_atoms()) return true;
    QuadratureSettings probe = settings;
    probe.max_subdivisions = std::min(settings.max_subdivisions, 400);
    probe.abs_tol = std::max(settings.abs_tol, 1e-9);
    probe.rel_tol = std::max(settings.rel_tol, 1e-9);
    const double abs_y_end = jumps.w_lo() > 0.0 ? -std::log(jumps.w_lo()) : kInf;
    const double lo = std::max(kLog2, -std::log(jumps.w_hi()));
    auto window = [&](double a, double b, double* out) {
        const IntegrationResult res = try_integrate(
            [&](double y) { return std::log(-y) * jumps.density_at(y); }, -b, -a,
            probe);
        *out = res.value;
        return res.converged;
    };
    return dyadic_windows_converge(window, lo, abs_y_end, probe.abs_tol);
}

}  // namespace

bool has_stationary_dist(const OUParams& params, const QuadratureSettings& settings) {
    if (!(params.theta > 0.0)) return false;
    return log_tail_finite(params.levy.jumps, settings);
}

double stationary_laplace(const OUParams& params, double q,
                          const QuadratureSettings& settings) {
    if (!(q >= 0.0)) throw std::domain_error("stationary_laplace requires q >= 0");
    if (!has_stationary_dist(params, settings))
        throw std::domain_error("no stationary distribution");
    if (params.levy.kill_rate != 0.0)
        throw std::domain_error("stationary_laplace requires kill_rate == 0");
    if (q == 0.0) return 1.0;
    // u = e^{-theta s}: int_0^inf Phi(q e^{-theta s}) ds = (1/theta) int_0^1 Phi(q u)/u du
    const double integral = adaptive_integrate(
        [&](double u) { return laplace_exponent(params.levy, q * u, settings) / u; },
        0.0, 1.0, settings);
    return std::exp(integral / params.theta);
}

}  // namespace ougf
