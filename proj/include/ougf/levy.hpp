#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "ougf/quadrature.hpp"
#include "ougf/random.hpp"

namespace ougf {

struct JumpAtom {
    double y;     // jump size, y < 0
    double rate;  // > 0
};

// Spectrally negative jump measure Lambda on (-inf, 0): a finite atom list or
// a density. A density carries a small-jump cutoff eps measured in 1 - e^y;
// jumps with 1 - e^y <= eps are dropped at simulation time while the drift
// compensation of the retained jumps is kept, so the simulated process has
// Laplace exponent
//   Phi_eps(q) = Phi(q) - integral over the dropped region of (e^{qy}-1+q(1-e^y)),
// a bias of order eps that vanishes as eps -> 0. eps <= 0 marks an
// untruncated density, which cannot be simulated.
class JumpSpec {
public:
    JumpSpec() = default;

    static JumpSpec atoms(std::vector<JumpAtom> atoms);

    // lambda(y) on (w_lo, w_hi) expressed via w = e^y, i.e. support
    // {y : w_lo < e^y < w_hi}. tail_alpha describes the density near y -> 0-:
    // lambda(log w)/w ~ C (1-w)^{-tail_alpha} as w -> 1 (0 if bounded).
    static JumpSpec density(std::function<double(double)> lambda, double eps,
                            double tail_alpha = 0.0, double w_lo = 0.0,
                            double w_hi = 1.0);

    bool empty() const { return !has_atoms_ && !has_density_; }
    bool is_atoms() const { return has_atoms_; }
    bool is_density() const { return has_density_; }

    const std::vector<JumpAtom>& atom_list() const { return atoms_; }
    // density at y, zero outside the declared support; the support test runs
    // in y-space because e^y underflows long before the tail becomes empty
    double density_at(double y) const {
        if (y <= y_lo_ || y >= y_hi_) return 0.0;
        return lambda_(y);
    }
    double eps() const { return eps_; }
    double tail_alpha() const { return tail_alpha_; }
    double w_lo() const { return w_lo_; }
    double w_hi() const { return w_hi_; }

private:
    bool has_atoms_ = false;
    bool has_density_ = false;
    std::vector<JumpAtom> atoms_;
    std::function<double(double)> lambda_;
    double eps_ = 0.0;
    double tail_alpha_ = 0.0;
    double w_lo_ = 0.0, w_hi_ = 1.0;
    double y_lo_ = -kInf, y_hi_ = 0.0;
};

struct LevyCharacteristics {
    double sigma = 0.0;    // >= 0
    double drift_c = 0.0;
    JumpSpec jumps;
    double kill_rate = 0.0;  // >= 0

    void validate() const;  // throws std::invalid_argument
};

struct OUParams {
    LevyCharacteristics levy;
    double theta = 0.0;  // > 0 inward, < 0 outward
};

// sum(F(1 - e^y) Lambda(dy)); F receives u = 1 - e^y in (0, 1).
// Densities are integrated with the u = v^2 endpoint substitution.
double jump_integral(const JumpSpec& jumps, const std::function<double(double)>& F,
                     const QuadratureSettings& settings = {});

// Checks int (|y|^2 and 1) Lambda(dy) < infinity: exact for atom lists,
// probed by quadrature (and the tail exponent) for densities.
bool jump_measure_integrable(const JumpSpec& jumps,
                             const QuadratureSettings& settings = {});

// Laplace exponent Phi(q) = -k + sigma^2 q^2 / 2 + c q
//                           + sum((e^{qy} - 1 + q(1 - e^y)) Lambda(dy)).
double laplace_exponent(const LevyCharacteristics& levy, double q,
                        const QuadratureSettings& settings = {});

// Piecewise events of one OU path. Between events the value follows the
// deterministic relaxation when sigma == 0; diffusive paths are exact at the
// recorded times only.
struct OUEvent {
    enum class Kind { Jump, Kill, Obs, End };
    double t;
    double z_pre;
    double z_post;
    Kind kind;
};

class OUPath {
public:
    double theta() const { return theta_; }
    double horizon() const { return horizon_; }
    bool killed() const { return kill_time_ < kInf; }
    double kill_time() const { return kill_time_; }

    const std::vector<OUEvent>& events() const { return events_; }
    const std::vector<double>& obs_times() const { return obs_times_; }
    // Observed values aligned with obs_times(); -inf at or after the kill time.
    const std::vector<double>& obs_values() const { return obs_values_; }
    double terminal_value() const { return terminal_; }

    // Value at an arbitrary time: exact for sigma == 0 paths; for diffusive
    // paths t must coincide with a recorded event or observation time.
    double value_at(double t) const;

private:
    friend class PreparedDriver;
    std::vector<OUEvent> events_;
    std::vector<double> obs_times_, obs_values_;
    double theta_ = 0.0, sigma_ = 0.0, drift_b_ = 0.0;
    double horizon_ = 0.0, terminal_ = 0.0;
    double kill_time_ = kInf;
};

// Exact event-driven simulation: between jumps the value advances by the
// closed-form Gaussian OU transition
//   Z(t+h) = e^{-theta h} Z(t) + b (1-e^{-theta h})/theta
//            + N(0, sigma^2 (1-e^{-2 theta h})/(2 theta)),
// with the theta -> 0 limits taken analytically; b is the drift plus the
// compensation of the (retained) jumps. Killing runs as an exponential clock.
// obs_times must be sorted and within [0, horizon].
OUPath simulate_ou(const OUParams& params, double z0, double horizon,
                   RandomStream stream, const std::vector<double>& obs_times = {});

// E[exp(q Z(t))] = exp(e^{-theta t} z0 q + int_0^t Phi(q e^{-theta s}) ds).
double ou_laplace_transform(const OUParams& params, double z0, double q, double t,
                            const QuadratureSettings& settings = {});

// True iff theta > 0 and the log-tail integral of Lambda over (-inf, -log 2)
// is finite (decided analytically for atoms, by doubling windows for densities).
bool has_stationary_dist(const OUParams& params,
                         const QuadratureSettings& settings = {});

// Laplace transform of the stationary law: exp(int_0^inf Phi(q e^{-theta s}) ds),
// evaluated through the substitution u = e^{-theta s}. Requires
// has_stationary_dist and kill_rate == 0.
double stationary_laplace(const OUParams& params, double q,
                          const QuadratureSettings& settings = {});

// Internal finite-activity form consumed by the simulators: compensated
// Gaussian drift, total jump rate and a jump sampler.
class PreparedDriver {
public:
    PreparedDriver() = default;
    PreparedDriver(const OUParams& params, const QuadratureSettings& settings);

    double sigma() const { return sigma_; }
    double theta() const { return theta_; }
    double drift_b() const { return drift_b_; }
    double jump_rate() const { return jump_rate_; }
    double kill_rate() const { return kill_rate_; }
    double sample_jump(RandomStream& stream) const;  // y < 0

    // Reusable entry point: one prepared driver can simulate many paths.
    OUPath simulate(double z0, double horizon, RandomStream stream,
                    const std::vector<double>& obs_times = {}) const;

private:
    double sigma_ = 0.0, theta_ = 0.0, drift_b_ = 0.0;
    double jump_rate_ = 0.0, kill_rate_ = 0.0;
    // atoms: categorical table; density: tabulated inverse CDF in w = e^y
    std::vector<double> atom_y_, atom_cum_;
    std::vector<double> grid_w_, grid_cdf_;
};

}  // namespace ougf
