#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "ougf/dislocation.hpp"
#include "ougf/levy.hpp"
#include "ougf/random.hpp"

namespace ougf {

struct SimCaps {
    std::size_t max_particles = 1'000'000;
    std::uint64_t max_events = 100'000'000;
    double max_l2_mass = 1e12;
    // small-jump cutoff (in 1 - s1) for the single-child channel of density
    // measures; the documented epsilon-truncation bias knob
    double density_epsilon = 1e-4;
};

// Fragment sizes at one time, in decreasing order; killed/extinct particles
// are excluded, so count == sizes.size().
struct Snapshot {
    double t = 0.0;
    std::vector<double> sizes;
    std::size_t count = 0;
};

// sum_i sizes_i^q, with the q = 0 convention sum_i 1 = N(t).
double lq_statistic(const Snapshot& snapshot, double q);

// N(t)^{-1} sum_i f(sizes_i); throws on an extinct snapshot.
double empirical_average(const Snapshot& snapshot,
                         const std::function<double(double)>& f);

constexpr std::uint32_t kNoParent = 0xFFFFFFFFu;

struct ParticleRecord {
    std::uint32_t parent = kNoParent;
    std::uint32_t child_index = 0;  // 1-based among siblings; 0 for the root
    double birth_time = 0.0;
    double birth_offset = 0.0;  // log s_k applied at birth (0 for the root)
    double birth_position = 0.0;
    double death_time = 0.0;  // +inf when the particle outlives the horizon
};

struct SnapContribution {
    std::uint32_t time_index;
    std::uint32_t particle;
    double log_size;
};

class SimRun {
public:
    const GFCharacteristics& gf() const { return gf_; }
    double level() const { return level_; }
    const std::vector<double>& times() const { return times_; }
    bool aborted() const { return aborted_; }
    const std::string& abort_reason() const { return abort_reason_; }

    const std::vector<ParticleRecord>& particles() const { return particles_; }
    const std::vector<SnapContribution>& contributions() const { return contributions_; }

    Snapshot snapshot(std::size_t time_index) const;
    std::vector<Snapshot> snapshots() const;

    // Ulam-Harris address of a particle (root = empty).
    std::vector<std::uint32_t> address(std::uint32_t particle) const;

private:
    friend SimRun simulate_stream(const GFCharacteristics&, double,
                                  const std::vector<double>&, RandomStream,
                                  const SimCaps&);
    friend SimRun cell_system_simulate_stream(const LevyCharacteristics&, double,
                                              const std::vector<double>&, RandomStream,
                                              const SimCaps&);
    friend SimRun apply_cut(const SimRun&, double);

    GFCharacteristics gf_;
    double level_ = kInf;
    std::vector<double> times_;
    bool aborted_ = false;
    std::string abort_reason_;
    std::vector<ParticleRecord> particles_;
    std::vector<SnapContribution> contributions_;
};

// Event-driven simulation of the branching system at truncation level `level`:
// single-child dislocations feed the driver's jump measure, multi-child
// dislocations branch at the truncated rate, and every particle's randomness
// comes from the stream derived at its Ulam-Harris address.
SimRun simulate(const GFCharacteristics& gf, double level,
                const std::vector<double>& times, std::uint64_t seed,
                const SimCaps& caps = {});
SimRun simulate_stream(const GFCharacteristics& gf, double level,
                       const std::vector<double>& times, RandomStream root,
                       const SimCaps& caps = {});

// Pathwise kill rule at a lower level: a particle dies (with its subtree) iff
// it is a non-first child born with offset <= -level'. The result is
// distributed as a direct run at level'.
SimRun apply_cut(const SimRun& run, double level_prime);

// Sizes of the fragment obtained by always following child 1, aligned with
// run.times(); 0 after the selected line is killed.
struct SelectedPath {
    std::vector<double> times;
    std::vector<double> sizes;
};
SelectedPath selected_fragment_path(const SimRun& run);

struct MomentEstimate {
    double estimate = 0.0;
    double std_error = 0.0;
    double target = 0.0;  // exp(int_0^t kappa^level(q e^{-theta s}) ds)
    std::size_t reps = 0;
    std::size_t aborted_runs = 0;
};

// MC mean of lq_statistic over independent runs against the moment formula.
// Requires q / max(1, e^{theta t}) in dom(kappa^level).
MomentEstimate estimate_moment(const GFCharacteristics& gf, double level, double q,
                               double t, std::size_t reps, std::uint64_t seed,
                               const SimCaps& caps = {},
                               const QuadratureSettings& settings = {});

// Additive martingale at the requested times (must be snapshot times of the
// run). theta <= 0: exp(-int_0^t kappa(q e^{-theta s}) ds) sum X_i(t)^q;
// theta > 0: exp(-int_0^t kappa(q e^{theta s}) ds) sum X_i(t)^{q e^{theta t}}.
std::vector<double> additive_martingale(const SimRun& run, double q,
                                        const std::vector<double>& times,
                                        const QuadratureSettings& settings = {});

// e^{-kappa(0) t} N(t); requires kappa(0) < infinity.
std::vector<double> count_martingale(const SimRun& run,
                                     const std::vector<double>& times,
                                     const QuadratureSettings& settings = {});

struct ManyToOneResult {
    double lhs = 0.0, lhs_se = 0.0;  // e^{-kappa(0) t} E sum f(X_i(t))
    double rhs = 0.0, rhs_se = 0.0;  // E f(spine(t))
    double zscore = 0.0;
};

// Two-sided MC comparison of the empirical-measure side against the spine,
// an exponential OU process with exponent kappa - kappa(0) simulated from the
// explicit tilted characteristics.
ManyToOneResult many_to_one_compare(const GFCharacteristics& gf, double level,
                                    const std::function<double(double)>& f, double t,
                                    std::size_t reps, std::uint64_t seed,
                                    const SimCaps& caps = {},
                                    const QuadratureSettings& settings = {});

// F(t, x) = x^{2 e^{theta t}} F1(t) F_eta(t), with
// F1(t) = exp(-int_0^t Phi(2 e^{theta r}) dr) and
// F_eta(t) = exp(-eta^{-1} int_0^t (kappa(2 e^{theta r}) - Phi(2 e^{theta r})) dr).
double f_weight(const LevyCharacteristics& levy, double theta, double eta, double t,
                double x, const QuadratureSettings& settings = {});

// Binary cell system driven by exp(OU): every negative jump of a cell of size
// x- -> x spawns a child of size x- - x; killing removes the cell. The
// returned run carries the binary-correspondence GF characteristics when the
// mapping is representable.
SimRun cell_system_simulate(const LevyCharacteristics& levy, double theta,
                            const std::vector<double>& times, std::uint64_t seed,
                            const SimCaps& caps = {});
SimRun cell_system_simulate_stream(const LevyCharacteristics& levy, double theta,
                                   const std::vector<double>& times, RandomStream root,
                                   const SimCaps& caps = {});

// Snapshot dumps: (run_id, t, rank, size) rows and (run_id, t, count) rows.
void write_snapshot_csv(const std::vector<SimRun>& runs, const std::string& sizes_path,
                        const std::string& counts_path);

}  // namespace ougf
