#include "ougf/gf_sim.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <queue>
#include <stdexcept>

#include "ougf/special.hpp"
#include "ougf/stats.hpp"

namespace ougf {

double lq_statistic(const Snapshot& snapshot, double q) {
    if (!(q >= 0.0)) throw std::domain_error("lq_statistic requires q >= 0");
    if (q == 0.0) return static_cast<double>(snapshot.count);
    double sum = 0.0;
    for (double s : snapshot.sizes) sum += std::pow(s, q);
    return sum;
}

double empirical_average(const Snapshot& snapshot,
                         const std::function<double(double)>& f) {
    if (snapshot.count == 0)
        throw std::domain_error("empirical_average conditioned on an extinct snapshot");
    double sum = 0.0;
    for (double s : snapshot.sizes) sum += f(s);
    return sum / static_cast<double>(snapshot.count);
}

namespace {

struct InverseCdfTable {
    std::vector<double> x, cdf;
    double mass = 0.0;

    void build(const std::function<double(double)>& density, double lo, double hi,
               int cells, const QuadratureSettings& settings) {
        x.resize(cells + 1);
        cdf.resize(cells + 1);
        for (int i = 0; i <= cells; ++i)
            x[i] = lo + (hi - lo) * static_cast<double>(i) / cells;
        cdf[0] = 0.0;
        QuadratureSettings cell = settings;
        cell.abs_tol = std::max(settings.abs_tol, 1e-13);
        double cum = 0.0;
        for (int i = 1; i <= cells; ++i) {
            cum += adaptive_integrate(density, x[i - 1], x[i], cell);
            cdf[i] = cum;
        }
        mass = cum;
    }

    double sample(RandomStream& stream) const {
        const double target = stream.uniform() * mass;
        auto it = std::upper_bound(cdf.begin(), cdf.end(), target);
        std::size_t hi_idx = std::min<std::size_t>(it - cdf.begin(), cdf.size() - 1);
        if (hi_idx == 0) hi_idx = 1;
        const double c0 = cdf[hi_idx - 1], c1 = cdf[hi_idx];
        const double frac = (c1 > c0) ? (target - c0) / (c1 - c0) : 0.5;
        return x[hi_idx - 1] + frac * (x[hi_idx] - x[hi_idx - 1]);
    }
};

// Multi-child channel of the truncated measure: total rate plus a sampler.
struct BranchSampler {
    double rate = 0.0;
    std::vector<double> cum;           // atoms
    std::vector<MassPartition> parts;  // atoms
    bool density = false;
    InverseCdfTable table;  // binary two-child region, sampled in s1

    MassPartition sample(RandomStream& stream) const {
        if (!density) {
            const double target = stream.uniform() * rate;
            auto it = std::upper_bound(cum.begin(), cum.end(), target);
            const std::size_t idx =
                std::min<std::size_t>(it - cum.begin(), parts.size() - 1);
            return parts[idx];
        }
        const double s1 = table.sample(stream);
        return MassPartition::of({s1, 1.0 - s1});
    }
};

struct ParticleDriver {
    PreparedDriver driver;
    BranchSampler branch;
};

// Split the level-truncated measure into the single-child jump channel and the
// multi-child branch channel; the compensation of the multi-child channel goes
// into the driver drift, matching the psi decomposition.
ParticleDriver make_particle_driver(const GFCharacteristics& gf, double level,
                                    const SimCaps& caps,
                                    const QuadratureSettings& settings) {
    const DislocationMeasure nu = gf.nu.truncated(level);
    LevyCharacteristics levy;
    levy.sigma = gf.sigma;
    levy.kill_rate = 0.0;
    double drift = gf.drift_c;
    BranchSampler branch;

    if (nu.is_atoms()) {
        std::vector<JumpAtom> jumps;
        double cum = 0.0;
        for (const auto& a : nu.atom_list()) {
            if (a.s.is_single()) {
                if (a.s.s1() < 1.0) jumps.push_back({std::log(a.s.s1()), a.rate});
                continue;
            }
            drift += a.rate * (1.0 - a.s.s1());
            cum += a.rate;
            branch.cum.push_back(cum);
            branch.parts.push_back(a.s);
        }
        branch.rate = cum;
        levy.jumps = JumpSpec::atoms(std::move(jumps));
    } else {
        branch.density = true;
        const double u_star = std::exp(-nu.level());
        const double two_hi = 1.0 - u_star;  // s1 upper edge of the two-child region
        if (two_hi > 0.5) {
            branch.table.build([&nu](double s1) { return nu.density_at(s1); }, 0.5,
                               two_hi, 2048, settings);
            branch.rate = branch.table.mass;
            drift += adaptive_integrate(
                [&nu](double s1) { return (1.0 - s1) * nu.density_at(s1); }, 0.5,
                two_hi, settings);
        }
        if (u_star > 0.0) {
            const double w_lo = std::max(two_hi, 0.5);
            levy.jumps = JumpSpec::density(
                [g = nu](double y) {
                    return g.density_u(-std::expm1(y)) * std::exp(y);
                },
                caps.density_epsilon, nu.tail_alpha(), w_lo, 1.0);
        }
    }
    levy.drift_c = drift;
    ParticleDriver pd;
    pd.driver = PreparedDriver(OUParams{levy, gf.theta}, settings);
    pd.branch = std::move(branch);
    return pd;
}

struct Pending {
    double birth;
    std::uint32_t parent;
    std::uint32_t child_index;
    double position;  // a_u, log scale
    double offset;    // log s_k at birth (0 for the root)
    RandomStream stream;
};

struct PendingLater {
    bool operator()(const Pending& a, const Pending& b) const {
        if (a.birth != b.birth) return a.birth > b.birth;
        if (a.parent != b.parent) return a.parent > b.parent;
        return a.child_index > b.child_index;
    }
};

}  // namespace

Snapshot SimRun::snapshot(std::size_t time_index) const {
    if (time_index >= times_.size())
        throw std::out_of_range("snapshot index out of range");
    Snapshot snap;
    snap.t = times_[time_index];
    std::vector<std::uint32_t> ids;
    for (const auto& c : contributions_) {
        if (c.time_index == time_index) {
            snap.sizes.push_back(std::exp(c.log_size));
            ids.push_back(c.particle);
        }
    }
    std::vector<std::size_t> order(snap.sizes.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    // decreasing size; ties broken by birth time, then address
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (snap.sizes[a] != snap.sizes[b]) return snap.sizes[a] > snap.sizes[b];
        const auto& pa = particles_[ids[a]];
        const auto& pb = particles_[ids[b]];
        if (pa.birth_time != pb.birth_time) return pa.birth_time < pb.birth_time;
        return address(ids[a]) < address(ids[b]);
    });
    std::vector<double> sorted(snap.sizes.size());
    for (std::size_t i = 0; i < order.size(); ++i) sorted[i] = snap.sizes[order[i]];
    snap.sizes = std::move(sorted);
    snap.count = snap.sizes.size();
    return snap;
}

std::vector<Snapshot> SimRun::snapshots() const {
    std::vector<Snapshot> out;
    out.reserve(times_.size());
    for (std::size_t i = 0; i < times_.size(); ++i) out.push_back(snapshot(i));
    return out;
}

std::vector<std::uint32_t> SimRun::address(std::uint32_t particle) const {
    std::vector<std::uint32_t> addr;
    std::uint32_t cur = particle;
    while (particles_[cur].parent != kNoParent) {
        addr.push_back(particles_[cur].child_index);
        cur = particles_[cur].parent;
    }
    std::reverse(addr.begin(), addr.end());
    return addr;
}

SimRun simulate(const GFCharacteristics& gf, double level,
                const std::vector<double>& times, std::uint64_t seed,
                const SimCaps& caps) {
    return simulate_stream(gf, level, times, derive_stream(seed), caps);
}

SimRun simulate_stream(const GFCharacteristics& gf, double level,
                       const std::vector<double>& times, RandomStream root,
                       const SimCaps& caps) {
    if (!(level >= 0.0)) throw std::invalid_argument("level must be >= 0");
    for (std::size_t i = 0; i < times.size(); ++i)
        if (times[i] < 0.0 || (i > 0 && times[i] < times[i - 1]))
            throw std::invalid_argument("times must be sorted and nonnegative");

    SimRun run;
    run.gf_ = gf;
    run.level_ = level;
    run.times_ = times;
    if (times.empty()) return run;
    const double horizon = times.back();

    const QuadratureSettings settings;
    const ParticleDriver pd = make_particle_driver(gf, level, caps, settings);

    std::priority_queue<Pending, std::vector<Pending>, PendingLater> queue;
    queue.push({0.0, kNoParent, 0, 0.0, 0.0, root});
    std::uint64_t events = 0;
    std::vector<double> l2_mass(times.size(), 0.0);

    while (!queue.empty() && !run.aborted_) {
        if (run.particles_.size() >= caps.max_particles) {
            run.aborted_ = true;
            run.abort_reason_ = "max_particles cap exceeded";
            break;
        }
        Pending p = queue.top();
        queue.pop();
        const std::uint32_t id = static_cast<std::uint32_t>(run.particles_.size());

        RandomStream purpose = p.stream.child(0);
        RandomStream life_stream = purpose.child(1);
        RandomStream driver_stream = purpose.child(2);
        RandomStream split_stream = purpose.child(3);

        const double lifetime =
            pd.branch.rate > 0.0 ? life_stream.exponential(pd.branch.rate) : kInf;
        const double death = p.birth + lifetime;
        const double local_horizon = std::min(death, horizon) - p.birth;

        // alive on [birth, death)
        std::vector<double> obs;
        std::vector<std::uint32_t> obs_idx;
        for (std::size_t j = 0; j < times.size(); ++j) {
            if (times[j] >= p.birth && times[j] < death) {
                obs.push_back(times[j] - p.birth);
                obs_idx.push_back(static_cast<std::uint32_t>(j));
            }
        }

        OUPath path = pd.driver.simulate(p.position, local_horizon, driver_stream, obs);
        for (std::size_t k = 0; k < obs.size(); ++k) {
            const double z = path.obs_values()[k];
            run.contributions_.push_back({obs_idx[k], id, z});
            l2_mass[obs_idx[k]] += std::exp(2.0 * z);
        }

        std::size_t jump_count = 0;
        for (const auto& ev : path.events())
            if (ev.kind == OUEvent::Kind::Jump) ++jump_count;
        events += jump_count + 1;
        if (events > caps.max_events) {
            run.aborted_ = true;
            run.abort_reason_ = "max_events cap exceeded";
        }

        if (!run.aborted_ && death <= horizon) {
            const double z_death = path.terminal_value();
            const MassPartition atom = pd.branch.sample(split_stream);
            const auto& parts = atom.parts();
            for (std::size_t i = 0; i < parts.size(); ++i) {
                const double delta = std::log(parts[i]);
                queue.push({death, id, static_cast<std::uint32_t>(i + 1),
                            z_death + delta, delta,
                            p.stream.child(static_cast<std::uint64_t>(i + 1))});
            }
        }

        run.particles_.push_back(
            {p.parent, p.child_index, p.birth, p.offset, p.position, death});
    }

    for (std::size_t j = 0; j < times.size(); ++j) {
        if (l2_mass[j] > caps.max_l2_mass) {
            run.aborted_ = true;
            run.abort_reason_ = "max_l2_mass cap exceeded";
        }
    }
    return run;
}

SimRun apply_cut(const SimRun& run, double level_prime) {
    if (!(level_prime >= 0.0))
        throw std::invalid_argument("cut level must be >= 0");
    const auto& particles = run.particles();
    std::vector<char> alive(particles.size(), 1);
    for (std::uint32_t id = 0; id < particles.size(); ++id) {
        const auto& rec = particles[id];
        const bool self_cut =
            rec.child_index >= 2 && rec.birth_offset <= -level_prime;
        const bool parent_cut = rec.parent != kNoParent && !alive[rec.parent];
        alive[id] = !(self_cut || parent_cut);
    }
    SimRun out;
    out.gf_ = run.gf();
    out.level_ = std::min(run.level(), level_prime);
    out.times_ = run.times();
    out.aborted_ = run.aborted();
    out.abort_reason_ = run.abort_reason();
    out.particles_ = particles;
    for (const auto& c : run.contributions())
        if (alive[c.particle]) out.contributions_.push_back(c);
    return out;
}

SelectedPath selected_fragment_path(const SimRun& run) {
    const auto& particles = run.particles();
    // the chain of first children starting at the root
    std::vector<char> on_chain(particles.size(), 0);
    for (std::uint32_t id = 0; id < particles.size(); ++id) {
        const auto& rec = particles[id];
        if (rec.parent == kNoParent)
            on_chain[id] = rec.child_index == 0;
        else
            on_chain[id] = on_chain[rec.parent] && rec.child_index == 1;
    }
    SelectedPath path;
    path.times = run.times();
    path.sizes.assign(path.times.size(), 0.0);
    for (const auto& c : run.contributions())
        if (on_chain[c.particle]) path.sizes[c.time_index] = std::exp(c.log_size);
    return path;
}

namespace {

GFCharacteristics truncated_gf(const GFCharacteristics& gf, double level) {
    GFCharacteristics out = gf;
    out.nu = gf.nu.truncated(level);
    return out;
}

}  // namespace

MomentEstimate estimate_moment(const GFCharacteristics& gf, double level, double q,
                               double t, std::size_t reps, std::uint64_t seed,
                               const SimCaps& caps, const QuadratureSettings& settings) {
    if (!(q >= 0.0 && t >= 0.0))
        throw std::domain_error("estimate_moment requires q, t >= 0");
    const GFCharacteristics trunc = truncated_gf(gf, level);
    const double alpha = q / std::max(1.0, std::exp(gf.theta * t));
    if (!in_dom(trunc, alpha))
        throw std::domain_error(
            "moment range violated: q / max(1, e^{theta t}) outside dom(kappa)");

    MomentEstimate out;
    out.reps = reps;
    out.target = std::exp(adaptive_integrate(
        [&](double s) { return cumulant(trunc, q * std::exp(-gf.theta * s), settings); },
        0.0, t, settings));

    RandomStream master = derive_stream(seed);
    Welford acc;
    const std::vector<double> times{t};
    for (std::size_t r = 0; r < reps; ++r) {
        SimRun run = simulate_stream(gf, level, times, master.child(r), caps);
        if (run.aborted()) {
            ++out.aborted_runs;
            continue;
        }
        acc.add(lq_statistic(run.snapshot(0), q));
    }
    out.estimate = acc.mean;
    out.std_error = acc.std_error();
    return out;
}

std::vector<double> additive_martingale(const SimRun& run, double q,
                                        const std::vector<double>& times,
                                        const QuadratureSettings& settings) {
    if (!(q >= 0.0)) throw std::domain_error("additive_martingale requires q >= 0");
    const GFCharacteristics trunc = truncated_gf(run.gf(), run.level());
    const double theta = run.gf().theta;
    if (!in_dom(trunc, q))
        throw std::domain_error("q outside dom(kappa) of the simulated system");

    std::vector<double> out;
    for (double t : times) {
        auto it = std::find(run.times().begin(), run.times().end(), t);
        if (it == run.times().end())
            throw std::invalid_argument("martingale time is not a snapshot time");
        const std::size_t idx = it - run.times().begin();
        const Snapshot snap = run.snapshot(idx);
        double normalizer, exponent;
        if (theta > 0.0) {
            // time-varying exponent q e^{theta t}
            normalizer = adaptive_integrate(
                [&](double s) { return cumulant(trunc, q * std::exp(theta * s), settings); },
                0.0, t, settings);
            exponent = q * std::exp(theta * t);
        } else {
            normalizer = adaptive_integrate(
                [&](double s) { return cumulant(trunc, q * std::exp(-theta * s), settings); },
                0.0, t, settings);
            exponent = q;
        }
        out.push_back(std::exp(-normalizer) * lq_statistic(snap, exponent));
    }
    return out;
}

std::vector<double> count_martingale(const SimRun& run, const std::vector<double>& times,
                                     const QuadratureSettings& settings) {
    const GFCharacteristics trunc = truncated_gf(run.gf(), run.level());
    const double kappa0 = cumulant(trunc, 0.0, settings);
    if (!std::isfinite(kappa0))
        throw std::domain_error("count_martingale requires kappa(0) < infinity");
    std::vector<double> out;
    for (double t : times) {
        auto it = std::find(run.times().begin(), run.times().end(), t);
        if (it == run.times().end())
            throw std::invalid_argument("martingale time is not a snapshot time");
        const std::size_t idx = it - run.times().begin();
        out.push_back(std::exp(-kappa0 * t) *
                      static_cast<double>(run.snapshot(idx).count));
    }
    return out;
}

ManyToOneResult many_to_one_compare(const GFCharacteristics& gf, double level,
                                    const std::function<double(double)>& f, double t,
                                    std::size_t reps, std::uint64_t seed,
                                    const SimCaps& caps,
                                    const QuadratureSettings& settings) {
    const GFCharacteristics trunc = truncated_gf(gf, level);
    const double kappa0 = cumulant(trunc, 0.0, settings);
    if (!std::isfinite(kappa0))
        throw std::domain_error("many_to_one requires kappa(0) < infinity");

    RandomStream master = derive_stream(seed);
    RandomStream lhs_master = master.child(1);
    RandomStream rhs_master = master.child(2);

    const std::vector<double> times{t};
    Welford lhs_acc;
    for (std::size_t r = 0; r < reps; ++r) {
        SimRun run = simulate_stream(gf, level, times, lhs_master.child(r), caps);
        if (run.aborted()) continue;
        const Snapshot snap = run.snapshot(0);
        double sum = 0.0;
        for (double s : snap.sizes) sum += f(s);
        lhs_acc.add(sum);
    }

    // spine: exponential OU with exponent kappa - kappa(0), built from the
    // explicit tilted characteristics at alpha = 0
    const LevyCharacteristics spine = tilt_levy(trunc, 0.0, settings);
    const OUParams spine_params{spine, gf.theta};
    const PreparedDriver spine_driver(spine_params, settings);
    Welford rhs_acc;
    for (std::size_t r = 0; r < reps; ++r) {
        OUPath path = spine_driver.simulate(0.0, t, rhs_master.child(r), {t});
        rhs_acc.add(f(std::exp(path.obs_values()[0])));
    }

    ManyToOneResult out;
    const double scale = std::exp(-kappa0 * t);
    out.lhs = scale * lhs_acc.mean;
    out.lhs_se = scale * lhs_acc.std_error();
    out.rhs = rhs_acc.mean;
    out.rhs_se = rhs_acc.std_error();
    const double se = std::sqrt(out.lhs_se * out.lhs_se + out.rhs_se * out.rhs_se);
    out.zscore = se > 0.0 ? (out.lhs - out.rhs) / se : 0.0;
    return out;
}

double f_weight(const LevyCharacteristics& levy, double theta, double eta, double t,
                double x, const QuadratureSettings& settings) {
    if (!(eta > 0.0 && eta < 1.0)) throw std::domain_error("eta must lie in (0, 1)");
    if (!(t >= 0.0)) throw std::domain_error("f_weight requires t >= 0");
    if (!(x >= 0.0)) throw std::domain_error("f_weight requires x >= 0");
    if (x == 0.0) return 0.0;
    auto jump_tail = [&](double r) {
        const double q = 2.0 * std::exp(theta * r);
        if (levy.jumps.is_density() && q <= levy.jumps.tail_alpha() - 1.0)
            throw std::domain_error("divergent exponent integral in F_eta");
        return jump_integral(
            levy.jumps, [q](double u) { return std::pow(u, q); }, settings);
    };
    const double f1_exponent = t == 0.0 ? 0.0
                                        : adaptive_integrate(
                                              [&](double r) {
                                                  return laplace_exponent(
                                                      levy, 2.0 * std::exp(theta * r),
                                                      settings);
                                              },
                                              0.0, t, settings);
    const double feta_exponent =
        t == 0.0 ? 0.0
                 : adaptive_integrate([&](double r) { return jump_tail(r); }, 0.0, t,
                                      settings) /
                       eta;
    return std::pow(x, 2.0 * std::exp(theta * t)) * std::exp(-f1_exponent) *
           std::exp(-feta_exponent);
}

SimRun cell_system_simulate(const LevyCharacteristics& levy, double theta,
                            const std::vector<double>& times, std::uint64_t seed,
                            const SimCaps& caps) {
    return cell_system_simulate_stream(levy, theta, times, derive_stream(seed), caps);
}

SimRun cell_system_simulate_stream(const LevyCharacteristics& levy, double theta,
                                   const std::vector<double>& times, RandomStream root,
                                   const SimCaps& caps) {
    for (std::size_t i = 0; i < times.size(); ++i)
        if (times[i] < 0.0 || (i > 0 && times[i] < times[i - 1]))
            throw std::invalid_argument("times must be sorted and nonnegative");

    SimRun run;
    run.level_ = kInf;
    run.times_ = times;
    const QuadratureSettings settings;
    try {
        run.gf_ = binary_gf_of_levy(levy, theta, settings);
    } catch (const std::exception&) {
        run.gf_ = GFCharacteristics{};
        run.gf_.theta = theta;
    }
    if (times.empty()) return run;
    const double horizon = times.back();

    const PreparedDriver driver(OUParams{levy, theta}, settings);

    std::priority_queue<Pending, std::vector<Pending>, PendingLater> queue;
    queue.push({0.0, kNoParent, 0, 0.0, 0.0, root});
    std::uint64_t events = 0;
    std::vector<double> l2_mass(times.size(), 0.0);

    while (!queue.empty() && !run.aborted_) {
        if (run.particles_.size() >= caps.max_particles) {
            run.aborted_ = true;
            run.abort_reason_ = "max_particles cap exceeded";
            break;
        }
        Pending p = queue.top();
        queue.pop();
        const std::uint32_t id = static_cast<std::uint32_t>(run.particles_.size());

        RandomStream driver_stream = p.stream.child(0);
        std::vector<double> obs;
        std::vector<std::uint32_t> obs_idx;
        for (std::size_t j = 0; j < times.size(); ++j) {
            if (times[j] >= p.birth) {
                obs.push_back(times[j] - p.birth);
                obs_idx.push_back(static_cast<std::uint32_t>(j));
            }
        }

        OUPath path = driver.simulate(p.position, horizon - p.birth, driver_stream, obs);
        for (std::size_t k = 0; k < obs.size(); ++k) {
            const double z = path.obs_values()[k];
            if (std::isfinite(z)) {  // killed cells drop out
                run.contributions_.push_back({obs_idx[k], id, z});
                l2_mass[obs_idx[k]] += std::exp(2.0 * z);
            }
        }

        std::uint32_t jump_no = 0;
        for (const auto& ev : path.events()) {
            if (ev.kind != OUEvent::Kind::Jump) continue;
            ++jump_no;
            ++events;
            // child size = x- - x = e^{z_pre} (1 - e^{jump})
            const double y = ev.z_post - ev.z_pre;
            const double child_log = ev.z_pre + std::log(-std::expm1(y));
            queue.push({p.birth + ev.t, id, jump_no, child_log,
                        child_log - ev.z_pre, p.stream.child(jump_no)});
        }
        ++events;
        if (events > caps.max_events) {
            run.aborted_ = true;
            run.abort_reason_ = "max_events cap exceeded";
        }

        run.particles_.push_back({p.parent, p.child_index, p.birth, p.offset,
                                  p.position,
                                  path.killed() ? p.birth + path.kill_time() : kInf});
    }

    for (std::size_t j = 0; j < times.size(); ++j) {
        if (l2_mass[j] > caps.max_l2_mass) {
            run.aborted_ = true;
            run.abort_reason_ = "max_l2_mass cap exceeded";
        }
    }
    return run;
}

void write_snapshot_csv(const std::vector<SimRun>& runs, const std::string& sizes_path,
                        const std::string& counts_path) {
    std::ofstream sizes(sizes_path);
    std::ofstream counts(counts_path);
    if (!sizes || !counts)
        throw std::runtime_error("cannot open snapshot dump files for writing");
    sizes << "run_id,t,rank,size\n";
    counts << "run_id,t,count\n";
    auto fmt = [](double v) { return format_g17(v); };
    for (std::size_t r = 0; r < runs.size(); ++r) {
        for (std::size_t j = 0; j < runs[r].times().size(); ++j) {
            const Snapshot snap = runs[r].snapshot(j);
            for (std::size_t rank = 0; rank < snap.sizes.size(); ++rank) {
                sizes << r << ',' << fmt(snap.t) << ',' << rank + 1 << ','
                      << fmt(snap.sizes[rank]) << '\n';
            }
            counts << r << ',' << fmt(snap.t) << ',' << snap.count << '\n';
        }
    }
}

}  // namespace ougf
