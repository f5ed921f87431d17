// Acceptance suite: every criterion prints one PASS/FAIL line; the exit code
// is the number of failures. Seeds are pinned so the suite is deterministic.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "ougf/dislocation.hpp"
#include "ougf/gf_sim.hpp"
#include "ougf/levy.hpp"
#include "ougf/quadrature.hpp"
#include "ougf/random.hpp"
#include "ougf/rrt.hpp"
#include "ougf/special.hpp"
#include "ougf/stats.hpp"

using namespace ougf;

namespace {

constexpr double kLog2 = 0.6931471805599453;

int g_failures = 0;

void report(int id, const std::string& name, bool pass, const std::string& detail,
            double seconds) {
    std::printf("%s %2d %-28s %s  [%.1fs]\n", pass ? "PASS" : "FAIL", id,
                name.c_str(), detail.c_str(), seconds);
    std::fflush(stdout);
    if (!pass) ++g_failures;
}

template <typename Fn>
void criterion(int id, const std::string& name, Fn&& body) {
    const auto start = std::chrono::steady_clock::now();
    bool pass = false;
    std::string detail;
    try {
        pass = body(detail);
    } catch (const std::exception& err) {
        detail = std::string("exception: ") + err.what();
    }
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
            .count();
    report(id, name, pass, detail, seconds);
}

GFCharacteristics half_half(double theta) {
    GFCharacteristics gf;
    gf.theta = theta;
    gf.nu = DislocationMeasure::atoms({{1.0, MassPartition::of({0.5, 0.5})}});
    return gf;
}

GFCharacteristics three_child() {
    GFCharacteristics gf;
    gf.theta = 1.0;
    gf.nu = DislocationMeasure::atoms({{1.0, MassPartition::of({0.5, 0.3, 0.2})}});
    return gf;
}

std::string fmt(const char* pattern, double a, double b, double c) {
    char buf[160];
    std::snprintf(buf, sizeof(buf), pattern, a, b, c);
    return buf;
}

// --- criterion bodies ----------------------------------------------------

bool yule_reduction(std::string& detail) {
    const MomentEstimate est =
        estimate_moment(half_half(1.0), 10.0, 0.0, 1.0, 10000, 101);
    const double target = std::exp(1.0);
    const double z = (est.estimate - target) / est.std_error;
    detail = fmt("E[N(1)]=%.4f target=%.4f z=%+.2f", est.estimate, target, z);
    return std::abs(z) < 3.0;
}

bool moment_formula(std::string& detail) {
    QuadratureSettings tight;
    tight.abs_tol = 1e-12;
    tight.rel_tol = 1e-12;
    const MomentEstimate est =
        estimate_moment(half_half(1.0), 10.0, 2.0, 1.0, 10000, 102, SimCaps{}, tight);
    const double frozen = 1.6330780278354978;  // independent high-precision value
    if (std::abs(est.target - frozen) > 1e-9) {
        detail = fmt("quadrature target %.12f drifted from %.12f", est.target,
                     frozen, 0.0);
        return false;
    }
    const double z = (est.estimate - est.target) / est.std_error;
    detail = fmt("E[sum X^2]=%.4f target=%.4f z=%+.2f", est.estimate, est.target, z);
    return std::abs(z) < 3.0;
}

bool ou_laplace(std::string& detail) {
    LevyCharacteristics levy;
    levy.sigma = 1.0;
    const OUParams params{levy, 1.0};
    const PreparedDriver driver(params, QuadratureSettings{});
    Welford acc;
    RandomStream master = derive_stream(103);
    for (std::size_t r = 0; r < 100000; ++r) {
        OUPath path = driver.simulate(0.0, 1.0, master.child(r), {1.0});
        acc.add(std::exp(2.0 * path.obs_values()[0]));
    }
    const double target = std::exp(1.0 - std::exp(-2.0));
    const double z = (acc.mean - target) / acc.std_error();
    detail = fmt("E[e^{2Z(1)}]=%.5f target=%.5f z=%+.2f", acc.mean, target, z);
    return std::abs(z) < 3.0;
}

bool stationary_moments(std::string& detail) {
    GFCharacteristics gauss;
    gauss.sigma = 1.0;
    gauss.theta = 1.0;
    QuadratureSettings tight;
    tight.abs_tol = 1e-12;
    tight.rel_tol = 1e-12;
    double worst = 0.0;
    for (double q : {1.0, 2.0, 4.0}) {
        const double value = stationary_gf_moment(gauss, q, tight);
        const double target = std::exp(q * q / 4.0);
        worst = std::max(worst, std::abs(value / target - 1.0));
    }
    detail = fmt("max rel err %.2e (tolerance 1e-8)", worst, 0.0, 0.0);
    return worst < 1e-8;
}

bool selected_fragment(std::string& detail) {
    const GFCharacteristics gf = half_half(1.0);
    Welford acc;
    RandomStream master = derive_stream(105);
    for (std::size_t r = 0; r < 10000; ++r) {
        SimRun run = simulate_stream(gf, 10.0, {1.0}, master.child(r), {});
        const SelectedPath path = selected_fragment_path(run);
        acc.add(path.sizes[0] * path.sizes[0]);
    }
    const double target = std::exp(adaptive_integrate(
        [&](double s) { return phi_star(gf, 2.0 * std::exp(-s)); }, 0.0, 1.0));
    const double z = (acc.mean - target) / acc.std_error();
    detail = fmt("E[X*(1)^2]=%.5f target=%.5f z=%+.2f", acc.mean, target, z);
    return std::abs(z) < 3.0;
}

bool martingales(std::string& detail) {
    const std::vector<double> times{0.5, 1.0, 2.0};
    double worst_z = 0.0;
    std::uint64_t seed = 106;
    for (double theta : {1.0, -0.5}) {
        const GFCharacteristics gf = half_half(theta);
        std::vector<Welford> additive(times.size()), count(times.size());
        RandomStream master = derive_stream(seed++);
        for (std::size_t r = 0; r < 10000; ++r) {
            SimRun run = simulate_stream(gf, 10.0, times, master.child(r), {});
            const std::vector<double> add = additive_martingale(run, 2.0, times);
            const std::vector<double> cnt = count_martingale(run, times);
            for (std::size_t j = 0; j < times.size(); ++j) {
                additive[j].add(add[j]);
                count[j].add(cnt[j]);
            }
        }
        for (std::size_t j = 0; j < times.size(); ++j) {
            worst_z = std::max(worst_z, std::abs((additive[j].mean - 1.0) /
                                                 additive[j].std_error()));
            worst_z = std::max(worst_z, std::abs((count[j].mean - 1.0) /
                                                 count[j].std_error()));
        }
    }
    detail = fmt("12 martingale means, worst |z|=%.2f", worst_z, 0.0, 0.0);
    return worst_z < 3.0;
}

bool embedding_truncation(std::string& detail) {
    const GFCharacteristics gf = three_child();
    const double cut_level = std::log(4.0);  // threshold 1/4 drops the 0.2 child
    Welford cut_acc, direct_acc;
    RandomStream master = derive_stream(108);
    for (std::size_t r = 0; r < 10000; ++r) {
        SimRun fine = simulate_stream(gf, 10.0, {1.0}, master.child(1).child(r), {});
        cut_acc.add(lq_statistic(apply_cut(fine, cut_level).snapshot(0), 2.0));
        SimRun direct =
            simulate_stream(gf, cut_level, {1.0}, master.child(2).child(r), {});
        direct_acc.add(lq_statistic(direct.snapshot(0), 2.0));
    }
    const double se = std::sqrt(cut_acc.std_error() * cut_acc.std_error() +
                                direct_acc.std_error() * direct_acc.std_error());
    const double z = (cut_acc.mean - direct_acc.mean) / se;

    bool monotone = true;
    RandomStream mono_master = derive_stream(109);
    for (std::size_t r = 0; r < 200 && monotone; ++r) {
        SimRun run = simulate_stream(gf, 10.0, {1.0}, mono_master.child(r), {});
        double prev = -1.0;
        for (double cut : {0.5, std::log(4.0), 3.0, 10.0}) {
            const double lq = lq_statistic(apply_cut(run, cut).snapshot(0), 2.0);
            if (lq < prev - 1e-12) monotone = false;
            prev = lq;
        }
    }
    detail = fmt("cut-vs-direct z=%+.2f, fixed-seed monotone=%.0f", z,
                 monotone ? 1.0 : 0.0, 0.0);
    return std::abs(z) < 3.0 && monotone;
}

bool many_to_one(std::string& detail) {
    const GFCharacteristics gf = half_half(1.0);
    const ManyToOneResult sq = many_to_one_compare(
        gf, 10.0, [](double x) { return x * x; }, 1.0, 10000, 110);
    const ManyToOneResult one = many_to_one_compare(
        gf, 10.0, [](double) { return 1.0; }, 1.0, 10000, 111);
    detail = fmt("z(x^2)=%+.2f z(1)=%+.2f", sq.zscore, one.zscore, 0.0);
    return std::abs(sq.zscore) < 3.0 && std::abs(one.zscore) < 3.0;
}

bool law_of_large_numbers(std::string& detail) {
    const GFCharacteristics gf = half_half(1.0);
    const double target = stationary_gf_moment(gf, 2.0);
    const std::vector<double> times{3.0, 6.0, 9.0};
    const std::vector<std::size_t> reps{2000, 2000, 1000};
    // empirical average over the pooled fragment population of the non-extinct
    // runs (the estimator of the stationary moment); the per-run averages are
    // reported alongside to document their larger finite-t bias
    std::vector<Welford> per_run(times.size());
    std::vector<double> pooled_f(times.size(), 0.0), pooled_se(times.size(), 0.0);
    std::uint64_t seed = 112;
    for (std::size_t j = 0; j < times.size(); ++j) {
        Welford sum_f, sum_n;
        double cov = 0.0;  // for the ratio-estimator standard error
        std::vector<double> fs, ns;
        RandomStream master = derive_stream(seed++);
        for (std::size_t r = 0; r < reps[j]; ++r) {
            SimRun run = simulate_stream(gf, 10.0, {times[j]}, master.child(r), {});
            const Snapshot snap = run.snapshot(0);
            if (snap.count == 0) continue;  // conditioned on non-extinction
            per_run[j].add(empirical_average(snap, [](double x) { return x * x; }));
            double f = 0.0;
            for (double x : snap.sizes) f += x * x;
            sum_f.add(f);
            sum_n.add(static_cast<double>(snap.count));
            fs.push_back(f);
            ns.push_back(static_cast<double>(snap.count));
        }
        for (std::size_t r = 0; r < fs.size(); ++r)
            cov += (fs[r] - sum_f.mean) * (ns[r] - sum_n.mean);
        cov /= static_cast<double>(fs.size() - 1);
        const double ratio = sum_f.mean / sum_n.mean;
        // delta-method SE of the ratio of means
        const double var =
            (sum_f.variance() - 2.0 * ratio * cov + ratio * ratio * sum_n.variance()) /
            (sum_n.mean * sum_n.mean * static_cast<double>(fs.size()));
        pooled_f[j] = ratio;
        pooled_se[j] = std::sqrt(std::max(var, 0.0));
    }
    const double gap3 = std::abs(pooled_f[0] - target);
    const double gap6 = std::abs(pooled_f[1] - target);
    const double gap9 = std::abs(pooled_f[2] - target);
    const bool gate6 = gap6 <= 3.0 * pooled_se[1] + 0.05 * target;
    const bool approach = gap3 >= gap6 - 2.0 * (pooled_se[0] + pooled_se[1]) &&
                          gap6 >= gap9 - 2.0 * (pooled_se[1] + pooled_se[2]);
    detail =
        fmt("pooled gaps t=3,6,9: %.4f %.4f %.4f", gap3, gap6, gap9) +
        fmt(" (target %.4f); per-run means %.3f", target, per_run[0].mean, 0.0) +
        fmt(" %.3f %.3f (documented finite-t bias)", per_run[1].mean,
            per_run[2].mean, 0.0);
    return gate6 && approach;
}

bool generator_residual(std::string& detail) {
    const GFCharacteristics gf = half_half(1.0);
    C2Function fn;
    fn.f = [](double x) {
        const double u = std::log(x);
        return std::exp(-u * u);
    };
    fn.df = [](double x) {
        const double u = std::log(x);
        return std::exp(-u * u) * (-2.0 * u) / x;
    };
    fn.d2f = [](double x) {
        const double u = std::log(x);
        return std::exp(-u * u) * (4.0 * u * u + 2.0 * u - 2.0) / (x * x);
    };
    const double t = 1.0, h = 0.1;
    Welford res_h, res_h2, halving;
    RandomStream master = derive_stream(115);
    for (std::size_t r = 0; r < 20000; ++r) {
        SimRun run =
            simulate_stream(gf, 10.0, {t, t + 0.5 * h, t + h}, master.child(r), {});
        auto sum_f = [&](std::size_t j) {
            double sum = 0.0;
            for (double x : run.snapshot(j).sizes) sum += fn.f(x);
            return sum;
        };
        double gen = 0.0;
        for (double x : run.snapshot(0).sizes) gen += generator_apply(gf, fn, x);
        const double f0 = sum_f(0);
        const double d_h = (sum_f(2) - f0) / h;
        const double d_h2 = (sum_f(1) - f0) / (0.5 * h);
        res_h.add(d_h - gen);
        res_h2.add(d_h2 - gen);
        halving.add((d_h2 - gen) - 0.5 * (d_h - gen));
    }
    const double z = halving.mean / halving.std_error();
    detail = fmt("residual(0.1)=%.4f residual(0.05)=%.4f halving z=%+.2f",
                 res_h.mean, res_h2.mean, z);
    return std::abs(z) < 3.0;
}

double rrt_sum_sq(std::size_t n, double t, RandomStream run) {
    const rrt::RecursiveTree tree = rrt::build_tree(n, run.child(1));
    const rrt::DestructionSchedule schedule = rrt::draw_schedule(tree, run.child(2));
    const rrt::ClusterPartition part = rrt::destroy_at(tree, schedule, t);
    double sum = 0.0;
    for (double w : rrt::cluster_weights(part, n, t)) sum += w * w;
    return sum;
}

bool rrt_moments(std::string& detail) {
    const double t = std::log(4.0 / 3.0);
    const double target = rrt::rrt_moment(2.0, t);

    // the stated gate: n = 1e5 with 200 replications
    Welford gate_acc;
    RandomStream master = derive_stream(116);
    for (std::size_t r = 0; r < 200; ++r)
        gate_acc.add(rrt_sum_sq(100000, t, master.child(9).child(r)));
    const bool gate = std::abs(gate_acc.mean - target) <=
                      std::max(3.0 * gate_acc.std_error(), 0.05 * target);

    // gap trend across n, with enough replications to resolve the finite-n
    // bias against MC noise
    const std::vector<std::size_t> sizes{1000, 10000, 100000};
    const std::vector<std::size_t> reps{8000, 3000, 1200};
    std::vector<double> gaps, ses;
    for (std::size_t k = 0; k < sizes.size(); ++k) {
        Welford acc;
        RandomStream n_master = master.child(k);
        for (std::size_t r = 0; r < reps[k]; ++r)
            acc.add(rrt_sum_sq(sizes[k], t, n_master.child(r)));
        gaps.push_back(std::abs(acc.mean - target));
        ses.push_back(acc.std_error());
    }
    const bool trend = gaps[1] <= gaps[0] + 2.0 * (ses[0] + ses[1]) &&
                       gaps[2] <= gaps[1] + 2.0 * (ses[1] + ses[2]);
    detail = fmt("est(1e5,200 reps)=%.4f target=%.4f;", gate_acc.mean, target, 0.0) +
             fmt(" gaps n=1e3,1e4,1e5: %.4f %.4f %.4f", gaps[0], gaps[1], gaps[2]);
    return gate && trend;
}

bool binary_correspondence(std::string& detail) {
    LevyCharacteristics levy;
    levy.jumps = JumpSpec::atoms({{-kLog2, 1.0}});
    const double theta = 1.0;
    const GFCharacteristics atom_gf = half_half(theta);

    Welford cell_acc;
    RandomStream master = derive_stream(117);
    for (std::size_t r = 0; r < 10000; ++r) {
        SimRun run =
            cell_system_simulate_stream(levy, theta, {1.0}, master.child(r), {});
        cell_acc.add(lq_statistic(run.snapshot(0), 2.0));
    }
    const MomentEstimate atom_est =
        estimate_moment(atom_gf, 10.0, 2.0, 1.0, 10000, 118);
    const double se = std::sqrt(cell_acc.std_error() * cell_acc.std_error() +
                                atom_est.std_error * atom_est.std_error);
    const double z = (cell_acc.mean - atom_est.estimate) / se;

    double worst_kappa = 0.0;
    const GFCharacteristics mapped = binary_gf_of_levy(levy, theta);
    for (double q : {0.0, 0.5, 1.0, 2.0, 3.0}) {
        worst_kappa = std::max(worst_kappa, std::abs(cumulant_from_levy(levy, q) -
                                                     cumulant(mapped, q)));
    }
    detail = fmt("cell-vs-atom z=%+.2f, kappa gap %.2e (tol 1e-10)", z, worst_kappa,
                 0.0);
    return std::abs(z) < 3.0 && worst_kappa <= 1e-10;
}

bool f_weight_supermartingale(std::string& detail) {
    LevyCharacteristics levy;
    levy.drift_c = 0.1;
    levy.jumps = JumpSpec::atoms({{-0.7, 0.8}, {-1.5, 0.4}});
    const double theta = 1.0, eta = 0.5, s = 0.0, t = 1.0, x = 1.0;
    const PreparedDriver driver(OUParams{levy, theta}, QuadratureSettings{});
    Welford acc;
    RandomStream master = derive_stream(119);
    for (std::size_t r = 0; r < 10000; ++r) {
        OUPath path = driver.simulate(std::log(x), t, master.child(r), {t});
        double total =
            f_weight(levy, theta, eta, s + t, std::exp(path.obs_values()[0]));
        for (const auto& ev : path.events()) {
            if (ev.kind != OUEvent::Kind::Jump) continue;
            const double drop =
                std::exp(ev.z_pre) * (-std::expm1(ev.z_post - ev.z_pre));
            total += f_weight(levy, theta, eta, s + ev.t, drop);
        }
        acc.add(total);
    }
    const double bound = f_weight(levy, theta, eta, s, x);
    const double slack = (acc.mean - bound) / acc.std_error();
    detail = fmt("mean=%.5f bound=%.5f one-sided z=%+.2f", acc.mean, bound, slack);
    return acc.mean <= bound + 3.0 * acc.std_error();
}

}  // namespace

int main() {
    std::printf("acceptance suite\n");
    criterion(1, "yule-count-mean", yule_reduction);
    criterion(2, "moment-formula", moment_formula);
    criterion(3, "ou-laplace-transform", ou_laplace);
    criterion(4, "stationary-moments", stationary_moments);
    criterion(5, "selected-fragment", selected_fragment);
    criterion(6, "martingales", martingales);
    criterion(7, "embedding-truncation", embedding_truncation);
    criterion(8, "many-to-one", many_to_one);
    criterion(9, "law-of-large-numbers", law_of_large_numbers);
    criterion(10, "generator-residual", generator_residual);
    criterion(11, "rrt-gamma-ratio", rrt_moments);
    criterion(12, "binary-correspondence", binary_correspondence);
    criterion(13, "f-weight-supermartingale", f_weight_supermartingale);
    std::printf("%d of 13 criteria passed\n", 13 - g_failures);
    return g_failures;
}
