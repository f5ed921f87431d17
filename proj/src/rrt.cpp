#include "ougf/rrt.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "ougf/special.hpp"

namespace ougf::rrt {

namespace {
constexpr double kEulerGamma = 0.5772156649015328606;
constexpr double kLog2 = 0.6931471805599453094;
}  // namespace

RecursiveTree build_tree(std::size_t n, RandomStream stream) {
    if (n < 1) throw std::invalid_argument("build_tree requires n >= 1");
    RecursiveTree tree;
    tree.n = n;
    tree.parent.assign(n + 1, 0);
    for (std::size_t i = 2; i <= n; ++i) {
        const auto choices = static_cast<double>(i - 1);
        const auto pick = static_cast<std::uint32_t>(stream.uniform() * choices);
        tree.parent[i] = 1 + std::min<std::uint32_t>(pick, static_cast<std::uint32_t>(i - 2));
    }
    return tree;
}

DestructionSchedule draw_schedule(const RecursiveTree& tree, RandomStream stream) {
    DestructionSchedule schedule;
    schedule.edge_clock.assign(tree.n + 1, 0.0);
    for (std::size_t i = 2; i <= tree.n; ++i)
        schedule.edge_clock[i] = stream.exponential(1.0);
    return schedule;
}

ClusterPartition destroy_at(const RecursiveTree& tree,
                            const DestructionSchedule& schedule, double t) {
    if (!(t >= 0.0)) throw std::domain_error("destroy_at requires t >= 0");
    const std::size_t n = tree.n;
    ClusterPartition out;
    out.t = t;
    // representative = nearest ancestor reachable through surviving edges;
    // parents precede children, so one forward pass suffices
    std::vector<std::uint32_t> rep(n + 1, 0);
    rep[1] = 1;
    for (std::size_t i = 2; i <= n; ++i)
        rep[i] = schedule.edge_clock[i] > t ? rep[tree.parent[i]]
                                            : static_cast<std::uint32_t>(i);
    // representatives are cluster minima; id by increasing representative
    std::vector<std::uint32_t> reps;
    for (std::size_t i = 1; i <= n; ++i)
        if (rep[i] == i) reps.push_back(static_cast<std::uint32_t>(i));
    // reps is already sorted ascending
    std::vector<std::uint32_t> id_of(n + 1, 0);
    for (std::size_t k = 0; k < reps.size(); ++k) id_of[reps[k]] = static_cast<std::uint32_t>(k);
    out.cluster_of.assign(n + 1, 0);
    out.cluster_size.assign(reps.size(), 0);
    for (std::size_t i = 1; i <= n; ++i) {
        out.cluster_of[i] = id_of[rep[i]];
        ++out.cluster_size[out.cluster_of[i]];
    }
    return out;
}

std::vector<double> cluster_weights(const ClusterPartition& partition, std::size_t n,
                                    double t) {
    const double scale = std::pow(static_cast<double>(n), -std::exp(-t));
    std::vector<double> weights;
    weights.reserve(partition.cluster_size.size());
    for (std::uint64_t size : partition.cluster_size)
        weights.push_back(scale * static_cast<double>(size));
    std::sort(weights.begin(), weights.end(), std::greater<double>());
    return weights;
}

double kappa_rrt(double q) {
    if (!(q > 1.0)) throw std::domain_error("kappa_rrt requires q > 1");
    return q * digamma(q + 1.0) + 1.0 / (q - 1.0);
}

double rrt_moment(double q, double t) {
    if (!(t >= 0.0)) throw std::domain_error("rrt_moment requires t >= 0");
    if (!(q > std::exp(t))) throw std::domain_error("rrt_moment requires q > e^t");
    const double qt = std::exp(-t) * q;
    return (q - 1.0) / (qt - 1.0) * std::exp(log_gamma(q) - log_gamma(qt));
}

GFCharacteristics rrt_gf() {
    GFCharacteristics gf;
    gf.sigma = 0.0;
    gf.drift_c = -kEulerGamma + 2.0 * kLog2;
    gf.theta = 1.0;
    gf.nu = DislocationMeasure::rrt();
    return gf;
}

MassPartition sample_rrt_split(double level, RandomStream& stream) {
    if (!(level > 0.0)) throw std::domain_error("sample_rrt_split requires level > 0");
    const double hi = 1.0 - std::exp(-level);
    if (!(hi > 0.5))
        throw std::domain_error("sample_rrt_split requires level > log 2 "
                                "(no binary split survives the truncation)");
    // M(x) = int_{1/2}^x (s^-2 + (1-s)^-2) ds = 1/(1-x) - 1/x
    const double total = 1.0 / (1.0 - hi) - 1.0 / hi;
    const double m = stream.uniform() * total;
    double s1;
    if (m <= 0.0) {
        s1 = 0.5;
    } else {
        // solve 1/(1-x) - 1/x = m: m x^2 + (2 - m) x - 1 = 0
        s1 = ((m - 2.0) + std::sqrt(m * m + 4.0)) / (2.0 * m);
    }
    s1 = std::min(std::max(s1, 0.5), hi);
    return MassPartition::of({s1, 1.0 - s1});
}

}  // namespace ougf::rrt
