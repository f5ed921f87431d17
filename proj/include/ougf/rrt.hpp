#pragma once

#include <cstdint>
#include <vector>

#include "ougf/dislocation.hpp"
#include "ougf/random.hpp"

namespace ougf::rrt {

// Random recursive tree on {1, ..., n}: vertex i >= 2 attaches uniformly to a
// vertex in {1, ..., i-1}. Stored 1-indexed; parent[1] = 0 is unused.
struct RecursiveTree {
    std::size_t n = 0;
    std::vector<std::uint32_t> parent;
};

// Independent exponential(1) clocks on the edges e_2, ..., e_n; edge e_i is
// removed once its clock has rung.
struct DestructionSchedule {
    std::vector<double> edge_clock;  // aligned with parent: entry i for e_i
};

// Connected clusters after removing the rung edges; cluster ids are assigned
// in increasing order of the smallest vertex of the cluster.
struct ClusterPartition {
    double t = 0.0;
    std::vector<std::uint32_t> cluster_of;  // 1-indexed
    std::vector<std::uint64_t> cluster_size;
};

RecursiveTree build_tree(std::size_t n, RandomStream stream);

DestructionSchedule draw_schedule(const RecursiveTree& tree, RandomStream stream);

// Single rooted pass: a vertex joins its parent's cluster iff the connecting
// edge survives, so each cluster representative is the smallest vertex.
ClusterPartition destroy_at(const RecursiveTree& tree,
                            const DestructionSchedule& schedule, double t);

// Finite-n estimator of the limit weights: {n^{-e^{-t}} |cluster|}, decreasing.
std::vector<double> cluster_weights(const ClusterPartition& partition, std::size_t n,
                                    double t);

// kappa_R(q) = q psi(q+1) + 1/(q-1) for q > 1.
double kappa_rrt(double q);

// (q-1)/(e^{-t} q - 1) * Gamma(q)/Gamma(e^{-t} q) for q > e^t.
double rrt_moment(double q, double t);

// Dislocation measure of the limit process: density s^{-2} + (1-s)^{-2} on
// [1/2, 1) with drift -gamma + 2 log 2 and unit inward index.
GFCharacteristics rrt_gf();

// Draw s1 from the normalized restriction of the density to
// [1/2, 1 - e^{-level}] by closed-form inverse CDF; requires level > log 2.
MassPartition sample_rrt_split(double level, RandomStream& stream);

}  // namespace ougf::rrt
