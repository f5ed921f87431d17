#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "ougf/dislocation.hpp"
#include "ougf/gf_sim.hpp"
#include "ougf/harness.hpp"
#include "ougf/levy.hpp"
#include "ougf/quadrature.hpp"
#include "ougf/random.hpp"
#include "ougf/rrt.hpp"
#include "ougf/special.hpp"

namespace py = pybind11;
using namespace ougf;

namespace {

GFCharacteristics make_atom_gf(double sigma, double c, double theta,
                               const std::vector<std::pair<double, std::vector<double>>>& atoms) {
    std::vector<WeightedPartition> list;
    for (const auto& [rate, parts] : atoms)
        list.push_back({rate, MassPartition::of(parts)});
    return GFCharacteristics{sigma, c, DislocationMeasure::atoms(std::move(list)), theta};
}

LevyCharacteristics make_atom_levy(double sigma, double c, double kill,
                                   const std::vector<std::pair<double, double>>& jumps) {
    std::vector<JumpAtom> atoms;
    for (const auto& [y, rate] : jumps) atoms.push_back({y, rate});
    LevyCharacteristics levy;
    levy.sigma = sigma;
    levy.drift_c = c;
    levy.kill_rate = kill;
    levy.jumps = JumpSpec::atoms(std::move(atoms));
    return levy;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "OU type growth-fragmentation simulation toolkit (C++ core)";

    m.def("digamma", &digamma, py::arg("x"));
    m.def("log_gamma", &log_gamma, py::arg("x"));
    m.def(
        "integrate",
        [](const std::function<double(double)>& f, double a, double b, double abs_tol,
           double rel_tol, int max_subdivisions) {
            return adaptive_integrate(f, a, b,
                                      QuadratureSettings{abs_tol, rel_tol, max_subdivisions});
        },
        py::arg("f"), py::arg("a"), py::arg("b"), py::arg("abs_tol") = 1e-10,
        py::arg("rel_tol") = 1e-10, py::arg("max_subdivisions") = 4000);

    py::class_<GFCharacteristics>(m, "GFCharacteristics");
    py::class_<LevyCharacteristics>(m, "LevyCharacteristics");

    m.def("atom_gf", &make_atom_gf, py::arg("sigma"), py::arg("c"), py::arg("theta"),
          py::arg("atoms"), "Growth-fragmentation model from a weighted atom list");
    m.def(
        "rrt_gf", []() { return ougf::rrt::rrt_gf(); },
        "The recursive-tree growth-fragmentation model");
    m.def("atom_levy", &make_atom_levy, py::arg("sigma"), py::arg("c"),
          py::arg("kill"), py::arg("jumps"),
          "Spectrally negative Levy characteristics with jump atoms (y, rate)");

    m.def(
        "cumulant",
        [](const GFCharacteristics& gf, double q) { return cumulant(gf, q); },
        py::arg("gf"), py::arg("q"));
    m.def(
        "phi_star",
        [](const GFCharacteristics& gf, double q) { return phi_star(gf, q); },
        py::arg("gf"), py::arg("q"));
    m.def(
        "in_dom", [](const GFCharacteristics& gf, double q) { return in_dom(gf, q); },
        py::arg("gf"), py::arg("q"));
    m.def(
        "stationary_gf_moment",
        [](const GFCharacteristics& gf, double q) { return stationary_gf_moment(gf, q); },
        py::arg("gf"), py::arg("q"));
    m.def(
        "cumulant_from_levy",
        [](const LevyCharacteristics& levy, double q) {
            return cumulant_from_levy(levy, q);
        },
        py::arg("levy"), py::arg("q"));
    m.def(
        "laplace_exponent",
        [](const LevyCharacteristics& levy, double q) {
            return laplace_exponent(levy, q);
        },
        py::arg("levy"), py::arg("q"));
    m.def(
        "ou_laplace_transform",
        [](const LevyCharacteristics& levy, double theta, double z0, double q, double t) {
            return ou_laplace_transform(OUParams{levy, theta}, z0, q, t);
        },
        py::arg("levy"), py::arg("theta"), py::arg("z0"), py::arg("q"), py::arg("t"));
    m.def(
        "stationary_laplace",
        [](const LevyCharacteristics& levy, double theta, double q) {
            return stationary_laplace(OUParams{levy, theta}, q);
        },
        py::arg("levy"), py::arg("theta"), py::arg("q"));

    m.def(
        "simulate_sizes",
        [](const GFCharacteristics& gf, double level, const std::vector<double>& times,
           std::uint64_t seed) {
            const SimRun run = simulate(gf, level, times, seed);
            std::vector<std::vector<double>> out;
            for (std::size_t j = 0; j < times.size(); ++j)
                out.push_back(run.snapshot(j).sizes);
            return out;
        },
        py::arg("gf"), py::arg("level"), py::arg("times"), py::arg("seed"),
        "Decreasing fragment sizes at each requested time");
    m.def(
        "estimate_moment",
        [](const GFCharacteristics& gf, double level, double q, double t,
           std::size_t reps, std::uint64_t seed) {
            const MomentEstimate est = estimate_moment(gf, level, q, t, reps, seed);
            return py::make_tuple(est.estimate, est.std_error, est.target);
        },
        py::arg("gf"), py::arg("level"), py::arg("q"), py::arg("t"), py::arg("reps"),
        py::arg("seed"));

    m.def("kappa_rrt", &ougf::rrt::kappa_rrt, py::arg("q"));
    m.def("rrt_moment", &ougf::rrt::rrt_moment, py::arg("q"), py::arg("t"));
    m.def(
        "rrt_weights",
        [](std::size_t n, double t, std::uint64_t seed) {
            RandomStream stream = derive_stream(seed, "rrt");
            const auto tree = ougf::rrt::build_tree(n, stream.child(1));
            const auto schedule = ougf::rrt::draw_schedule(tree, stream.child(2));
            const auto part = ougf::rrt::destroy_at(tree, schedule, t);
            return ougf::rrt::cluster_weights(part, n, t);
        },
        py::arg("n"), py::arg("t"), py::arg("seed"),
        "Decreasing cluster weights of one destroyed recursive tree");

    m.def(
        "run_experiment_json",
        [](const std::string& config_json) {
            const auto cfg = ougf::harness::parse_config_json(config_json);
            const auto report = ougf::harness::run_experiment(cfg);
            return ougf::harness::report_to_json(report);
        },
        py::arg("config_json"),
        "Run an experiment from a JSON config string; returns the JSON report");
}
