#include "ougf/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <mutex>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <json.hpp>

#include "ougf/rrt.hpp"
#include "ougf/special.hpp"

namespace ougf::harness {

using nlohmann::json;

namespace {

constexpr double kEulerGamma = 0.5772156649015328606;

ExperimentKind kind_from_name(const std::string& name) {
    static const std::map<std::string, ExperimentKind> table = {
        {"moment", ExperimentKind::Moment},
        {"martingale", ExperimentKind::Martingale},
        {"many_to_one", ExperimentKind::ManyToOne},
        {"lln", ExperimentKind::Lln},
        {"generator_residual", ExperimentKind::GeneratorResidual},
        {"truncation", ExperimentKind::Truncation},
        {"rrt", ExperimentKind::Rrt},
        {"cell_vs_atom", ExperimentKind::CellVsAtom},
        {"ou_laplace", ExperimentKind::OuLaplace},
        {"f_weight", ExperimentKind::FWeight},
    };
    auto it = table.find(name);
    if (it == table.end())
        throw std::invalid_argument("unknown experiment kind: " + name);
    return it->second;
}

DislocationMeasure parse_nu(const json& spec) {
    const std::string family = spec.at("family").get<std::string>();
    DislocationMeasure nu;
    if (family == "atom_list") {
        std::vector<WeightedPartition> atoms;
        for (const auto& a : spec.at("atoms")) {
            const double rate = a.at("rate").get<double>();
            std::vector<double> parts = a.at("parts").get<std::vector<double>>();
            atoms.push_back({rate, MassPartition::of(std::move(parts))});
        }
        nu = DislocationMeasure::atoms(std::move(atoms));
    } else if (family == "binary_density") {
        nu = DislocationMeasure::binary_density(spec.at("coef").get<double>(),
                                                spec.at("alpha").get<double>());
    } else if (family == "rrt") {
        nu = DislocationMeasure::rrt();
    } else {
        throw std::invalid_argument("unknown dislocation family: " + family);
    }
    if (spec.contains("level")) nu = nu.truncated(spec.at("level").get<double>());
    return nu;
}

json nu_to_json(const DislocationMeasure& nu) {
    json spec;
    spec["family"] = nu.family();
    if (nu.is_atoms()) {
        json atoms = json::array();
        for (const auto& a : nu.atom_list()) {
            json atom;
            atom["rate"] = a.rate;
            atom["parts"] = a.s.parts();
            atoms.push_back(atom);
        }
        spec["atoms"] = atoms;
    } else if (nu.family() == "binary_density") {
        spec["coef"] = nu.coef();
        spec["alpha"] = nu.alpha();
    } else if (nu.family() != "rrt") {
        throw std::invalid_argument("dislocation family is not serializable: " +
                                    nu.family());
    }
    if (nu.level() < kInf) spec["level"] = nu.level();
    return spec;
}

JumpSpec parse_jumps(const json& spec) {
    const std::string form = spec.at("form").get<std::string>();
    if (form == "none") return JumpSpec();
    if (form == "atoms") {
        std::vector<JumpAtom> atoms;
        for (const auto& a : spec.at("atoms"))
            atoms.push_back({a.at("y").get<double>(), a.at("rate").get<double>()});
        return JumpSpec::atoms(std::move(atoms));
    }
    if (form == "density") {
        const std::string family = spec.at("family").get<std::string>();
        const double eps = spec.value("eps", 1e-4);
        if (family == "rrt") {
            // e^y (1 - e^y)^{-2} on (-inf, 0)
            return JumpSpec::density(
                [](double y) {
                    const double w = std::exp(y);
                    const double u = -std::expm1(y);
                    return w / (u * u);
                },
                eps, 2.0, 0.0, 1.0);
        }
        throw std::invalid_argument("unknown jump density family: " + family);
    }
    throw std::invalid_argument("unknown jump form: " + form);
}

LevyCharacteristics parse_levy(const json& spec) {
    LevyCharacteristics levy;
    levy.sigma = spec.value("sigma", 0.0);
    levy.drift_c = spec.value("c", 0.0);
    levy.kill_rate = spec.value("kill", 0.0);
    if (spec.contains("jumps")) levy.jumps = parse_jumps(spec.at("jumps"));
    levy.validate();
    return levy;
}

// All replication values are computed into per-rep slots and reduced in rep
// order, so the report does not depend on the number of worker threads.
std::vector<std::vector<double>> parallel_reps(
    std::size_t reps, int threads,
    const std::function<std::vector<double>(std::size_t)>& fn) {
    std::vector<std::vector<double>> values(reps);
    unsigned int workers = threads > 0
                               ? static_cast<unsigned int>(threads)
                               : std::max(1u, std::thread::hardware_concurrency());
    workers = std::min<unsigned int>(workers, std::max<std::size_t>(reps, 1));
    if (workers <= 1 || reps < 2) {
        for (std::size_t r = 0; r < reps; ++r) values[r] = fn(r);
        return values;
    }
    std::vector<std::thread> pool;
    std::exception_ptr error;
    std::mutex error_mutex;
    for (unsigned int w = 0; w < workers; ++w) {
        pool.emplace_back([&, w]() {
            try {
                for (std::size_t r = w; r < reps; r += workers) values[r] = fn(r);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!error) error = std::current_exception();
            }
        });
    }
    for (auto& th : pool) th.join();
    if (error) std::rethrow_exception(error);
    return values;
}

struct CellStats {
    Welford acc;
    std::uint64_t aborted = 0;
};

GFCharacteristics truncated_gf(const GFCharacteristics& gf, double level) {
    GFCharacteristics out = gf;
    out.nu = gf.nu.truncated(level);
    return out;
}

double moment_target(const GFCharacteristics& trunc, double q, double t,
                     const QuadratureSettings& settings) {
    if (t == 0.0) return 1.0;
    return std::exp(adaptive_integrate(
        [&](double s) { return cumulant(trunc, q * std::exp(-trunc.theta * s), settings); },
        0.0, t, settings));
}

std::function<double(double)> make_test_function(const TestFunctionSpec& f) {
    if (f.kind == TestFunctionSpec::Kind::One) return [](double) { return 1.0; };
    const double p = f.power;
    return [p](double x) { return std::pow(x, p); };
}

std::string test_function_name(const TestFunctionSpec& f) {
    if (f.kind == TestFunctionSpec::Kind::One) return "one";
    std::ostringstream os;
    os << "x^" << f.power;
    return os.str();
}

// f(x) = exp(-(log x)^2), the compactly-decaying test function of the
// generator residual experiment, with analytic derivatives.
C2Function gaussian_log_function() {
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
    return fn;
}

void require(bool ok, const std::string& message) {
    if (!ok) throw std::invalid_argument(message);
}

}  // namespace

bool ExperimentReport::all_pass() const {
    for (const auto& row : rows)
        if (!row.pass) return false;
    return true;
}

CompareResult compare_stats(double estimate, double std_error, double target,
                            double threshold) {
    if (std_error < 0.0) throw std::domain_error("std_error must be >= 0");
    CompareResult out;
    if (std_error == 0.0) {
        const bool equal = std::abs(estimate - target) <= 1e-12;
        out.zscore = equal ? 0.0 : (estimate > target ? kInf : -kInf);
        out.pass = equal;
        return out;
    }
    out.zscore = (estimate - target) / std_error;
    out.pass = std::abs(out.zscore) < threshold;
    return out;
}

ExperimentConfig parse_config_json(const std::string& json_text) {
    json doc = json::parse(json_text);
    ExperimentConfig cfg;
    cfg.kind_name = doc.at("experiment").get<std::string>();
    cfg.kind = kind_from_name(cfg.kind_name);
    cfg.seed = doc.value("seed", 1ull);
    cfg.reps = doc.value("reps", 1000ull);
    cfg.level = doc.value("level", kInf);
    cfg.threads = doc.value("threads", 0);
    cfg.z_threshold = doc.value("z_threshold", 3.0);
    cfg.margin = doc.value("margin", 0.05);
    cfg.gamma = doc.value("gamma", 2.0);
    cfg.gen_h = doc.value("h", 0.1);
    cfg.eta = doc.value("eta", 0.5);
    cfg.fw_s = doc.value("s", 0.0);
    cfg.fw_x = doc.value("x", 1.0);
    cfg.z0 = doc.value("z0", 0.0);
    cfg.dump_prefix = doc.value("dump_snapshots", std::string());
    if (doc.contains("times")) cfg.times = doc.at("times").get<std::vector<double>>();
    if (doc.contains("q")) {
        if (doc.at("q").is_array())
            cfg.qs = doc.at("q").get<std::vector<double>>();
        else
            cfg.qs = {doc.at("q").get<double>()};
    }
    if (doc.contains("cut_levels"))
        cfg.cut_levels = doc.at("cut_levels").get<std::vector<double>>();
    if (doc.contains("n")) {
        if (doc.at("n").is_array())
            cfg.rrt_n = doc.at("n").get<std::vector<std::size_t>>();
        else
            cfg.rrt_n = {doc.at("n").get<std::size_t>()};
    }
    if (doc.contains("f")) {
        const auto& f = doc.at("f");
        const std::string kind = f.value("kind", "power");
        if (kind == "one") {
            cfg.f.kind = TestFunctionSpec::Kind::One;
        } else if (kind == "power") {
            cfg.f.kind = TestFunctionSpec::Kind::Power;
            cfg.f.power = f.value("power", 2.0);
        } else {
            throw std::invalid_argument("unknown test function kind: " + kind);
        }
    }
    if (doc.contains("quadrature")) {
        const auto& qd = doc.at("quadrature");
        cfg.quadrature.abs_tol = qd.value("abs_tol", 1e-10);
        cfg.quadrature.rel_tol = qd.value("rel_tol", 1e-10);
        cfg.quadrature.max_subdivisions = qd.value("max_subdivisions", 4000);
        require(cfg.quadrature.abs_tol > 0.0 && cfg.quadrature.rel_tol > 0.0,
                "quadrature tolerances must be strictly positive");
        require(cfg.quadrature.max_subdivisions >= 1,
                "quadrature max_subdivisions must be >= 1");
    }
    if (doc.contains("caps")) {
        const auto& caps = doc.at("caps");
        cfg.caps.max_particles = caps.value("max_particles", cfg.caps.max_particles);
        cfg.caps.max_events = caps.value("max_events", cfg.caps.max_events);
        cfg.caps.max_l2_mass = caps.value("max_l2_mass", cfg.caps.max_l2_mass);
        cfg.caps.density_epsilon =
            caps.value("density_epsilon", cfg.caps.density_epsilon);
    }
    if (doc.contains("model")) {
        const auto& model = doc.at("model");
        cfg.theta = model.value("theta", 0.0);
        if (model.contains("nu")) {
            cfg.has_gf = true;
            cfg.gf.sigma = model.value("sigma", 0.0);
            cfg.gf.drift_c = model.value("c", 0.0);
            cfg.gf.theta = cfg.theta;
            cfg.gf.nu = parse_nu(model.at("nu"));
        }
        if (model.contains("levy")) {
            cfg.has_levy = true;
            cfg.levy = parse_levy(model.at("levy"));
        }
    }
    cfg.canonical_json = doc.dump();
    return cfg;
}

ExperimentConfig parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file: " + path);
    std::stringstream buffer;
    buffer << in.rdbuf();
    return parse_config_json(buffer.str());
}

std::string dislocation_to_json(const DislocationMeasure& nu) {
    return nu_to_json(nu).dump();
}

DislocationMeasure dislocation_from_json(const std::string& json_text) {
    return parse_nu(json::parse(json_text));
}

namespace {

void validate_moment_range(const GFCharacteristics& trunc, double q, double t) {
    const double alpha = q / std::max(1.0, std::exp(trunc.theta * t));
    if (!in_dom(trunc, alpha)) {
        std::ostringstream os;
        os << "moment range violated at q=" << q << ", t=" << t
           << ": alpha=" << alpha << " outside dom(kappa)";
        throw std::invalid_argument(os.str());
    }
}

// ----- experiment bodies ------------------------------------------------

void run_moment(const ExperimentConfig& cfg, ExperimentReport& report) {
    require(cfg.has_gf, "moment experiment requires a growth-fragmentation model");
    require(!cfg.times.empty() && !cfg.qs.empty(), "moment requires times and q");
    const GFCharacteristics trunc = truncated_gf(cfg.gf, cfg.level);
    for (double t : cfg.times)
        for (double q : cfg.qs) validate_moment_range(trunc, q, t);

    RandomStream master = derive_stream(cfg.seed);
    const std::size_t cells = cfg.times.size() * cfg.qs.size();
    auto values = parallel_reps(cfg.reps, cfg.threads, [&](std::size_t r) {
        SimRun run = simulate_stream(cfg.gf, cfg.level, cfg.times, master.child(r),
                                     cfg.caps);
        std::vector<double> vals;
        if (run.aborted()) return vals;  // empty marks an aborted run
        vals.reserve(cells);
        for (std::size_t j = 0; j < cfg.times.size(); ++j) {
            const Snapshot snap = run.snapshot(j);
            for (double q : cfg.qs) vals.push_back(lq_statistic(snap, q));
        }
        return vals;
    });

    std::uint64_t aborted = 0;
    std::vector<Welford> acc(cells);
    for (const auto& vals : values) {
        if (vals.empty()) {
            ++aborted;
            continue;
        }
        for (std::size_t c = 0; c < cells; ++c) acc[c].add(vals[c]);
    }
    std::size_t c = 0;
    for (std::size_t j = 0; j < cfg.times.size(); ++j) {
        for (double q : cfg.qs) {
            const double target = moment_target(trunc, q, cfg.times[j], cfg.quadrature);
            ReportRow row;
            row.statistic = "lq_moment";
            row.t = cfg.times[j];
            row.q = q;
            row.estimate = acc[c].mean;
            row.std_error = acc[c].std_error();
            row.target = target;
            const CompareResult cmp =
                compare_stats(row.estimate, row.std_error, target, cfg.z_threshold);
            row.zscore = cmp.zscore;
            row.pass = cmp.pass;
            row.reps = acc[c].n;
            row.aborted = aborted;
            report.rows.push_back(row);
            ++c;
        }
    }

    if (!cfg.dump_prefix.empty()) {
        std::vector<SimRun> dump_runs;
        const std::size_t keep = std::min<std::size_t>(cfg.reps, 16);
        for (std::size_t r = 0; r < keep; ++r)
            dump_runs.push_back(
                simulate_stream(cfg.gf, cfg.level, cfg.times, master.child(r), cfg.caps));
        write_snapshot_csv(dump_runs, cfg.dump_prefix + "_sizes.csv",
                           cfg.dump_prefix + "_counts.csv");
    }
}

void run_martingale(const ExperimentConfig& cfg, ExperimentReport& report) {
    require(cfg.has_gf, "martingale experiment requires a growth-fragmentation model");
    require(!cfg.times.empty(), "martingale requires times");
    const GFCharacteristics trunc = truncated_gf(cfg.gf, cfg.level);
    const double theta = cfg.gf.theta;
    const double kappa0 = cumulant(trunc, 0.0, cfg.quadrature);
    require(std::isfinite(kappa0), "count martingale requires kappa(0) < infinity");
    for (double q : cfg.qs) {
        require(in_dom(trunc, q), "q outside dom(kappa) for the additive martingale");
    }

    // normalizers and exponents per (q, t)
    struct Cell {
        double normalizer;
        double exponent;
    };
    std::vector<Cell> cells;
    for (double q : cfg.qs) {
        for (double t : cfg.times) {
            Cell cell;
            if (theta > 0.0) {
                cell.normalizer = t == 0.0 ? 0.0
                                           : adaptive_integrate(
                                                 [&](double s) {
                                                     return cumulant(
                                                         trunc,
                                                         q * std::exp(theta * s),
                                                         cfg.quadrature);
                                                 },
                                                 0.0, t, cfg.quadrature);
                cell.exponent = q * std::exp(theta * t);
            } else {
                cell.normalizer = t == 0.0 ? 0.0
                                           : adaptive_integrate(
                                                 [&](double s) {
                                                     return cumulant(
                                                         trunc,
                                                         q * std::exp(-theta * s),
                                                         cfg.quadrature);
                                                 },
                                                 0.0, t, cfg.quadrature);
                cell.exponent = q;
            }
            cells.push_back(cell);
        }
    }

    RandomStream master = derive_stream(cfg.seed);
    const std::size_t n_cells = cells.size() + cfg.times.size();  // + count rows
    auto values = parallel_reps(cfg.reps, cfg.threads, [&](std::size_t r) {
        SimRun run = simulate_stream(cfg.gf, cfg.level, cfg.times, master.child(r),
                                     cfg.caps);
        std::vector<double> vals;
        if (run.aborted()) return vals;
        vals.reserve(n_cells);
        std::vector<Snapshot> snaps = run.snapshots();
        std::size_t c = 0;
        for (std::size_t qi = 0; qi < cfg.qs.size(); ++qi) {
            for (std::size_t j = 0; j < cfg.times.size(); ++j) {
                vals.push_back(std::exp(-cells[c].normalizer) *
                               lq_statistic(snaps[j], cells[c].exponent));
                ++c;
            }
        }
        for (std::size_t j = 0; j < cfg.times.size(); ++j)
            vals.push_back(std::exp(-kappa0 * cfg.times[j]) *
                           static_cast<double>(snaps[j].count));
        return vals;
    });

    std::uint64_t aborted = 0;
    std::vector<Welford> acc(n_cells);
    for (const auto& vals : values) {
        if (vals.empty()) {
            ++aborted;
            continue;
        }
        for (std::size_t c = 0; c < n_cells; ++c) acc[c].add(vals[c]);
    }
    std::size_t c = 0;
    for (double q : cfg.qs) {
        for (double t : cfg.times) {
            ReportRow row;
            row.statistic = "additive_martingale";
            row.t = t;
            row.q = q;
            row.estimate = acc[c].mean;
            row.std_error = acc[c].std_error();
            row.target = 1.0;
            const CompareResult cmp =
                compare_stats(row.estimate, row.std_error, 1.0, cfg.z_threshold);
            row.zscore = cmp.zscore;
            row.pass = cmp.pass;
            row.reps = acc[c].n;
            row.aborted = aborted;
            report.rows.push_back(row);
            ++c;
        }
    }
    for (double t : cfg.times) {
        ReportRow row;
        row.statistic = "count_martingale";
        row.t = t;
        row.q = 0.0;
        row.estimate = acc[c].mean;
        row.std_error = acc[c].std_error();
        row.target = 1.0;
        const CompareResult cmp =
            compare_stats(row.estimate, row.std_error, 1.0, cfg.z_threshold);
        row.zscore = cmp.zscore;
        row.pass = cmp.pass;
        row.reps = acc[c].n;
        row.aborted = aborted;
        report.rows.push_back(row);
        ++c;
    }
}

void run_many_to_one(const ExperimentConfig& cfg, ExperimentReport& report) {
    require(cfg.has_gf, "many_to_one requires a growth-fragmentation model");
    require(!cfg.times.empty(), "many_to_one requires times");
    const auto f = make_test_function(cfg.f);
    for (double t : cfg.times) {
        const ManyToOneResult res =
            many_to_one_compare(cfg.gf, cfg.level, f, t, cfg.reps,
                                RandomStream::absorb(cfg.seed, fnv1a("m2o")),
                                cfg.caps, cfg.quadrature);
        ReportRow row;
        row.statistic = "many_to_one_" + test_function_name(cfg.f);
        row.t = t;
        row.q = cfg.f.kind == TestFunctionSpec::Kind::Power ? cfg.f.power : 0.0;
        row.estimate = res.lhs;
        row.std_error = std::sqrt(res.lhs_se * res.lhs_se + res.rhs_se * res.rhs_se);
        row.target = res.rhs;
        row.zscore = res.zscore;
        row.pass = std::abs(res.zscore) < cfg.z_threshold;
        row.reps = cfg.reps;
        report.rows.push_back(row);
    }
}

void run_lln(const ExperimentConfig& cfg, ExperimentReport& report) {
    require(cfg.has_gf, "lln requires a growth-fragmentation model");
    require(!cfg.times.empty() && !cfg.qs.empty(), "lln requires times and q");
    const GFCharacteristics trunc = truncated_gf(cfg.gf, cfg.level);
    const LLNConditions cond = check_lln_conditions(trunc, cfg.gamma, cfg.quadrature);
    if (!cond.kappa0_finite)
        throw std::invalid_argument("lln requires kappa(0) < infinity");
    if (!cond.supercritical)
        throw std::invalid_argument("kappa(0) <= 0 violates supercriticality");
    if (!cond.gamma_moment_finite)
        throw std::invalid_argument("branching gamma-moment condition fails");
    if (!cond.loglog_finite)
        throw std::invalid_argument("log-log moment condition fails");
    require(cfg.gf.theta > 0.0, "lln requires theta > 0 (inward)");

    RandomStream master = derive_stream(cfg.seed);
    const std::size_t cells = cfg.times.size() * cfg.qs.size();
    // per cell: per-run average (-1 marks extinction), plus sum f and count
    auto values = parallel_reps(cfg.reps, cfg.threads, [&](std::size_t r) {
        SimRun run = simulate_stream(cfg.gf, cfg.level, cfg.times, master.child(r),
                                     cfg.caps);
        std::vector<double> vals;
        if (run.aborted()) return vals;
        vals.reserve(3 * cells);
        for (std::size_t j = 0; j < cfg.times.size(); ++j) {
            const Snapshot snap = run.snapshot(j);
            for (double q : cfg.qs) {
                const double sum = lq_statistic(snap, q);
                if (snap.count == 0) {
                    vals.push_back(-1.0);  // extinct marker, excluded from averages
                } else {
                    vals.push_back(sum / static_cast<double>(snap.count));
                }
                vals.push_back(sum);
                vals.push_back(static_cast<double>(snap.count));
            }
        }
        return vals;
    });

    std::uint64_t aborted = 0;
    std::vector<Welford> acc(cells), sum_f(cells), sum_n(cells);
    std::vector<std::vector<std::pair<double, double>>> fn_pairs(cells);
    for (const auto& vals : values) {
        if (vals.empty()) {
            ++aborted;
            continue;
        }
        for (std::size_t c = 0; c < cells; ++c) {
            if (vals[3 * c] >= 0.0) acc[c].add(vals[3 * c]);
            if (vals[3 * c + 2] > 0.0) {
                sum_f[c].add(vals[3 * c + 1]);
                sum_n[c].add(vals[3 * c + 2]);
                fn_pairs[c].push_back({vals[3 * c + 1], vals[3 * c + 2]});
            }
        }
    }
    std::size_t c = 0;
    for (double t : cfg.times) {
        for (double q : cfg.qs) {
            const double target = stationary_gf_moment(trunc, q, cfg.quadrature);
            // per-run averages: documents the slowly-decaying finite-t bias
            ReportRow row;
            row.statistic = "lln_average";
            row.t = t;
            row.q = q;
            row.estimate = acc[c].mean;
            row.std_error = acc[c].std_error();
            row.target = target;
            row.zscore = row.std_error > 0.0
                             ? (row.estimate - target) / row.std_error
                             : 0.0;
            row.pass = std::abs(row.estimate - target) <=
                       cfg.z_threshold * row.std_error +
                           cfg.margin * std::abs(target);
            row.reps = acc[c].n;
            row.aborted = aborted;
            report.rows.push_back(row);

            // pooled (all fragments of the non-extinct runs): ratio of means
            // with a delta-method standard error
            const double ratio = sum_f[c].mean / sum_n[c].mean;
            double cov = 0.0;
            for (const auto& [f, n] : fn_pairs[c])
                cov += (f - sum_f[c].mean) * (n - sum_n[c].mean);
            cov /= std::max<double>(1.0, static_cast<double>(fn_pairs[c].size() - 1));
            const double var = (sum_f[c].variance() - 2.0 * ratio * cov +
                                ratio * ratio * sum_n[c].variance()) /
                               (sum_n[c].mean * sum_n[c].mean *
                                static_cast<double>(fn_pairs[c].size()));
            ReportRow pooled;
            pooled.statistic = "lln_pooled_average";
            pooled.t = t;
            pooled.q = q;
            pooled.estimate = ratio;
            pooled.std_error = std::sqrt(std::max(var, 0.0));
            pooled.target = target;
            pooled.zscore = pooled.std_error > 0.0
                                ? (ratio - target) / pooled.std_error
                                : 0.0;
            pooled.pass = std::abs(ratio - target) <=
                          cfg.z_threshold * pooled.std_error +
                              cfg.margin * std::abs(target);
            pooled.reps = fn_pairs[c].size();
            pooled.aborted = aborted;
            report.rows.push_back(pooled);
            ++c;
        }
    }
}

void run_generator_residual(const ExperimentConfig& cfg, ExperimentReport& report) {
    require(cfg.has_gf, "generator_residual requires a growth-fragmentation model");
    require(!cfg.times.empty(), "generator_residual requires a base time");
    const double t = cfg.times.front();
    const double h = cfg.gen_h;
    require(h > 0.0, "generator_residual requires h > 0");
    const C2Function fn = gaussian_log_function();
    const std::vector<double> sim_times{t, t + 0.5 * h, t + h};

    RandomStream master = derive_stream(cfg.seed);
    auto values = parallel_reps(cfg.reps, cfg.threads, [&](std::size_t r) {
        SimRun run = simulate_stream(cfg.gf, cfg.level, sim_times, master.child(r),
                                     cfg.caps);
        std::vector<double> vals;
        if (run.aborted()) return vals;
        const Snapshot s0 = run.snapshot(0);
        const Snapshot s1 = run.snapshot(1);
        const Snapshot s2 = run.snapshot(2);
        auto sum_f = [&fn](const Snapshot& snap) {
            double sum = 0.0;
            for (double x : snap.sizes) sum += fn.f(x);
            return sum;
        };
        double gen = 0.0;
        for (double x : s0.sizes)
            gen += generator_apply(cfg.gf, fn, x, cfg.quadrature);
        const double f0 = sum_f(s0);
        const double d_h = (sum_f(s2) - f0) / h;
        const double d_h2 = (sum_f(s1) - f0) / (0.5 * h);
        vals = {d_h - gen, d_h2 - gen, (d_h2 - gen) - 0.5 * (d_h - gen)};
        return vals;
    });

    std::uint64_t aborted = 0;
    Welford res_h, res_h2, halving;
    for (const auto& vals : values) {
        if (vals.empty()) {
            ++aborted;
            continue;
        }
        res_h.add(vals[0]);
        res_h2.add(vals[1]);
        halving.add(vals[2]);
    }
    auto push = [&](const std::string& name, double step, const Welford& acc,
                    bool gate) {
        ReportRow row;
        row.statistic = name;
        row.t = t;
        row.q = step;
        row.estimate = acc.mean;
        row.std_error = acc.std_error();
        row.target = 0.0;
        const CompareResult cmp =
            compare_stats(acc.mean, acc.std_error(), 0.0, cfg.z_threshold);
        row.zscore = cmp.zscore;
        row.pass = gate ? cmp.pass : true;
        row.reps = acc.n;
        row.aborted = aborted;
        report.rows.push_back(row);
    };
    // informational residuals at h and h/2; the gate is the halving combination
    // (residual(h/2) - residual(h)/2), whose O(h) bias cancels
    push("fd_residual", h, res_h, false);
    push("fd_residual", 0.5 * h, res_h2, false);
    push("residual_halving", 0.5 * h, halving, true);
}

void run_truncation(const ExperimentConfig& cfg, ExperimentReport& report) {
    require(cfg.has_gf, "truncation requires a growth-fragmentation model");
    require(!cfg.times.empty() && !cfg.qs.empty(), "truncation requires times and q");
    require(!cfg.cut_levels.empty(), "truncation requires cut_levels");
    std::vector<double> cuts = cfg.cut_levels;
    std::sort(cuts.begin(), cuts.end());

    RandomStream master = derive_stream(cfg.seed);
    RandomStream fine_master = master.child(1);

    const std::size_t n_cells = cfg.times.size() * cfg.qs.size();
    // per rep: lq of the fine run, lq of each cut, and a monotonicity flag
    auto values = parallel_reps(cfg.reps, cfg.threads, [&](std::size_t r) {
        SimRun run = simulate_stream(cfg.gf, cfg.level, cfg.times,
                                     fine_master.child(r), cfg.caps);
        std::vector<double> vals;
        if (run.aborted()) return vals;
        vals.reserve(n_cells * (cuts.size() + 2));
        std::vector<std::vector<double>> per_cut(cuts.size());
        for (std::size_t k = 0; k < cuts.size(); ++k) {
            SimRun cut = apply_cut(run, cuts[k]);
            for (std::size_t j = 0; j < cfg.times.size(); ++j) {
                const Snapshot snap = cut.snapshot(j);
                for (double q : cfg.qs) per_cut[k].push_back(lq_statistic(snap, q));
            }
        }
        std::vector<double> full;
        for (std::size_t j = 0; j < cfg.times.size(); ++j) {
            const Snapshot snap = run.snapshot(j);
            for (double q : cfg.qs) full.push_back(lq_statistic(snap, q));
        }
        for (std::size_t k = 0; k < cuts.size(); ++k)
            vals.insert(vals.end(), per_cut[k].begin(), per_cut[k].end());
        vals.insert(vals.end(), full.begin(), full.end());
        // monotone in the cut level, including the full run as the top level
        double monotone = 1.0;
        for (std::size_t c = 0; c < n_cells; ++c) {
            double prev = -1.0;
            for (std::size_t k = 0; k < cuts.size(); ++k) {
                if (per_cut[k][c] < prev - 1e-12) monotone = 0.0;
                prev = per_cut[k][c];
            }
            if (full[c] < prev - 1e-12) monotone = 0.0;
        }
        vals.push_back(monotone);
        return vals;
    });

    // direct runs at each cut level, disjoint streams
    std::vector<std::vector<Welford>> direct(cuts.size(),
                                             std::vector<Welford>(n_cells));
    std::vector<std::uint64_t> direct_aborted(cuts.size(), 0);
    for (std::size_t k = 0; k < cuts.size(); ++k) {
        RandomStream cut_master = master.child(2 + k);
        auto direct_values =
            parallel_reps(cfg.reps, cfg.threads, [&](std::size_t r) {
                SimRun run = simulate_stream(cfg.gf, cuts[k], cfg.times,
                                             cut_master.child(r), cfg.caps);
                std::vector<double> vals;
                if (run.aborted()) return vals;
                for (std::size_t j = 0; j < cfg.times.size(); ++j) {
                    const Snapshot snap = run.snapshot(j);
                    for (double q : cfg.qs) vals.push_back(lq_statistic(snap, q));
                }
                return vals;
            });
        for (const auto& vals : direct_values) {
            if (vals.empty()) {
                ++direct_aborted[k];
                continue;
            }
            for (std::size_t c = 0; c < n_cells; ++c) direct[k][c].add(vals[c]);
        }
    }

    std::uint64_t aborted = 0;
    std::vector<std::vector<Welford>> cut_acc(cuts.size(),
                                              std::vector<Welford>(n_cells));
    std::vector<std::vector<Welford>> diff_acc(cuts.size(),
                                               std::vector<Welford>(n_cells));
    Welford monotone_acc;
    for (const auto& vals : values) {
        if (vals.empty()) {
            ++aborted;
            continue;
        }
        for (std::size_t k = 0; k < cuts.size(); ++k)
            for (std::size_t c = 0; c < n_cells; ++c) {
                cut_acc[k][c].add(vals[k * n_cells + c]);
                diff_acc[k][c].add(vals[cuts.size() * n_cells + c] -
                                   vals[k * n_cells + c]);
            }
        monotone_acc.add(vals.back());
    }

    for (std::size_t k = 0; k < cuts.size(); ++k) {
        std::size_t c = 0;
        for (double t : cfg.times) {
            for (double q : cfg.qs) {
                ReportRow row;
                {
                    std::ostringstream os;
                    os << "cut_vs_direct_l=" << cuts[k];
                    row.statistic = os.str();
                }
                row.t = t;
                row.q = q;
                row.estimate = cut_acc[k][c].mean;
                row.std_error = std::sqrt(
                    cut_acc[k][c].std_error() * cut_acc[k][c].std_error() +
                    direct[k][c].std_error() * direct[k][c].std_error());
                row.target = direct[k][c].mean;
                const CompareResult cmp = compare_stats(row.estimate, row.std_error,
                                                        row.target, cfg.z_threshold);
                row.zscore = cmp.zscore;
                row.pass = cmp.pass;
                row.reps = cut_acc[k][c].n;
                row.aborted = aborted + direct_aborted[k];
                report.rows.push_back(row);

                // one-sided check of the truncation error bound when valid
                const double qbound = 2.0 * std::max(std::exp(cfg.gf.theta * t), 1.0);
                if (q > qbound && in_dom(cfg.gf, q)) {
                    ReportRow brow;
                    {
                        std::ostringstream os;
                        os << "truncation_bound_l=" << cuts[k];
                        brow.statistic = os.str();
                    }
                    brow.t = t;
                    brow.q = q;
                    brow.estimate = diff_acc[k][c].mean;
                    brow.std_error = diff_acc[k][c].std_error();
                    brow.target = truncation_error_bound(cfg.gf, cuts[k], q, t,
                                                         cfg.quadrature);
                    brow.zscore = brow.std_error > 0.0
                                      ? (brow.estimate - brow.target) / brow.std_error
                                      : 0.0;
                    brow.pass = brow.estimate <=
                                brow.target + cfg.z_threshold * brow.std_error;
                    brow.reps = diff_acc[k][c].n;
                    brow.aborted = aborted;
                    report.rows.push_back(brow);
                }
                ++c;
            }
        }
    }
    ReportRow mono;
    mono.statistic = "lq_monotone_fraction";
    mono.estimate = monotone_acc.mean;
    mono.std_error = 0.0;
    mono.target = 1.0;
    mono.zscore = monotone_acc.mean == 1.0 ? 0.0 : -kInf;
    mono.pass = monotone_acc.mean == 1.0;
    mono.reps = monotone_acc.n;
    mono.aborted = aborted;
    report.rows.push_back(mono);
}

void run_rrt(const ExperimentConfig& cfg, ExperimentReport& report) {
    require(!cfg.rrt_n.empty(), "rrt requires n");
    require(!cfg.times.empty() && !cfg.qs.empty(), "rrt requires times and q");
    for (double t : cfg.times)
        for (double q : cfg.qs)
            if (!(q > std::exp(t))) {
                std::ostringstream os;
                os << "rrt moment undefined: q=" << q << " <= e^t at t=" << t;
                throw std::invalid_argument(os.str());
            }

    RandomStream master = derive_stream(cfg.seed);
    const std::size_t cells = cfg.times.size() * cfg.qs.size();
    std::vector<std::vector<double>> gaps(cells);  // |estimate - target| per n

    for (std::size_t ni = 0; ni < cfg.rrt_n.size(); ++ni) {
        const std::size_t n = cfg.rrt_n[ni];
        RandomStream n_master = master.child(ni);
        auto values = parallel_reps(cfg.reps, cfg.threads, [&](std::size_t r) {
            RandomStream run_stream = n_master.child(r);
            const rrt::RecursiveTree tree = rrt::build_tree(n, run_stream.child(1));
            const rrt::DestructionSchedule schedule =
                rrt::draw_schedule(tree, run_stream.child(2));
            std::vector<double> vals;
            vals.reserve(cells);
            for (double t : cfg.times) {
                const rrt::ClusterPartition part = rrt::destroy_at(tree, schedule, t);
                const std::vector<double> weights = rrt::cluster_weights(part, n, t);
                for (double q : cfg.qs) {
                    double sum = 0.0;
                    for (double w : weights) sum += std::pow(w, q);
                    vals.push_back(sum);
                }
            }
            return vals;
        });

        std::vector<Welford> acc(cells);
        for (const auto& vals : values)
            for (std::size_t c = 0; c < cells; ++c) acc[c].add(vals[c]);

        std::size_t c = 0;
        for (double t : cfg.times) {
            for (double q : cfg.qs) {
                const double target = rrt::rrt_moment(q, t);
                ReportRow row;
                {
                    std::ostringstream os;
                    os << "rrt_moment_n=" << n;
                    row.statistic = os.str();
                }
                row.t = t;
                row.q = q;
                row.estimate = acc[c].mean;
                row.std_error = acc[c].std_error();
                row.target = target;
                row.zscore = row.std_error > 0.0
                                 ? (row.estimate - target) / row.std_error
                                 : 0.0;
                // finite-n estimates of a limit: margin tolerance at every n,
                // tightened by the trend row below
                row.pass = std::abs(row.estimate - target) <=
                           std::max(cfg.z_threshold * row.std_error,
                                    cfg.margin * std::abs(target));
                row.reps = acc[c].n;
                report.rows.push_back(row);
                gaps[c].push_back(std::abs(row.estimate - target));
                ++c;
            }
        }
    }

    std::size_t c = 0;
    for (double t : cfg.times) {
        for (double q : cfg.qs) {
            ReportRow row;
            row.statistic = "rrt_gap_trend";
            row.t = t;
            row.q = q;
            bool nonincreasing = true;
            for (std::size_t k = 1; k < gaps[c].size(); ++k)
                if (gaps[c][k] > gaps[c][k - 1]) nonincreasing = false;
            row.estimate = nonincreasing ? 1.0 : 0.0;
            row.std_error = 0.0;
            row.target = 1.0;
            row.zscore = nonincreasing ? 0.0 : -kInf;
            row.pass = nonincreasing;
            row.reps = cfg.reps;
            report.rows.push_back(row);
            ++c;
        }
    }
}

void run_cell_vs_atom(const ExperimentConfig& cfg, ExperimentReport& report) {
    require(cfg.has_levy, "cell_vs_atom requires a Levy model");
    require(!cfg.times.empty() && !cfg.qs.empty(), "cell_vs_atom requires times and q");
    const GFCharacteristics gf = binary_gf_of_levy(cfg.levy, cfg.theta, cfg.quadrature);
    const GFCharacteristics trunc = truncated_gf(gf, cfg.level);
    for (double t : cfg.times)
        for (double q : cfg.qs) validate_moment_range(trunc, q, t);

    RandomStream master = derive_stream(cfg.seed);
    RandomStream cell_master = master.child(1);
    RandomStream atom_master = master.child(2);
    const std::size_t cells = cfg.times.size() * cfg.qs.size();

    auto collect = [&](bool cell_system, RandomStream& src,
                       std::vector<Welford>& acc, std::uint64_t& aborted) {
        auto values = parallel_reps(cfg.reps, cfg.threads, [&](std::size_t r) {
            SimRun run = cell_system
                             ? cell_system_simulate_stream(cfg.levy, cfg.theta,
                                                           cfg.times, src.child(r),
                                                           cfg.caps)
                             : simulate_stream(gf, cfg.level, cfg.times, src.child(r),
                                               cfg.caps);
            std::vector<double> vals;
            if (run.aborted()) return vals;
            for (std::size_t j = 0; j < cfg.times.size(); ++j) {
                const Snapshot snap = run.snapshot(j);
                for (double q : cfg.qs) vals.push_back(lq_statistic(snap, q));
            }
            return vals;
        });
        for (const auto& vals : values) {
            if (vals.empty()) {
                ++aborted;
                continue;
            }
            for (std::size_t c = 0; c < cells; ++c) acc[c].add(vals[c]);
        }
    };

    std::vector<Welford> cell_acc(cells), atom_acc(cells);
    std::uint64_t cell_aborted = 0, atom_aborted = 0;
    collect(true, cell_master, cell_acc, cell_aborted);
    collect(false, atom_master, atom_acc, atom_aborted);

    std::size_t c = 0;
    for (double t : cfg.times) {
        for (double q : cfg.qs) {
            ReportRow row;
            row.statistic = "cell_vs_atom";
            row.t = t;
            row.q = q;
            row.estimate = cell_acc[c].mean;
            row.std_error =
                std::sqrt(cell_acc[c].std_error() * cell_acc[c].std_error() +
                          atom_acc[c].std_error() * atom_acc[c].std_error());
            row.target = atom_acc[c].mean;
            const CompareResult cmp =
                compare_stats(row.estimate, row.std_error, row.target,
                              cfg.z_threshold);
            row.zscore = cmp.zscore;
            row.pass = cmp.pass;
            row.reps = cell_acc[c].n;
            row.aborted = cell_aborted + atom_aborted;
            report.rows.push_back(row);

            ReportRow mrow;
            mrow.statistic = "cell_moment_formula";
            mrow.t = t;
            mrow.q = q;
            mrow.estimate = cell_acc[c].mean;
            mrow.std_error = cell_acc[c].std_error();
            mrow.target = moment_target(trunc, q, t, cfg.quadrature);
            const CompareResult mcmp = compare_stats(mrow.estimate, mrow.std_error,
                                                     mrow.target, cfg.z_threshold);
            mrow.zscore = mcmp.zscore;
            mrow.pass = mcmp.pass;
            mrow.reps = cell_acc[c].n;
            mrow.aborted = cell_aborted;
            report.rows.push_back(mrow);
            ++c;
        }
    }
    for (double q : cfg.qs) {
        ReportRow row;
        row.statistic = "kappa_consistency";
        row.q = q;
        row.estimate = cumulant_from_levy(cfg.levy, q, cfg.quadrature);
        row.target = cumulant(gf, q, cfg.quadrature);
        row.std_error = 0.0;
        const CompareResult cmp =
            compare_stats(row.estimate, 0.0, row.target, cfg.z_threshold);
        row.zscore = cmp.zscore;
        row.pass = cmp.pass;
        row.reps = 0;
        report.rows.push_back(row);
    }
}

void run_ou_laplace(const ExperimentConfig& cfg, ExperimentReport& report) {
    require(cfg.has_levy, "ou_laplace requires a Levy model");
    require(!cfg.times.empty() && !cfg.qs.empty(), "ou_laplace requires times and q");
    const OUParams params{cfg.levy, cfg.theta};
    const PreparedDriver driver(params, cfg.quadrature);
    const double horizon = cfg.times.back();

    RandomStream master = derive_stream(cfg.seed);
    const std::size_t cells = cfg.times.size() * cfg.qs.size();
    auto values = parallel_reps(cfg.reps, cfg.threads, [&](std::size_t r) {
        OUPath path = driver.simulate(cfg.z0, horizon, master.child(r), cfg.times);
        std::vector<double> vals;
        vals.reserve(cells);
        for (std::size_t j = 0; j < cfg.times.size(); ++j) {
            const double z = path.obs_values()[j];
            for (double q : cfg.qs)
                vals.push_back(std::isfinite(z) ? std::exp(q * z) : 0.0);
        }
        return vals;
    });

    std::vector<Welford> acc(cells);
    for (const auto& vals : values)
        for (std::size_t c = 0; c < cells; ++c) acc[c].add(vals[c]);

    std::size_t c = 0;
    for (double t : cfg.times) {
        for (double q : cfg.qs) {
            ReportRow row;
            row.statistic = "ou_laplace";
            row.t = t;
            row.q = q;
            row.estimate = acc[c].mean;
            row.std_error = acc[c].std_error();
            row.target = ou_laplace_transform(params, cfg.z0, q, t, cfg.quadrature);
            const CompareResult cmp = compare_stats(row.estimate, row.std_error,
                                                    row.target, cfg.z_threshold);
            row.zscore = cmp.zscore;
            row.pass = cmp.pass;
            row.reps = acc[c].n;
            report.rows.push_back(row);
            ++c;
        }
    }
}

void run_f_weight(const ExperimentConfig& cfg, ExperimentReport& report) {
    require(cfg.has_levy, "f_weight requires a Levy model");
    require(!cfg.times.empty(), "f_weight requires times");
    const double s = cfg.fw_s;
    const double x = cfg.fw_x;
    const OUParams params{cfg.levy, cfg.theta};
    const PreparedDriver driver(params, cfg.quadrature);

    RandomStream master = derive_stream(cfg.seed);
    for (std::size_t ti = 0; ti < cfg.times.size(); ++ti) {
        const double t = cfg.times[ti];
        RandomStream t_master = master.child(ti);
        auto values = parallel_reps(cfg.reps, cfg.threads, [&](std::size_t r) {
            OUPath path = driver.simulate(std::log(x), t, t_master.child(r), {t});
            double total = 0.0;
            const double zt = path.obs_values()[0];
            if (std::isfinite(zt))
                total += f_weight(cfg.levy, cfg.theta, cfg.eta, s + t, std::exp(zt),
                                  cfg.quadrature);
            for (const auto& ev : path.events()) {
                if (ev.kind != OUEvent::Kind::Jump) continue;
                const double drop =
                    std::exp(ev.z_pre) * (-std::expm1(ev.z_post - ev.z_pre));
                total += f_weight(cfg.levy, cfg.theta, cfg.eta, s + ev.t, drop,
                                  cfg.quadrature);
            }
            return std::vector<double>{total};
        });
        Welford acc;
        for (const auto& vals : values) acc.add(vals[0]);
        ReportRow row;
        row.statistic = "f_supermartingale";
        row.t = t;
        row.q = cfg.eta;
        row.estimate = acc.mean;
        row.std_error = acc.std_error();
        row.target = f_weight(cfg.levy, cfg.theta, cfg.eta, s, x, cfg.quadrature);
        row.zscore = row.std_error > 0.0
                         ? (row.estimate - row.target) / row.std_error
                         : (row.estimate <= row.target ? 0.0 : kInf);
        // one-sided: the mean must not exceed F(s, x)
        row.pass = row.estimate <= row.target + cfg.z_threshold * row.std_error;
        row.reps = acc.n;
        report.rows.push_back(row);
    }
}

}  // namespace

ExperimentReport run_experiment(const ExperimentConfig& cfg) {
    const auto start = std::chrono::steady_clock::now();
    ExperimentReport report;
    report.experiment = cfg.kind_name;
    report.seed = cfg.seed;
    {
        std::ostringstream os;
        os << std::hex << fnv1a(cfg.canonical_json);
        report.config_hash = os.str();
    }
    switch (cfg.kind) {
        case ExperimentKind::Moment: run_moment(cfg, report); break;
        case ExperimentKind::Martingale: run_martingale(cfg, report); break;
        case ExperimentKind::ManyToOne: run_many_to_one(cfg, report); break;
        case ExperimentKind::Lln: run_lln(cfg, report); break;
        case ExperimentKind::GeneratorResidual:
            run_generator_residual(cfg, report);
            break;
        case ExperimentKind::Truncation: run_truncation(cfg, report); break;
        case ExperimentKind::Rrt: run_rrt(cfg, report); break;
        case ExperimentKind::CellVsAtom: run_cell_vs_atom(cfg, report); break;
        case ExperimentKind::OuLaplace: run_ou_laplace(cfg, report); break;
        case ExperimentKind::FWeight: run_f_weight(cfg, report); break;
    }
    const auto end = std::chrono::steady_clock::now();
    report.wall_seconds = std::chrono::duration<double>(end - start).count();
    return report;
}

namespace {

void emit_csv(const ExperimentReport& report, std::ostream& out) {
    out << "experiment,statistic,t,q,estimate,stderr,target,zscore,reps,aborted\n";
    for (const auto& row : report.rows) {
        out << report.experiment << ',' << row.statistic << ',' << format_g17(row.t)
            << ',' << format_g17(row.q) << ',' << format_g17(row.estimate) << ','
            << format_g17(row.std_error) << ',' << format_g17(row.target) << ','
            << format_g17(row.zscore) << ',' << row.reps << ',' << row.aborted
            << '\n';
    }
}

json row_to_json(const ExperimentReport& report, const ReportRow& row) {
    json j;
    j["experiment"] = report.experiment;
    j["statistic"] = row.statistic;
    j["t"] = row.t;
    j["q"] = row.q;
    j["estimate"] = row.estimate;
    j["stderr"] = row.std_error;
    j["target"] = row.target;
    j["zscore"] = row.zscore;
    j["reps"] = row.reps;
    j["aborted"] = row.aborted;
    j["pass"] = row.pass;
    return j;
}

}  // namespace

std::string report_to_json(const ExperimentReport& report) {
    json j;
    j["experiment"] = report.experiment;
    j["seed"] = report.seed;
    j["config_hash"] = report.config_hash;
    j["wall_seconds"] = report.wall_seconds;
    j["rows"] = json::array();
    for (const auto& row : report.rows) j["rows"].push_back(row_to_json(report, row));
    return j.dump(2);
}

ExperimentReport report_from_json(const std::string& json_text) {
    json j = json::parse(json_text);
    ExperimentReport report;
    report.experiment = j.at("experiment").get<std::string>();
    report.seed = j.at("seed").get<std::uint64_t>();
    report.config_hash = j.at("config_hash").get<std::string>();
    report.wall_seconds = j.at("wall_seconds").get<double>();
    for (const auto& rj : j.at("rows")) {
        ReportRow row;
        row.statistic = rj.at("statistic").get<std::string>();
        row.t = rj.at("t").get<double>();
        row.q = rj.at("q").get<double>();
        row.estimate = rj.at("estimate").get<double>();
        row.std_error = rj.at("stderr").get<double>();
        row.target = rj.at("target").get<double>();
        row.zscore = rj.at("zscore").get<double>();
        row.reps = rj.at("reps").get<std::uint64_t>();
        row.aborted = rj.at("aborted").get<std::uint64_t>();
        row.pass = rj.at("pass").get<bool>();
        report.rows.push_back(row);
    }
    return report;
}

void emit_report(const ExperimentReport& report, const std::string& format,
                 std::ostream& out) {
    if (format == "csv") {
        emit_csv(report, out);
    } else if (format == "json") {
        out << report_to_json(report) << '\n';
    } else {
        throw std::invalid_argument("unknown report format: " + format);
    }
}

void emit_report_file(const ExperimentReport& report, const std::string& format,
                      const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open output file: " + path);
    emit_report(report, format, out);
}

bool ConditionReport::all_ok() const {
    for (const auto& line : lines)
        if (!line.ok) return false;
    return true;
}

std::string ConditionReport::text() const {
    std::ostringstream os;
    for (const auto& line : lines) {
        os << (line.ok ? "PASS " : "FAIL ") << line.name;
        if (std::isfinite(line.value)) os << " = " << format_g17(line.value);
        os << '\n';
    }
    return os.str();
}

ConditionReport check_conditions(const ExperimentConfig& cfg) {
    ConditionReport out;
    if (cfg.kind == ExperimentKind::Rrt) {
        for (double t : cfg.times)
            for (double q : cfg.qs)
                out.lines.push_back({"rrt moment range q > e^t (q=" +
                                         format_g17(q) + ", t=" + format_g17(t) + ")",
                                     q - std::exp(t), q > std::exp(t)});
        return out;
    }
    GFCharacteristics gf;
    if (cfg.has_gf) {
        gf = cfg.gf;
    } else if (cfg.has_levy) {
        gf = binary_gf_of_levy(cfg.levy, cfg.theta, cfg.quadrature);
    } else {
        throw std::invalid_argument("check-conditions requires a model");
    }
    const GFCharacteristics trunc = truncated_gf(gf, cfg.level);

    const bool wants_lln = cfg.kind == ExperimentKind::Lln;
    const bool wants_kappa0 = wants_lln || cfg.kind == ExperimentKind::Martingale ||
                              cfg.kind == ExperimentKind::ManyToOne;
    if (wants_kappa0) {
        const LLNConditions cond =
            check_lln_conditions(trunc, cfg.gamma, cfg.quadrature);
        out.lines.push_back({"kappa(0) finite (number of fragments finite)",
                             cond.kappa0, cond.kappa0_finite});
        if (wants_lln) {
            out.lines.push_back({"kappa(0) > 0 (supercritical)", cond.kappa0,
                                 cond.supercritical});
            {
                std::ostringstream os;
                os << "gamma-moment of the offspring count finite (gamma="
                   << cfg.gamma << ")";
                out.lines.push_back(
                    {os.str(), cond.gamma_moment, cond.gamma_moment_finite});
            }
            out.lines.push_back({"log-log moment of small fragments finite",
                                 cond.loglog_moment, cond.loglog_finite});
            out.lines.push_back({"theta > 0 (inward)", trunc.theta, trunc.theta > 0.0});
        }
    }
    if (cfg.kind == ExperimentKind::Moment || cfg.kind == ExperimentKind::Lln ||
        cfg.kind == ExperimentKind::Truncation ||
        cfg.kind == ExperimentKind::CellVsAtom) {
        for (double t : cfg.times) {
            for (double q : cfg.qs) {
                const double alpha = q / std::max(1.0, std::exp(trunc.theta * t));
                std::ostringstream os;
                os << "moment range q >= alpha max(1, e^{theta t}) with alpha in "
                      "dom (q="
                   << q << ", t=" << t << ")";
                out.lines.push_back({os.str(), alpha, in_dom(trunc, alpha)});
            }
        }
    }
    if (cfg.kind == ExperimentKind::Martingale) {
        for (double q : cfg.qs) {
            std::ostringstream os;
            os << "q in dom(kappa) for the additive martingale (q=" << q << ")";
            out.lines.push_back({os.str(), q, in_dom(trunc, q)});
        }
    }
    if (cfg.kind == ExperimentKind::FWeight) {
        for (double t : cfg.times) {
            const double qmax = 2.0 * std::max(1.0, std::exp(cfg.theta * t));
            const double qmin = 2.0 * std::min(1.0, std::exp(cfg.theta * t));
            std::ostringstream os;
            os << "cumulant finite on [" << qmin << ", " << qmax
               << "] for the F-weight exponents (t=" << t << ")";
            const bool ok = !cfg.levy.jumps.is_density() ||
                            qmin > cfg.levy.jumps.tail_alpha() - 1.0;
            out.lines.push_back({os.str(), qmin, ok});
        }
    }
    return out;
}

}  // namespace ougf::harness
