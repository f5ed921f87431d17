#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "ougf/dislocation.hpp"
#include "ougf/rrt.hpp"

using namespace ougf;

namespace {

constexpr double kEulerGamma = 0.5772156649015328606;
constexpr double kLog2 = 0.6931471805599453;

GFCharacteristics half_half(double theta = 1.0) {
    GFCharacteristics gf;
    gf.theta = theta;
    gf.nu = DislocationMeasure::atoms({{1.0, MassPartition::of({0.5, 0.5})}});
    return gf;
}

// kappa of the (1/2,1/2) model: 2^{1-q} - 1 + q/2
double half_half_kappa(double q) { return std::pow(2.0, 1.0 - q) - 1.0 + 0.5 * q; }

}  // namespace

TEST_CASE("MassPartition validation") {
    CHECK_THROWS_AS(MassPartition::of({0.7, 0.5}), std::invalid_argument);
    CHECK_THROWS_AS(MassPartition::of({1.2}), std::invalid_argument);
    const MassPartition p = MassPartition::of({0.2, 0.5, 0.0, 0.3});
    CHECK(p.count() == 3);
    CHECK(p.s1() == 0.5);  // sorted decreasing, zeros dropped
    CHECK(MassPartition::killing().is_killing());
}

TEST_CASE("cumulant of the half-half model") {
    const GFCharacteristics gf = half_half();
    CHECK(cumulant(gf, 2.0) == doctest::Approx(0.5).epsilon(1e-14));
    for (double q : {0.0, 0.7, 1.0, 3.5}) {
        CHECK(cumulant(gf, q) == doctest::Approx(half_half_kappa(q)).epsilon(1e-13));
    }
}

TEST_CASE("cumulant: pure drift") {
    GFCharacteristics gf;
    gf.drift_c = 1.0;
    gf.theta = 1.0;
    for (double q : {0.0, 1.0, 2.5}) CHECK(cumulant(gf, q) == doctest::Approx(q));
}

TEST_CASE("cumulant of the recursive-tree measure matches kappa_R") {
    const GFCharacteristics gf = rrt::rrt_gf();
    for (double q : {1.5, 2.0, 3.0, 5.0}) {
        CHECK(cumulant(gf, q) == doctest::Approx(rrt::kappa_rrt(q)).epsilon(1e-8));
    }
    CHECK(cumulant(gf, 2.0) ==
          doctest::Approx(4.0 - 2.0 * kEulerGamma).epsilon(1e-8));
}

TEST_CASE("phi_star values and the kappa identity") {
    const GFCharacteristics gf = half_half();
    CHECK(phi_star(gf, 2.0) == doctest::Approx(0.25).epsilon(1e-14));
    CHECK(phi_star(gf, 0.0) == doctest::Approx(0.0));
    // kappa(q) - phi*(q) = int sum_{i>=2} s_i^q nu(ds) = 2^{-q}
    for (double q : {0.5, 1.0, 2.0, 4.0}) {
        CHECK(cumulant(gf, q) - phi_star(gf, q) ==
              doctest::Approx(std::pow(2.0, -q)).epsilon(1e-13));
    }
}

TEST_CASE("kappa >= phi_star pointwise, both convex") {
    const GFCharacteristics gf = rrt::rrt_gf();
    double prev_slope = -kInf;
    for (double q = 1.2; q < 6.0; q += 0.4) {
        CHECK(cumulant(gf, q) >= phi_star(gf, q) - 1e-12);
        const double slope = (cumulant(gf, q + 0.4) - cumulant(gf, q)) / 0.4;
        CHECK(slope >= prev_slope - 1e-9);
        prev_slope = slope;
    }
}

TEST_CASE("in_dom") {
    CHECK(in_dom(half_half(), 0.0));
    CHECK(in_dom(half_half(), 17.0));
    const GFCharacteristics gf = rrt::rrt_gf();
    CHECK_FALSE(in_dom(gf, 1.0));
    CHECK(in_dom(gf, 1.5));
    CHECK(in_dom(gf, 2.0));
    CHECK(cumulant(gf, 1.0) == kInf);  // divergence is a value
}

TEST_CASE("truncate: identity, level zero, and the worked atom") {
    const DislocationMeasure nu =
        DislocationMeasure::atoms({{1.0, MassPartition::of({0.5, 0.3, 0.2})}});
    const DislocationMeasure same = truncate(nu, kInf);
    CHECK(same.atom_list()[0].s.count() == 3);

    const DislocationMeasure only_first = truncate(nu, 0.0);
    CHECK(only_first.atom_list()[0].s.count() == 1);
    CHECK(only_first.atom_list()[0].s.s1() == 0.5);

    // threshold e^{-log 4} = 1/4 suppresses the 0.2 child
    const DislocationMeasure cut = truncate(nu, std::log(4.0));
    CHECK(cut.atom_list()[0].s.count() == 2);
    CHECK(cut.atom_list()[0].s.parts()[1] == doctest::Approx(0.3));
}

TEST_CASE("truncate composes: the smaller level wins") {
    const DislocationMeasure nu =
        DislocationMeasure::atoms({{1.0, MassPartition::of({0.5, 0.3, 0.2})}});
    const double l1 = 2.0, l2 = std::log(4.0);
    const DislocationMeasure a = truncate(truncate(nu, l1), l2);
    const DislocationMeasure b = truncate(nu, l2);
    REQUIRE(a.atom_list().size() == b.atom_list().size());
    for (std::size_t i = 0; i < a.atom_list().size(); ++i) {
        CHECK(a.atom_list()[i].s.parts() == b.atom_list()[i].s.parts());
    }
}

TEST_CASE("monotone truncation of the cumulant") {
    GFCharacteristics gf;
    gf.theta = 1.0;
    gf.nu = DislocationMeasure::atoms({{1.0, MassPartition::of({0.5, 0.3, 0.2})}});
    const double q = 2.0;
    double prev = -kInf;
    for (double level : {0.0, 1.0, std::log(4.0), 2.0, 10.0}) {
        GFCharacteristics cut = gf;
        cut.nu = truncate(gf.nu, level);
        const double value = cumulant(cut, q);
        CHECK(value >= prev - 1e-13);
        prev = value;
    }
    GFCharacteristics full = gf;
    CHECK(prev == doctest::Approx(cumulant(full, q)).epsilon(1e-12));
}

TEST_CASE("tilt_exponent examples") {
    const GFCharacteristics gf = half_half();
    CHECK(tilt_exponent(gf, 0.0, 0.0) == doctest::Approx(0.0));
    CHECK(tilt_exponent(gf, 0.0, 2.0) == doctest::Approx(-0.5).epsilon(1e-13));
    CHECK(tilt_exponent(gf, 2.0, 1.0) == doctest::Approx(0.25).epsilon(1e-13));
    // Phi_0 = kappa - kappa(0) whenever kappa(0) < infinity
    for (double q : {0.5, 1.0, 3.0}) {
        CHECK(tilt_exponent(gf, 0.0, q) ==
              doctest::Approx(cumulant(gf, q) - cumulant(gf, 0.0)).epsilon(1e-13));
    }
}

TEST_CASE("tilt_levy reproduces the tilted exponent") {
    GFCharacteristics gf;
    gf.sigma = 0.6;
    gf.drift_c = -0.2;
    gf.theta = 1.0;
    gf.nu = DislocationMeasure::atoms({{0.8, MassPartition::of({0.5, 0.3, 0.2})},
                                       {0.4, MassPartition::of({0.9})},
                                       {0.1, MassPartition::killing()}});
    for (double alpha : {0.0, 1.0, 2.0}) {
        const LevyCharacteristics levy = tilt_levy(gf, alpha);
        for (double q : {0.5, 1.0, 2.0, 3.0}) {
            CHECK(laplace_exponent(levy, q) ==
                  doctest::Approx(tilt_exponent(gf, alpha, q)).epsilon(1e-11));
        }
    }
}

TEST_CASE("stationary_gf_moment: trivial and Gaussian closed form") {
    GFCharacteristics gauss;
    gauss.sigma = 0.9;
    gauss.theta = 1.4;
    CHECK(stationary_gf_moment(gauss, 0.0) == doctest::Approx(1.0));
    for (double q : {1.0, 2.0, 4.0}) {
        const double target = std::exp(gauss.sigma * gauss.sigma * q * q / (4.0 * gauss.theta));
        CHECK(stationary_gf_moment(gauss, q) == doctest::Approx(target).epsilon(1e-8));
    }
}

TEST_CASE("stationary_gf_moment: half-half frozen value") {
    CHECK(stationary_gf_moment(half_half(), 2.0) ==
          doctest::Approx(0.3516833920097003).epsilon(1e-7));
    CHECK_THROWS_AS(stationary_gf_moment(half_half(-1.0), 2.0), std::domain_error);
}

TEST_CASE("generator_apply examples") {
    const GFCharacteristics gf = half_half();  // sigma = c = 0, theta = 1
    C2Function one{[](double) { return 1.0; }, [](double) { return 0.0; },
                   [](double) { return 0.0; }};
    CHECK(generator_apply(gf, one, 0.5) == doctest::Approx(1.0).epsilon(1e-13));
    CHECK(generator_apply(gf, one, 2.0) == doctest::Approx(1.0).epsilon(1e-13));

    C2Function identity{[](double x) { return x; }, [](double) { return 1.0; },
                        [](double) { return 0.0; }};
    for (double x : {0.3, 1.0, 2.5}) {
        CHECK(generator_apply(gf, identity, x) ==
              doctest::Approx(x * (0.5 - std::log(x))).epsilon(1e-12));
    }

    C2Function zero{[](double) { return 0.0; }, [](double) { return 0.0; },
                    [](double) { return 0.0; }};
    CHECK(generator_apply(gf, zero, 1.0) == doctest::Approx(0.0));
}

TEST_CASE("generator_apply on the density measure with a compact test function") {
    // f vanishing near zero, smooth: f = exp(-(log x)^2)
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
    const GFCharacteristics gf = rrt::rrt_gf();
    const double v = generator_apply(gf, fn, 1.3);
    CHECK(std::isfinite(v));
}

TEST_CASE("cumulant_from_levy") {
    LevyCharacteristics none;
    none.sigma = 0.5;
    none.drift_c = 0.3;
    for (double q : {0.0, 1.0, 2.0}) {
        CHECK(cumulant_from_levy(none, q) ==
              doctest::Approx(laplace_exponent(none, q)).epsilon(1e-13));
    }

    LevyCharacteristics halving;
    halving.jumps = JumpSpec::atoms({{-kLog2, 1.0}});
    CHECK(cumulant_from_levy(halving, 2.0) == doctest::Approx(0.5).epsilon(1e-13));
    CHECK(cumulant_from_levy(halving, 2.0) ==
          doctest::Approx(cumulant(half_half(), 2.0)).epsilon(1e-13));
}

TEST_CASE("cumulant_from_levy: recursive-tree Levy density") {
    // lambda(z) = e^z (1 - e^z)^{-2}, c = -gamma + 1: kappa(2) = 2 psi(3) + 1
    LevyCharacteristics levy;
    levy.drift_c = -kEulerGamma + 1.0;
    levy.jumps = JumpSpec::density(
        [](double y) {
            const double w = std::exp(y);
            const double u = -std::expm1(y);
            return w / (u * u);
        },
        /*eps=*/0.0, 2.0);
    CHECK(cumulant_from_levy(levy, 2.0) ==
          doctest::Approx(rrt::kappa_rrt(2.0)).epsilon(1e-8));
    CHECK(cumulant_from_levy(levy, 1.0) == kInf);
}

TEST_CASE("binary correspondence round trip") {
    // atom form
    GFCharacteristics gf;
    gf.sigma = 0.4;
    gf.drift_c = 0.1;
    gf.theta = 1.0;
    gf.nu = DislocationMeasure::atoms({{1.0, MassPartition::of({0.5, 0.5})},
                                       {0.7, MassPartition::of({0.8, 0.2})},
                                       {0.2, MassPartition::killing()}});
    const LevyCharacteristics levy = levy_of_binary(gf);
    for (double q : {0.0, 0.5, 1.0, 2.0, 3.0}) {
        CHECK(cumulant_from_levy(levy, q) ==
              doctest::Approx(cumulant(gf, q)).epsilon(1e-12));
    }
    const GFCharacteristics back = binary_gf_of_levy(levy, gf.theta);
    for (double q : {0.0, 0.5, 2.0, 3.0}) {
        CHECK(cumulant(back, q) == doctest::Approx(cumulant(gf, q)).epsilon(1e-12));
    }

    // jumps below -log 2 reorder the children and shift the drift
    LevyCharacteristics deep;
    deep.drift_c = 0.3;
    deep.jumps = JumpSpec::atoms({{-2.0, 0.5}});
    const GFCharacteristics mapped = binary_gf_of_levy(deep, 1.0);
    for (double q : {0.0, 1.0, 2.0, 4.0}) {
        CHECK(cumulant(mapped, q) ==
              doctest::Approx(cumulant_from_levy(deep, q)).epsilon(1e-12));
    }
}

TEST_CASE("binary correspondence for the density measure") {
    const GFCharacteristics gf = rrt::rrt_gf();
    const LevyCharacteristics levy = levy_of_binary(gf);
    for (double q : {1.5, 2.0, 3.0}) {
        CHECK(cumulant_from_levy(levy, q) ==
              doctest::Approx(cumulant(gf, q)).epsilon(1e-7));
    }
}

TEST_CASE("psi_h_decompose") {
    const GFCharacteristics gf = half_half();
    for (double q : {0.0, 1.0, 2.0, 3.0}) {
        const PsiH ph = psi_h_decompose(gf, 10.0, q);
        CHECK(ph.psi == doctest::Approx(0.5 * q).epsilon(1e-13));
        CHECK(ph.h == doctest::Approx(std::pow(2.0, 1.0 - q) - 1.0).epsilon(1e-13));
        GFCharacteristics trunc = gf;
        trunc.nu = truncate(gf.nu, 10.0);
        CHECK(ph.psi + ph.h == doctest::Approx(cumulant(trunc, q)).epsilon(1e-13));
    }

    // single-child-only measure: h vanishes
    GFCharacteristics single;
    single.theta = 1.0;
    single.nu = DislocationMeasure::atoms({{1.0, MassPartition::of({0.6})}});
    for (double q : {0.5, 2.0}) {
        const PsiH ph = psi_h_decompose(single, 5.0, q);
        CHECK(ph.h == doctest::Approx(0.0));
        CHECK(ph.psi == doctest::Approx(cumulant(single, q)).epsilon(1e-13));
    }
}

TEST_CASE("psi_h_decompose on the truncated density measure") {
    const GFCharacteristics gf = rrt::rrt_gf();
    const double level = std::log(4.0);
    GFCharacteristics trunc = gf;
    trunc.nu = truncate(gf.nu, level);
    for (double q : {1.5, 2.0, 3.0}) {
        const PsiH ph = psi_h_decompose(gf, level, q);
        CHECK(ph.psi + ph.h == doctest::Approx(cumulant(trunc, q)).epsilon(1e-7));
    }
}

TEST_CASE("truncation_error_bound") {
    const GFCharacteristics gf = half_half();
    // level -> infinity drives the bound to zero
    CHECK(truncation_error_bound(gf, 200.0, 6.0, 0.5) ==
          doctest::Approx(0.0).epsilon(1e-12));
    // frozen value at (q, t, level) = (6, 0.5, 5)
    CHECK(truncation_error_bound(gf, 5.0, 6.0, 0.5) ==
          doctest::Approx(7.41584394814692e-6).epsilon(1e-6));
    // growth-only measure: zero squared mass, zero bound
    GFCharacteristics growth;
    growth.theta = 1.0;
    growth.nu = DislocationMeasure::atoms({{1.0, MassPartition::of({1.0, 0.0})}});
    CHECK(truncation_error_bound(growth, 1.0, 6.0, 0.5) == doctest::Approx(0.0));
    // precondition: q must exceed 2 max(e^{theta t}, 1)
    CHECK_THROWS_AS(truncation_error_bound(gf, 5.0, 2.0, 1.0), std::domain_error);
}

TEST_CASE("check_lln_conditions") {
    const LLNConditions ok = check_lln_conditions(half_half());
    CHECK(ok.kappa0 == doctest::Approx(1.0));
    CHECK(ok.kappa0_finite);
    CHECK(ok.supercritical);
    CHECK(ok.gamma_moment == doctest::Approx(4.0));  // 2^2 at rate 1
    CHECK(ok.gamma_moment_finite);
    CHECK(ok.loglog_finite);
    CHECK(ok.all_hold());

    GFCharacteristics killing;
    killing.theta = 1.0;
    killing.nu = DislocationMeasure::atoms({{1.0, MassPartition::killing()}});
    const LLNConditions kc = check_lln_conditions(killing);
    CHECK(kc.kappa0 == doctest::Approx(-1.0));
    CHECK_FALSE(kc.supercritical);

    GFCharacteristics empty;
    empty.theta = 1.0;
    const LLNConditions ec = check_lln_conditions(empty);
    CHECK(ec.kappa0 == doctest::Approx(0.0));
    CHECK_FALSE(ec.supercritical);

    // untruncated rrt density: kappa(0) infinite; truncation restores it
    const LLNConditions rc = check_lln_conditions(rrt::rrt_gf());
    CHECK_FALSE(rc.kappa0_finite);
    GFCharacteristics trunc = rrt::rrt_gf();
    trunc.nu = truncate(trunc.nu, std::log(4.0));
    const LLNConditions tc = check_lln_conditions(trunc);
    CHECK(tc.kappa0_finite);
    // two-child region mass: int_{1/2}^{3/4} (s^-2 + (1-s)^-2) ds = 8/3
    CHECK(tc.kappa0 == doctest::Approx(8.0 / 3.0).epsilon(1e-9));
    CHECK(tc.supercritical);
}

TEST_CASE("squared_mass") {
    const DislocationMeasure nu = DislocationMeasure::rrt();
    // int (1-s)^2 (s^-2 + (1-s)^-2) ds over [1/2, 1): 1/2 + int (1-s)^2/s^2
    // = 1/2 + (2 - log 4 - 3/4 + log 2 ... ) computed independently below
    // int_{1/2}^1 ((1-s)/s)^2 ds = [ -s - 1/s + ... ]; evaluate numerically
    double direct = 0.0;
    const int n = 200000;
    for (int i = 0; i < n; ++i) {
        const double s = 0.5 + 0.5 * (i + 0.5) / n;
        const double u = 1.0 - s;
        direct += (u * u) * (1.0 / (s * s) + 1.0 / (u * u)) * (0.5 / n);
    }
    CHECK(nu.squared_mass() == doctest::Approx(direct).epsilon(1e-4));
}
