#include "cqlaser/stochsim.hpp"

#include <gtest/gtest.h>

using namespace cqlaser;
using stochsim::LocalCoefficients;

namespace {

struct Constant {
    LocalCoefficients c;
    [[nodiscard]] LocalCoefficients coefficients(double) const { return c; }
};

struct Harmonic {
    double spring;
    [[nodiscard]] LocalCoefficients coefficients(double x) const { return {-spring * x, 0.0, 0.0, 0.0, 0.0}; }
};

// Ornstein-Uhlenbeck momentum: constant friction and diffusion, no force
struct OrnsteinUhlenbeck {
    double beta, D;
    [[nodiscard]] LocalCoefficients coefficients(double) const { return {0.0, beta, D, 0.0, 0.0}; }
};

SystemParams cooling_point()
{
    SystemParams p;
    p.gamma = 5;
    p.nu = 20;
    p.g = 20;
    p.delta = 250;
    p.recoil = 0.1;
    return p;
}

} // namespace

TEST(Table, InterpolatesSmoothFunctionsToFourthOrder)
{
    const double L = pi;
    auto fn = [](double x) { return LocalCoefficients{std::sin(2 * x), std::cos(2 * x), 1 + std::cos(4 * x), 0, 0}; };
    auto err = [&](std::size_t n) {
        const auto t = stochsim::ForceTable::from_function(L, n, fn);
        double e = 0;
        for (int i = 0; i < 1000; ++i) {
            const double x = -5 + 0.0173 * i;
            e = std::max(e, std::abs(t.coefficients(x).F - std::sin(2 * x)));
        }
        return e;
    };
    EXPECT_LT(err(1024), 1e-9);
    EXPECT_GT(err(64) / err(128), 12.0);
}

TEST(Table, ReproducesModelOnGridNodes)
{
    const auto p = cooling_point();
    const auto t = stochsim::ForceTable::from_params(p, 64);
    for (std::size_t i = 0; i < 64; i += 7) {
        const double x = half_period(p) * static_cast<double>(i) / 64;
        EXPECT_NEAR(t.coefficients(x).F, moments::mean_force(p, x), 1e-12);
        EXPECT_NEAR(t.coefficients(x).beta, motion::friction(p, x), 1e-12);
    }
    EXPECT_LT(t.mean_friction(), 0.0);
}

TEST(Table, RefinementBoundsInterpolationError)
{
    const auto p = cooling_point();
    const auto coarse = stochsim::ForceTable::from_params(p, 256);
    const auto fine = stochsim::ForceTable::from_params(p, 1024);
    double e = 0, scale = 0;
    for (int i = 0; i < 97; ++i) {
        const double x = 0.0313 * i;
        e = std::max(e, std::abs(coarse.coefficients(x).beta - fine.coefficients(x).beta));
        scale = std::max(scale, std::abs(fine.coefficients(x).beta));
    }
    EXPECT_LT(e, 1e-5 * scale);
}

TEST(Simulate, FreeFlight)
{
    const Constant field{};
    const double m = 3.0;
    const auto tr = stochsim::simulate_in_field(field, m, {0.5, 1.2}, 1, 0.01, 10.0);
    for (const auto& s : tr.samples) {
        EXPECT_EQ(s.p, 1.2);
        EXPECT_NEAR(s.x, 0.5 + 1.2 * s.t / m, 1e-12);
    }
    EXPECT_NEAR(tr.samples.back().t, 10.0, 1e-12);
}

TEST(Simulate, HarmonicFrequency)
{
    // omega dt = 0.01: the semi-implicit scheme keeps the amplitude and period
    const double m = 2.0, k = 8.0, w = std::sqrt(k / m);
    const double dt = 0.01 / w;
    const double periods = 10;
    const auto tr = stochsim::simulate_in_field(Harmonic{k}, m, {1.0, 0.0}, 1, dt, periods * 2 * pi / w);
    // count downward zero crossings of x to measure the period
    std::vector<double> crossings;
    for (std::size_t i = 1; i < tr.samples.size(); ++i) {
        const auto& a = tr.samples[i - 1];
        const auto& b = tr.samples[i];
        if (a.x > 0 && b.x <= 0) crossings.push_back(a.t + (b.t - a.t) * a.x / (a.x - b.x));
    }
    ASSERT_GE(crossings.size(), 9u);
    const double period = (crossings.back() - crossings.front()) / static_cast<double>(crossings.size() - 1);
    EXPECT_NEAR(period, 2 * pi / w, 0.01 * 2 * pi / w);
    double amp = 0;
    for (const auto& s : tr.samples) amp = std::max(amp, std::abs(s.x));
    EXPECT_NEAR(amp, 1.0, 0.01);
}

TEST(Simulate, StabilityGuard)
{
    const Constant field{};
    stochsim::SimulationOptions opt;
    opt.max_friction_rate = 10.0;
    EXPECT_THROW((void)stochsim::simulate_in_field(field, 1.0, {}, 1, 0.02, 1.0, opt), std::invalid_argument);
    EXPECT_NO_THROW((void)stochsim::simulate_in_field(field, 1.0, {}, 1, 0.005, 1.0, opt));
    EXPECT_THROW((void)stochsim::simulate_in_field(field, 1.0, {}, 1, 0.0, 1.0), std::invalid_argument);
}

TEST(Simulate, GuardRatesFromTable)
{
    const auto p = cooling_point();
    const auto t = stochsim::ForceTable::from_params(p, 256);
    const auto opt = stochsim::guarded_options(t, p.mass());
    const double w = std::sqrt(std::abs(t.curvature_at_origin()) / p.mass());
    EXPECT_DOUBLE_EQ(opt.oscillation_rate, w);
    EXPECT_GT(t.curvature_at_origin(), 0.0); // potential minimum at the antinode
    EXPECT_THROW((void)stochsim::simulate(p, {}, 1, 1.0 / std::max(w, opt.max_friction_rate), 1.0,
                                          TrajectoryMode::AdiabaticStochastic, {}, &t),
                 std::invalid_argument);
}

TEST(Simulate, Deterministic)
{
    const auto p = cooling_point();
    const auto t = stochsim::ForceTable::from_params(p, 256);
    auto run = [&](unsigned threads) { return stochsim::simulate_ensemble(p, t, {}, 99, 0.05, 20.0, 4, {}, threads); };
    const auto a = run(1);
    const auto b = run(3);
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        ASSERT_EQ(a[i].samples.size(), b[i].samples.size());
        for (std::size_t j = 0; j < a[i].samples.size(); ++j) {
            EXPECT_EQ(a[i].samples[j].x, b[i].samples[j].x);
            EXPECT_EQ(a[i].samples[j].p, b[i].samples[j].p);
        }
    }
    EXPECT_NE(a[0].samples.back().p, a[1].samples.back().p);
    const auto sa = stochsim::ensemble_stats(a, 0.5, p);
    const auto sb = stochsim::ensemble_stats(b, 0.5, p);
    EXPECT_EQ(sa.kT_emp, sb.kT_emp);
    EXPECT_EQ(sa.loc, sb.loc);
}

TEST(Simulate, HeatingFlag)
{
    auto p = cooling_point();
    p.nu = 2; // not inverted: heating
    const auto t = stochsim::ForceTable::from_params(p, 128);
    const auto tr = stochsim::simulate(p, {}, 1, 0.01, 1.0, TrajectoryMode::AdiabaticStochastic, {}, &t);
    EXPECT_TRUE(tr.heating_warning);
}

TEST(Simulate, NoiseSubstepsPreserveVariance)
{
    // free diffusion: Var p(t) = 2 D t whatever the number of combined normals
    const Constant field{{0.0, 0.0, 0.5, 0.0, 0.0}};
    for (unsigned sub : {1u, 2u}) {
        stochsim::SimulationOptions opt;
        opt.noise_substeps = sub;
        opt.stride = 1000;
        double acc = 0;
        const int n = 2000;
        for (int i = 0; i < n; ++i) {
            opt.stream = static_cast<std::uint64_t>(i);
            const auto tr = stochsim::simulate_in_field(field, 1.0, {}, 5, 0.01, 10.0, opt);
            acc += tr.samples.back().p * tr.samples.back().p;
        }
        const double var = acc / n;
        EXPECT_NEAR(var, 10.0, 4 * 10.0 * std::sqrt(2.0 / n)) << "substeps " << sub;
    }
}

TEST(Stats, OrnsteinUhlenbeckTemperature)
{
    const double m = 1.0, beta = -2.0, D = 3.0;
    SystemParams p;
    p.recoil = 0.5; // m = 1
    std::vector<Trajectory> trajs;
    stochsim::SimulationOptions opt;
    opt.stride = 5;
    for (std::uint64_t i = 0; i < 50; ++i) {
        opt.stream = i;
        trajs.push_back(stochsim::simulate_in_field(OrnsteinUhlenbeck{beta, D}, m, {}, 11, 0.005, 100.0, opt));
    }
    const auto s = stochsim::ensemble_stats(trajs, 0.8, p);
    const double expect = D / -beta; // <p^2>/m for beta p/m friction
    EXPECT_NEAR(s.kT_emp, expect, 4 * s.kT_se + 0.01 * expect);
    EXPECT_GT(s.kT_se, 0.0);
    EXPECT_EQ(s.n_traj, 50u);
}

TEST(Stats, LocalizationOfTrappedTrajectory)
{
    SystemParams p;
    Trajectory tr;
    for (int i = 0; i < 100; ++i) tr.samples.push_back({0.1 * i, 2 * pi + 0.3 * std::sin(0.1 * i), 0.0, 0.0, 0.0});
    const auto s = stochsim::ensemble_stats({tr}, 0.1, p);
    EXPECT_EQ(s.loc, 1.0);
    EXPECT_EQ(s.kT_emp, 0.0);

    Trajectory away;
    for (int i = 0; i < 10; ++i) away.samples.push_back({0.1 * i, pi / 2, 1.0, 0, 0});
    EXPECT_EQ(stochsim::ensemble_stats({away}, 1.0, p).loc, 0.0);
}

TEST(Stats, Errors)
{
    SystemParams p;
    EXPECT_THROW((void)stochsim::ensemble_stats({}, 0.5, p), std::invalid_argument);
    Trajectory tr;
    tr.samples.push_back({});
    EXPECT_THROW((void)stochsim::ensemble_stats({tr}, 0.0, p), std::invalid_argument);
    EXPECT_THROW((void)stochsim::ensemble_stats({tr}, 1.5, p), std::invalid_argument);
}

TEST(Rng, StreamsDiffer)
{
    auto a = stochsim::make_stream(1, 0);
    auto b = stochsim::make_stream(1, 1);
    auto c = stochsim::make_stream(1, 0);
    const auto va = a();
    EXPECT_NE(va, b());
    EXPECT_EQ(va, c());
}

TEST(LambMode, DispatchesToCoupledIntegrator)
{
    SystemParams p;
    p.gamma = 10;
    p.nu = 20;
    p.g = 100;
    p.delta = 200;
    const double node = p.wavelength() / 4;
    const auto tr = stochsim::simulate(p, {node, 0.0}, 7, 1e-4, 0.5, TrajectoryMode::FullLamb,
                                       {.stride = 100}, nullptr, {lamb::LambState{}});
    EXPECT_EQ(tr.mode, TrajectoryMode::FullLamb);
    EXPECT_EQ(tr.seed, 7u);
    for (const auto& s : tr.samples) EXPECT_EQ(s.x, node);
}
