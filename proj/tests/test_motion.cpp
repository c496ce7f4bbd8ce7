#include "cqlaser/motion.hpp"
#include "cqlaser/selftest.hpp"

#include <gtest/gtest.h>

using namespace cqlaser;

namespace {

SystemParams g50_family(double delta = 100.0, double nu = 30.0)
{
    SystemParams p;
    p.gamma = 10;
    p.g = 50;
    p.nu = nu;
    p.delta = delta;
    return p;
}

SystemParams delta250_family(double g = 20.0, double nu = 20.0)
{
    SystemParams p;
    p.gamma = 5;
    p.delta = 250;
    p.g = g;
    p.nu = nu;
    return p;
}

} // namespace

TEST(FirstOrder, VanishesAtAntinode)
{
    const auto X1 = motion::first_order_response(g50_family(), 0.0);
    EXPECT_EQ(X1.as_vector().cwiseAbs().maxCoeff(), 0.0);
}

TEST(FirstOrder, DefiningEquation)
{
    // M X1 = grad X0, with grad X0 taken by central differences of X0(x)
    const auto p = g50_family();
    const double x = p.wavelength() / 8;
    const auto sol = moments::solve_self_consistent(p, x);
    const auto sys = moments::system_matrix(p, x, sol.Z);
    auto X0 = [&](double xx) {
        const auto s = moments::solve_self_consistent(p, xx);
        return moments::adiabatic_moments(p, coupling(p, xx), s.Z).as_vector();
    };
    const double h = 1e-5;
    const moments::Vector4 dX0 = (X0(x + h) - X0(x - h)) / (2 * h);
    const moments::Vector4 r = sys.M * motion::first_order_response(p, x).as_vector() - dX0;
    EXPECT_LT(r.cwiseAbs().maxCoeff(), 1e-7 * dX0.cwiseAbs().maxCoeff());
}

TEST(Friction, ClosedFormMatchesMatrixRoute)
{
    for (const auto& fam : {g50_family(), delta250_family()}) {
        const auto pts = selftest::random_points(fam, 300.0, 32, 42);
        EXPECT_LT(selftest::friction_dual_worst(pts), 1e-6);
    }
}

TEST(Friction, ZeroAtAntinodeAndRegularAtNode)
{
    const auto p = g50_family();
    EXPECT_EQ(motion::friction(p, 0.0), 0.0);
    const double node = p.wavelength() / 4;
    EXPECT_NEAR(motion::friction(p, node), motion::friction_matrix(p, node), 1e-10);
}

TEST(Friction, HeatsWithoutInversion)
{
    // nu < gamma: population not inverted, the averaged friction accelerates
    const auto p = g50_family(100.0, 5.0);
    const double b = motion::position_average([&](double x) { return motion::friction(p, x); }, p);
    EXPECT_GT(b, 0.0);
}

TEST(Noise, CovarianceEntries)
{
    const auto p = g50_family();
    moments::MomentSolution empty;
    const auto C0 = motion::noise_covariance(p, empty);
    moments::Matrix4 expect = moments::Matrix4::Zero();
    expect.diagonal() << 0.0, 2 * p.nu, 2 * p.nu, 2 * p.nu;
    EXPECT_EQ(C0, expect);

    const auto sol = moments::solve_self_consistent(p, 0.5);
    const auto C = motion::noise_covariance(p, sol);
    EXPECT_DOUBLE_EQ(C(0, 0), 2 * p.kappa * sol.N);
    EXPECT_EQ(C(2, 3), 0.0);
    EXPECT_EQ(C, C.transpose());
}

TEST(Noise, PrintedCoefficientsEqualInverseRow)
{
    const auto p = delta250_family();
    for (double x : {0.1, 0.7, 1.3}) {
        const double Z = moments::solve_self_consistent(p, x).Z;
        const auto a = motion::noise_response_row(p, coupling(p, x), Z);
        const auto b = motion::noise_response_coefficients(p, coupling(p, x), Z);
        EXPECT_LT((a - b).cwiseAbs().maxCoeff(), 1e-12 * b.cwiseAbs().maxCoeff());
    }
}

TEST(Diffusion, ClosedFormMatchesAssembly)
{
    for (const auto& fam : {g50_family(), delta250_family()}) {
        const auto pts = selftest::random_points(fam, 300.0, 32, 43);
        double lo = 0.0;
        EXPECT_LT(selftest::diffusion_dual_worst(pts, &lo), 1e-6);
        EXPECT_GE(lo, 0.0);
    }
}

TEST(Diffusion, AntinodeZeroNodeFinite)
{
    const auto p = g50_family();
    EXPECT_EQ(motion::diffusion_field(p, 0.0), 0.0);
    // at a node the G^2 prefactor is cancelled by kappa/W; both routes agree on the limit
    const double node = p.wavelength() / 4;
    const double Gam = p.total_damping();
    const double P = p.nu / (p.nu + p.gamma);
    const double expect = p.g * p.g * (p.kappa * P + p.nu) / (Gam * Gam + p.delta * p.delta);
    EXPECT_NEAR(motion::diffusion_field(p, node), expect, 1e-10 * expect);
    EXPECT_NEAR(motion::diffusion_field_assembled(p, node), expect, 1e-10 * expect);
}

TEST(Diffusion, Recoil)
{
    auto p = g50_family();
    const double node = p.wavelength() / 4;
    EXPECT_NEAR(motion::diffusion_recoil(p, node), p.gamma * p.nu / (p.nu + p.gamma), 1e-12);
    const double x = 0.4;
    const double P = moments::solve_self_consistent(p, x).P;
    EXPECT_DOUBLE_EQ(motion::diffusion_recoil(p, x), p.gamma * P);
    p.gamma = 0;
    EXPECT_EQ(motion::diffusion_recoil(p, x), 0.0);
}

TEST(Potential, ConservativeAndMinimaAtAntinodes)
{
    const auto p = g50_family();
    const double L = half_period(p);
    EXPECT_NEAR(motion::potential(p, L), 0.0, 1e-9);
    EXPECT_EQ(motion::potential(p, 0.0), 0.0);
    for (int i = 1; i < 8; ++i) EXPECT_GT(motion::potential(p, L * i / 8), 0.0);
    EXPECT_GT(motion::potential_depth(p), 0.0);

    // F = -dU/dx
    for (double x : {0.3, 0.9, 1.2}) {
        const double h = 1e-4;
        const double dU = (motion::potential(p, x + h) - motion::potential(p, x - h)) / (2 * h);
        EXPECT_NEAR(-dU, moments::mean_force(p, x), 1e-6 * std::abs(moments::mean_force(p, x)));
    }
}

TEST(Potential, LambModelMatchesAntiderivative)
{
    // Lamb force ~ (grad G/G) N with N linear in 1/W above threshold: U has a closed form
    SystemParams p;
    p.gamma = 10;
    p.nu = 20;
    p.g = 100;
    p.delta = 200;
    const double a = p.atomic_damping();
    const double gth = *lamb::threshold_coupling(p);
    const double xth = std::acos(gth / p.g);
    auto U = [&](double x) {
        // -int_0^x 2 kappa Delta/a * (G'/G) * N, N = (nu-gamma)/(2kappa) - a/(2kappa) * kappa (a^2+Delta^2)/(a G^2)
        const double c = 2 * p.kappa * p.delta / a;
        const double n1 = (p.nu - p.gamma) / (2 * p.kappa);
        const double n2 = (a * a + p.delta * p.delta) / 2.0;
        auto prim = [&](double xx) {
            const double G = coupling(p, xx);
            return c * (n1 * std::log(std::abs(G)) + n2 / (2 * G * G));
        };
        const double xe = std::min(x, xth);
        return -(prim(xe) - prim(0.0));
    };
    for (double x : {0.1, 0.3, 0.6, 1.0})
        EXPECT_NEAR(motion::potential(p, x, motion::ForceModel::Lamb), U(x), 1e-8 * std::max(1.0, std::abs(U(x))));
}

TEST(PositionAverage, Oracles)
{
    const auto p = g50_family();
    EXPECT_NEAR(motion::position_average([](double) { return 3.5; }, p), 3.5, 1e-14);
    EXPECT_NEAR(motion::position_average([](double x) { return std::sin(2 * x); }, p), 0.0, 1e-14);
    EXPECT_NEAR(motion::position_average([](double x) { return std::cos(x) * std::cos(x); }, p), 0.5, 1e-14);
}

TEST(Equilibrium, CoolingPoint)
{
    const auto s = motion::equilibrium_temperature(delta250_family());
    EXPECT_TRUE(s.cooling);
    EXPECT_LT(s.beta_avg, 0.0);
    EXPECT_NEAR(s.kT, s.D_avg / -s.beta_avg, 1e-12 * s.kT);
    EXPECT_NEAR(s.E, s.kT / 2, 1e-14);
    EXPECT_NEAR(s.ratio, s.E / s.V, 1e-12);
    EXPECT_NEAR(s.kT, 115.06, 0.01);
}

TEST(Equilibrium, HeatingRegimeSignalled)
{
    const auto p = g50_family(100.0, 5.0);
    EXPECT_THROW((void)motion::equilibrium_temperature(p), motion::HeatingRegime);
    EXPECT_FALSE(motion::equilibrium_summary(p).cooling);
}

TEST(Equilibrium, TemperatureFallsWithCouplingInCoolingWindow)
{
    // (gamma, Delta) = (5, 250): T(g) drops from weak coupling into the cooling window
    double prev = std::numeric_limits<double>::infinity();
    for (double g : {20.0, 30.0, 40.0, 50.0, 60.0}) {
        const auto s = motion::equilibrium_temperature(delta250_family(g, 10.0));
        EXPECT_LT(s.kT, prev) << "g=" << g;
        prev = s.kT;
    }
}

TEST(Periodicity, CoefficientsEvenAboutAntinode)
{
    const auto p = delta250_family();
    for (double x : {0.2, 0.9, 1.4}) {
        EXPECT_NEAR(motion::friction(p, x), motion::friction(p, -x), 1e-12 * std::abs(motion::friction(p, x)));
        EXPECT_NEAR(motion::friction(p, x), motion::friction(p, x + half_period(p)),
                    1e-9 * std::abs(motion::friction(p, x)));
        EXPECT_NEAR(motion::diffusion_field(p, x), motion::diffusion_field(p, -x), 1e-12 * motion::diffusion_field(p, x));
        EXPECT_NEAR(moments::mean_force(p, x), -moments::mean_force(p, -x), 1e-12 * std::abs(moments::mean_force(p, x)));
    }
}
