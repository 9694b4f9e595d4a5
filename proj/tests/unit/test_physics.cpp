#include <doctest.h>

#include <cmath>
#include <random>

#include "eon/error.hpp"
#include "eon/physics.hpp"
#include "oracles.hpp"

using namespace eon;
using namespace eon::physics;

namespace {

LinkNoiseContext two_channel_context(int n0, int n1, int shared) {
  LinkNoiseContext ctx;
  ctx.spans = {n0, n1};
  ctx.shared_spans = {{n0, shared}, {shared, n1}};
  ctx.coeffs = derived_constants(PhysicsConstants{});
  return ctx;
}

}  // namespace

TEST_CASE("exact kernel agrees with the atanh form") {
  for (int i = 1; i <= 190; ++i) {
    const double x = i * 0.01;
    CHECK(xci_kernel_exact(x) == doctest::Approx(static_cast<double>(oracle::kernel(x))).epsilon(1e-13));
  }
}

TEST_CASE("kernel approximations at the spot point") {
  const double e = static_cast<double>(oracle::kernel(1.0L));
  CHECK((xci_kernel_approx(1.0, 1) - e) / e == doctest::Approx(-0.0897).epsilon(0.01));
  CHECK((xci_kernel_approx(1.0, 3) - e) / e == doctest::Approx(-0.0036).epsilon(0.05));
  CHECK(xci_kernel_approx(0.5, 1) == doctest::Approx(kKappa1 * 0.5));
  CHECK(xci_kernel_approx(0.5, 3) == doctest::Approx(kKappa1 * 0.5 + kKappa2 * 0.125));
  CHECK_THROWS_AS(xci_kernel_approx(0.5, 2), InvalidArgument);
}

TEST_CASE("ASE and self-channel terms follow their closed forms") {
  const auto ctx = two_channel_context(7, 3, 0);
  const std::vector<ChannelState> ch{{1e-3, 0.0, 25e9, 4.0}, {2e-3, 100e9, 50e9, 2.0}};
  const auto& k = ctx.coeffs;
  CHECK(ase(0, ch, ctx) == doctest::Approx(k.zeta * 7 * 25e9));
  const double y = k.sigma * 7 * 1e-9 / (25e9 * 25e9) * std::asinh(k.iota * 25e9 * 25e9);
  CHECK(sci_exact(0, ch, ctx) == doctest::Approx(y));
  CHECK(sci_approx(0, ch, ctx) == doctest::Approx(k.sigma * k.iota * 7 * 1e-9));
  // No shared spans: no cross-channel term.
  CHECK(xci_exact(0, ch, ctx) == 0.0);
  CHECK(xci_approx(0, ch, ctx, 1).value == 0.0);
}

TEST_CASE("cross-channel term for one interfering neighbour") {
  const auto ctx = two_channel_context(5, 6, 4);
  const double p0 = 1e-3, p1 = 3e-3, d = 60e9, b1 = 40e9;
  const std::vector<ChannelState> ch{{p0, 10e9, 20e9, 4.0}, {p1, 10e9 + d, b1, 2.0}};
  const auto& k = ctx.coeffs;
  const double exact =
      k.sigma * p0 * p1 * p1 / (b1 * b1) * 4 * std::log10((d + b1 / 2) / (d - b1 / 2));
  CHECK(xci_exact(0, ch, ctx) == doctest::Approx(exact).epsilon(1e-12));
  const double a1 = k.sigma * p0 * p1 * p1 * 4 * kKappa1 / (b1 * d);
  const double a3 = a1 + k.sigma * p0 * p1 * p1 * 4 * kKappa2 * b1 / (d * d * d);
  CHECK(xci_approx(0, ch, ctx, 1).value == doctest::Approx(a1).epsilon(1e-12));
  CHECK(xci_approx(0, ch, ctx, 3).value == doctest::Approx(a3).epsilon(1e-12));
  CHECK_FALSE(xci_approx(0, ch, ctx, 1).out_of_range);
}

TEST_CASE("approximations flag ratios beyond the validity range") {
  const auto ctx = two_channel_context(5, 6, 4);
  const std::vector<ChannelState> ch{{1e-3, 0.0, 10e9, 4.0}, {1e-3, 40e9, 50e9, 2.0}};
  CHECK(xci_approx(0, ch, ctx, 1).out_of_range);
}

TEST_CASE("overlapping channels are outside the exact model's domain") {
  const auto ctx = two_channel_context(5, 6, 4);
  const std::vector<ChannelState> ch{{1e-3, 0.0, 40e9, 4.0}, {1e-3, 30e9, 40e9, 2.0}};
  CHECK_THROWS_AS(xci_exact(0, ch, ctx), DomainError);
  CHECK_THROWS_AS(osnr(0, ch, ctx, OsnrMode::exact_model()), DomainError);
}

TEST_CASE("OSNR is signal over the noise sum") {
  const auto ctx = two_channel_context(5, 6, 4);
  const std::vector<ChannelState> ch{{1e-3, 10e9, 20e9, 4.0}, {3e-3, 70e9, 40e9, 2.0}};
  for (auto mode : {OsnrMode::exact_model(), OsnrMode::approx(1), OsnrMode::approx(3)}) {
    const auto n = noise(0, ch, ctx, mode);
    CHECK(osnr(0, ch, ctx, mode).value == doctest::Approx(1e-3 / n.total()));
  }
  // Exact and approximate cross-channel terms converge as channels move apart.
  std::vector<ChannelState> far = ch;
  far[1].frequency = 10e9 + 2000e9;
  const double ex = xci_exact(0, far, ctx);
  CHECK(std::abs(xci_approx(0, far, ctx, 3).value - ex) / ex < 1e-4);
  CHECK(std::abs(xci_approx(0, far, ctx, 1).value - ex) / ex < 1e-3);
}

TEST_CASE("third-order model is closer to the exact kernel than first order") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> ratio(0.05, 1.2);
  for (int k = 0; k < 200; ++k) {
    const double x = ratio(rng);
    const double e = xci_kernel_exact(x);
    CHECK(std::abs(xci_kernel_approx(x, 3) - e) <= std::abs(xci_kernel_approx(x, 1) - e));
  }
}

TEST_CASE("required OSNR fits") {
  const double c = 7.3;
  CHECK(required_osnr(c, ThetaFit::fit1) == doctest::Approx(0.0351 * std::pow(c, 3.292)));
  CHECK(required_osnr(c, ThetaFit::fit2) == doctest::Approx(std::pow(1 + 0.0557 * c, 10.0)));
  CHECK(required_osnr(c, ThetaFit::fit3) == doctest::Approx(std::pow(1 + 0.0557 * c, 9.4691)));
  CHECK(required_osnr(8.0, ThetaFit::table) == 32.6);
  CHECK_THROWS_AS(required_osnr(7.0, ThetaFit::table), InvalidArgument);
  CHECK_THROWS_AS(required_osnr(1.5, ThetaFit::fit1), InvalidArgument);
  CHECK_THROWS_AS(required_osnr(12.5, ThetaFit::fit3), InvalidArgument);
  CHECK(theta_fit(Formulation::gpsa2) == ThetaFit::fit1);
  CHECK(theta_fit(Formulation::gpsa3) == ThetaFit::fit2);
  CHECK(theta_fit(Formulation::gpsa6) == ThetaFit::fit3);
}

TEST_CASE("noise context invariants") {
  auto ctx = two_channel_context(5, 6, 4);
  CHECK_NOTHROW(ctx.check());
  ctx.shared_spans[0][1] = 3;
  CHECK_THROWS_AS(ctx.check(), InvalidArgument);
  ctx = two_channel_context(5, 6, 7);
  CHECK_THROWS_AS(ctx.check(), InvalidArgument);
}
