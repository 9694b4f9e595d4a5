#include "eon/physics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "eon/error.hpp"

namespace eon::physics {

void LinkNoiseContext::check() const {
  const std::size_t n = spans.size();
  if (shared_spans.size() != n) throw InvalidArgument("shared-span matrix has wrong size");
  for (std::size_t q = 0; q < n; ++q) {
    if (shared_spans[q].size() != n) throw InvalidArgument("shared-span matrix is not square");
    if (shared_spans[q][q] != spans[q]) throw InvalidArgument("shared-span diagonal must equal N_q");
    for (std::size_t i = 0; i < n; ++i) {
      const int v = shared_spans[q][i];
      if (v < 0 || v != shared_spans[i][q] || v > std::min(spans[q], spans[i])) {
        throw InvalidArgument("shared-span matrix violates symmetry or bounds");
      }
    }
  }
}

double xci_kernel_exact(double x) { return std::log10(std::abs((1.0 + 0.5 * x) / (1.0 - 0.5 * x))); }

double xci_kernel_approx(double x, int order) {
  if (order == 1) return kKappa1 * x;
  if (order == 3) return kKappa1 * x + kKappa2 * x * x * x;
  throw InvalidArgument("cross-channel approximation order must be 1 or 3");
}

double xci_exact(std::size_t q, std::span<const ChannelState> ch, const LinkNoiseContext& ctx) {
  const auto& cq = ch[q];
  double sum = 0.0;
  for (std::size_t i = 0; i < ch.size(); ++i) {
    if (i == q) continue;
    const int shared = ctx.shared_spans[q][i];
    if (shared == 0) continue;
    const auto& ci = ch[i];
    const double d = std::abs(cq.frequency - ci.frequency);
    if (!(d > 0.5 * (cq.bandwidth + ci.bandwidth))) {
      throw DomainError("channels " + std::to_string(q) + " and " + std::to_string(i) + " overlap");
    }
    const double kernel = std::log10(std::abs((d + 0.5 * ci.bandwidth) / (d - 0.5 * ci.bandwidth)));
    sum += ci.power * ci.power / (ci.bandwidth * ci.bandwidth) * shared * kernel;
  }
  return ctx.coeffs.sigma * cq.power * sum;
}

ApproxValue xci_approx(std::size_t q, std::span<const ChannelState> ch, const LinkNoiseContext& ctx, int order) {
  if (order != 1 && order != 3) throw InvalidArgument("cross-channel approximation order must be 1 or 3");
  const auto& cq = ch[q];
  ApproxValue out;
  double sum = 0.0;
  for (std::size_t i = 0; i < ch.size(); ++i) {
    if (i == q) continue;
    const int shared = ctx.shared_spans[q][i];
    if (shared == 0) continue;
    const auto& ci = ch[i];
    const double d = std::abs(cq.frequency - ci.frequency);
    if (!(d > 0.0)) throw DomainError("channels " + std::to_string(q) + " and " + std::to_string(i) + " share a carrier");
    if (ci.bandwidth / d > kApproxValidity) out.out_of_range = true;
    // p_i^2 N [k1/(D d) + k2 D/d^3]
    double term = kKappa1 / (ci.bandwidth * d);
    if (order == 3) term += kKappa2 * ci.bandwidth / (d * d * d);
    sum += ci.power * ci.power * shared * term;
  }
  out.value = ctx.coeffs.sigma * cq.power * sum;
  return out;
}

double sci_exact(std::size_t q, std::span<const ChannelState> ch, const LinkNoiseContext& ctx) {
  const auto& c = ch[q];
  if (!(c.bandwidth > 0.0)) throw InvalidArgument("bandwidth must be positive");
  const double p3 = c.power * c.power * c.power;
  return ctx.coeffs.sigma * ctx.spans[q] * p3 / (c.bandwidth * c.bandwidth) *
         std::asinh(ctx.coeffs.iota * c.bandwidth * c.bandwidth);
}

double sci_approx(std::size_t q, std::span<const ChannelState> ch, const LinkNoiseContext& ctx) {
  const double p = ch[q].power;
  return ctx.coeffs.sigma * ctx.coeffs.iota * ctx.spans[q] * p * p * p;
}

double ase(std::size_t q, std::span<const ChannelState> ch, const LinkNoiseContext& ctx) {
  return ctx.coeffs.zeta * ctx.spans[q] * ch[q].bandwidth;
}

NoiseBreakdown noise(std::size_t q, std::span<const ChannelState> ch, const LinkNoiseContext& ctx, OsnrMode mode) {
  NoiseBreakdown n;
  n.ase = ase(q, ch, ctx);
  if (mode.exact) {
    n.xci = xci_exact(q, ch, ctx);
    n.sci = sci_exact(q, ch, ctx);
  } else {
    n.xci = xci_approx(q, ch, ctx, mode.order).value;
    n.sci = sci_approx(q, ch, ctx);
  }
  return n;
}

OsnrValue osnr(std::size_t q, std::span<const ChannelState> ch, const LinkNoiseContext& ctx, OsnrMode mode) {
  OsnrValue out;
  double x = 0.0;
  if (mode.exact) {
    x = xci_exact(q, ch, ctx);
  } else {
    const auto a = xci_approx(q, ch, ctx, mode.order);
    x = a.value;
    out.out_of_range = a.out_of_range;
  }
  const double y = mode.exact ? sci_exact(q, ch, ctx) : sci_approx(q, ch, ctx);
  const double denom = ase(q, ch, ctx) + x + y;
  if (denom == 0.0) {
    out.infinite = true;
    out.value = std::numeric_limits<double>::infinity();
  } else {
    out.value = ch[q].power / denom;
  }
  return out;
}

double required_osnr(double c, ThetaFit fit, const ModulationTable& table) {
  if (fit == ThetaFit::table) {
    const auto v = table.required_osnr(c);
    if (!v) throw InvalidArgument("spectral efficiency " + std::to_string(c) + " is not tabulated");
    return *v;
  }
  if (!(c >= 2.0 - 1e-12 && c <= 12.0 + 1e-12)) {
    throw InvalidArgument("spectral efficiency outside the fit range [2, 12]");
  }
  switch (fit) {
    case ThetaFit::fit1: return kKappa3 * std::pow(c, kKappa4);
    case ThetaFit::fit2: return std::pow(1.0 + kKappa5 * c, kKappa6);
    case ThetaFit::fit3: return std::pow(1.0 + kKappa5 * c, kKappa7);
    case ThetaFit::table: break;
  }
  return 0.0;
}

ThetaFit theta_fit(Formulation f) {
  switch (f) {
    case Formulation::gpsa1:
    case Formulation::gpsa2: return ThetaFit::fit1;
    case Formulation::gpsa3:
    case Formulation::gpsa4: return ThetaFit::fit2;
    case Formulation::gpsa5:
    case Formulation::gpsa6: return ThetaFit::fit3;
  }
  return ThetaFit::fit1;
}

}  // namespace eon::physics
