#pragma once

// Gaussian-noise model of a coherent link: ASE, self- and cross-channel
// nonlinear interference, their posynomial approximations, and posynomial
// fits of the required OSNR versus spectral efficiency.

#include <span>
#include <vector>

#include "eon/model.hpp"

namespace eon::physics {

inline constexpr double kKappa1 = 0.4343;
inline constexpr double kKappa2 = 0.0411;
inline constexpr double kKappa3 = 0.0351;
inline constexpr double kKappa4 = 3.292;
inline constexpr double kKappa5 = 0.0557;
inline constexpr double kKappa6 = 10.0;
inline constexpr double kKappa7 = 9.4691;

/// Largest Delta/d ratio for which the cross-channel approximations hold.
inline constexpr double kApproxValidity = 1.2;

/// Span metrics of a routed request set plus model coefficients.
struct LinkNoiseContext {
  std::vector<int> spans;                     // N_q
  std::vector<std::vector<int>> shared_spans;  // N_{q,i}, symmetric, diagonal N_q
  DerivedConstants coeffs;

  std::size_t size() const { return spans.size(); }
  /// Throws InvalidArgument if the symmetry / bound invariants fail.
  void check() const;
};

struct ChannelState {
  double power = 0.0;       // W
  double frequency = 0.0;   // Hz from the band start
  double bandwidth = 0.0;   // Hz
  double efficiency = 0.0;  // bit/s/Hz
};

/// log10((1 + x/2) / (1 - x/2)); exact form of the cross-channel kernel with
/// x = Delta_i / d_{q,i}.
double xci_kernel_exact(double x);
/// kappa1 x (order 1) or kappa1 x + kappa2 x^3 (order 3).
double xci_kernel_approx(double x, int order);

/// Cross-channel interference on q, exact base-10 form. Throws DomainError
/// when an interacting pair overlaps in frequency.
double xci_exact(std::size_t q, std::span<const ChannelState> ch, const LinkNoiseContext& ctx);

struct ApproxValue {
  double value = 0.0;
  /// Set when some Delta_i/d_{q,i} falls outside (0, 1.2].
  bool out_of_range = false;
};

ApproxValue xci_approx(std::size_t q, std::span<const ChannelState> ch, const LinkNoiseContext& ctx, int order);

double sci_exact(std::size_t q, std::span<const ChannelState> ch, const LinkNoiseContext& ctx);
double sci_approx(std::size_t q, std::span<const ChannelState> ch, const LinkNoiseContext& ctx);
double ase(std::size_t q, std::span<const ChannelState> ch, const LinkNoiseContext& ctx);

struct OsnrMode {
  bool exact = true;
  int order = 1;  // cross-channel order when !exact

  static OsnrMode exact_model() { return {true, 1}; }
  static OsnrMode approx(int order) { return {false, order}; }
};

struct NoiseBreakdown {
  double ase = 0.0;
  double xci = 0.0;
  double sci = 0.0;
  double total() const { return ase + xci + sci; }
};

NoiseBreakdown noise(std::size_t q, std::span<const ChannelState> ch, const LinkNoiseContext& ctx, OsnrMode mode);

struct OsnrValue {
  double value = 0.0;
  /// True when the noise is exactly zero (isolated request with no spans).
  bool infinite = false;
  bool out_of_range = false;
};

OsnrValue osnr(std::size_t q, std::span<const ChannelState> ch, const LinkNoiseContext& ctx, OsnrMode mode);

enum class ThetaFit { table, fit1, fit2, fit3 };

/// Minimum required OSNR (linear). `table` requires a tabulated efficiency;
/// fits require 2 <= c <= 12. Throws InvalidArgument otherwise.
double required_osnr(double c, ThetaFit fit, const ModulationTable& table = ModulationTable::standard());

/// Fit used by a formulation's QoS row.
ThetaFit theta_fit(Formulation f);

}  // namespace eon::physics
