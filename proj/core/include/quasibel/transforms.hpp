#pragma once

#include <optional>

#include "quasibel/geometry.hpp"
#include "quasibel/grid.hpp"
#include "quasibel/moebius.hpp"

namespace qbel {

enum class OperatorFamily {
  Cauchy,
  Beurling,
  CauchyM,
  BeurlingM,
  StripCauchy,
  StripBeurling,
  DomainCauchyM,
  DomainBeurlingM,
  Zero,  // test hook: the zero kernel
};

enum class Backend { Auto, Fft, Direct };

/// A singular integral operator instance. m is the counter-term order;
/// m = 0 is only legal for the plain families. Strip families require strip
/// geometry; domain families additionally need a ReflectionRule at apply time.
struct OperatorSpec {
  OperatorFamily family = OperatorFamily::Cauchy;
  int m = 0;
  DomainGeometry geometry = DomainGeometry::plane();
  Backend backend = Backend::Auto;

  OperatorSpec() = default;
  OperatorSpec(OperatorFamily fam, int m_, DomainGeometry geom, Backend bk = Backend::Auto);
};

/// Dispatches to the family-specific operation below.
SampledField apply_operator(const OperatorSpec& spec, const SampledField& f,
                            const std::optional<ReflectionRule>& rule = std::nullopt);

// Plane transforms. Both backends evaluate the same discrete operator, whose
// convolution kernel is synthesized from the analytic Fourier symbol on a
// 4x zero-padded lattice (see core/src/transforms.cpp for the construction
// notes). fft multiplies in the Fourier domain; direct convolves the cached
// real-space kernel table.
SampledField cauchy(const SampledField& f, Backend backend = Backend::Auto);
SampledField beurling(const SampledField& f, Backend backend = Backend::Auto);

// Counter-term disk transforms, kernel factor ((1-|zeta|^2)/(1-conj(zeta) z))^m.
// m = 0 delegates to the plain transforms. Direct scattered summation with
// exact near-diagonal cell integrals of the singular factor.
SampledField cauchy_m(const SampledField& f, int m);
SampledField beurling_m(const SampledField& f, int m);

// Periodic strip transforms (kernel e^zeta / (e^zeta - e^tau) and its
// zeta-derivative).
SampledField strip_cauchy(const SampledField& f, Backend backend = Backend::Auto);
SampledField strip_beurling(const SampledField& f, Backend backend = Backend::Auto);

// Domain transforms with reflection point (P_m / T_m). For quasidisk
// geometry the field lives on the pullback chart grid over D and quadrature
// uses the chart Jacobian weights.
SampledField domain_cauchy_m(const SampledField& f, const DomainGeometry& geometry,
                             const ReflectionRule& rule, int m);
SampledField domain_beurling_m(const SampledField& f, const DomainGeometry& geometry,
                               const ReflectionRule& rule, int m);

// Spectral derivatives on the padded lattice (smooth compactly supported
// fields; strip fields are phi-periodic and xi-padded).
SampledField spectral_dz(const SampledField& f);
SampledField spectral_dzbar(const SampledField& f);

// Centered finite differences (order 2 or 4), one-sided within two cells of
// the lattice edge. Strip grids wrap around in phi.
SampledField fd_dz(const SampledField& f, int order = 2);
SampledField fd_dzbar(const SampledField& f, int order = 2);

/// Exact integrals of the Cauchy and Beurling kernels over lattice cells,
/// used by the scattered-sum engine near the diagonal and by test oracles:
///   cell_integral_cauchy(d)   = (1/pi)  Int_{unit cell at offset d} dA/(d - t)
///   cell_integral_beurling(d) = (-1/pi) Int_{unit cell at offset d} dA/(d - t)^2
/// Offsets are in cell units; the diagonal (0,0) principal value is 0.
Complex cell_integral_cauchy(int dx, int dy);
Complex cell_integral_beurling(int dx, int dy);

}  // namespace qbel
