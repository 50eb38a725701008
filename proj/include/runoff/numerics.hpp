#pragma once

#include <cstddef>
#include <functional>
#include <span>

namespace runoff {

/// Gamma(shape, rate) law of one coordinate in the Gamma representation of a
/// Dirichlet vector. Construction validates shape > 0 and rate > 0.
class GammaMarginal {
 public:
  GammaMarginal(double shape, double rate);

  double shape() const noexcept { return shape_; }
  double rate() const noexcept { return rate_; }
  double mean() const noexcept { return shape_ / rate_; }

  friend bool operator==(const GammaMarginal&, const GammaMarginal&) = default;

 private:
  double shape_;
  double rate_;
};

struct QuadratureSpec {
  double abs_tol = 1e-10;
  double rel_tol = 1e-8;
  int max_subdivisions = 200;

  /// Throws DomainError unless tolerances are non-negative, at least one is
  /// positive, and max_subdivisions >= 1.
  void validate() const;
};

struct QuadratureResult {
  double value = 0.0;
  double abs_error = 0.0;
  int subdivisions = 0;
};

using Integrand = std::function<double(double)>;

// Special functions ---------------------------------------------------------

/// ln Gamma(x) for x > 0. Lanczos for small arguments, Stirling series above.
double log_gamma(double x);

/// Regularized lower incomplete gamma P(a, x).
double incomplete_gamma_p(double a, double x);
/// Regularized upper incomplete gamma Q(a, x), evaluated directly.
double incomplete_gamma_q(double a, double x);
/// ln P(a, x) without underflow of the prefactor; -inf when x <= 0.
double log_incomplete_gamma_p(double a, double x);
/// ln Q(a, x) without underflow of the prefactor; 0 when x <= 0.
double log_incomplete_gamma_q(double a, double x);

// Gamma distribution --------------------------------------------------------

double gamma_cdf(const GammaMarginal& g, double u);
double gamma_sf(const GammaMarginal& g, double u);
double gamma_log_cdf(const GammaMarginal& g, double u);
double gamma_log_sf(const GammaMarginal& g, double u);
double gamma_log_pdf(const GammaMarginal& g, double u);
double gamma_quantile(const GammaMarginal& g, double p);

// Log-argument variants. They take ln(u) instead of u so that arguments far
// below the smallest representable double (tiny shapes make the CDF move
// there) keep their mass. The rank kernels integrate in t = ln(u).
double gamma_log_cdf_at_log(const GammaMarginal& g, double log_u);
double gamma_log_sf_at_log(const GammaMarginal& g, double log_u);
double gamma_log_pdf_at_log(const GammaMarginal& g, double log_u);
/// ln of gamma_quantile(g, p); finite even when the quantile underflows.
double gamma_log_quantile(const GammaMarginal& g, double p);

// Quadrature ----------------------------------------------------------------

/// Globally adaptive 15-point Gauss-Kronrod quadrature on [lo, hi]. The
/// interval with the largest error estimate is bisected until the total
/// estimate falls below max(abs_tol, rel_tol * |value|).
///
/// Throws ConvergenceError (with the best estimate attached) when
/// max_subdivisions is exhausted first.
QuadratureResult integrate(const Integrand& f, double lo, double hi,
                           const QuadratureSpec& spec = {});

/// Same as integrate(), seeded with an initial partition at the given sorted
/// breakpoints (first and last are the integration limits). Breakpoints
/// count against max_subdivisions.
QuadratureResult integrate(const Integrand& f, std::span<const double> breakpoints,
                           const QuadratureSpec& spec = {});

}  // namespace runoff
