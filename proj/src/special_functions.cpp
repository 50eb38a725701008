#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "runoff/error.hpp"
#include "runoff/numerics.hpp"

namespace runoff {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kLnSqrt2Pi = 0.91893853320467274178032973640562;

// Godfrey's g = 7, n = 9 Lanczos coefficients.
constexpr double kLanczosG = 7.0;
constexpr double kLanczos[9] = {
    0.99999999999980993227684700473478, 676.520368121885098567009190444019,
    -1259.13921672240287047156078755283, 771.3234287776530788486528258894,
    -176.61502916214059906584551354,     12.507343278686904814458936853,
    -0.13857109526572011689554707,       9.984369578019570859563e-6,
    1.50563273514931155834e-7};

// ln Gamma(x) - [(x - 1/2) ln x - x + ln sqrt(2 pi)], valid for x >= 10.
double stirling_correction(double x) {
  const double r = 1.0 / x;
  const double r2 = r * r;
  return r * (1.0 / 12 +
              r2 * (-1.0 / 360 +
                    r2 * (1.0 / 1260 +
                          r2 * (-1.0 / 1680 +
                                r2 * (1.0 / 1188 +
                                      r2 * (-691.0 / 360360 + r2 * (1.0 / 156)))))));
}

double lanczos_log_gamma(double x) {
  const double z = x - 1.0;
  double sum = kLanczos[0];
  for (int k = 1; k < 9; ++k) sum += kLanczos[k] / (z + k);
  const double t = z + kLanczosG + 0.5;
  return kLnSqrt2Pi + (z + 0.5) * std::log(t) - t + std::log(sum);
}

// ln(x^a e^{-x} / Gamma(a)). For large a the Stirling form keeps the
// cancellation between a ln x, x and ln Gamma(a) out of the result.
double log_prefix(double a, double x, double log_x) {
  if (a < 10.0) return a * log_x - x - log_gamma(a);
  const double d = (x - a) / a;
  const double body = std::fabs(d) < 0.5 ? a * (std::log1p(d) - d)
                                          : a * (log_x - std::log(a)) + a - x;
  return body + 0.5 * std::log(a) - kLnSqrt2Pi - stirling_correction(a);
}

int iteration_cap(double a) { return 10000 + static_cast<int>(50.0 * std::sqrt(a)); }

struct LogPQ {
  double log_p;
  double log_q;
};

// Series for P when x < a + 1, Lentz continued fraction for Q otherwise. The
// complement always comes from the same evaluation, so P + Q = 1 to rounding.
LogPQ log_pq(double a, double x, double log_x) {
  if (!(x > 0.0) && log_x == -kInf) return {-kInf, 0.0};
  if (x == kInf) return {0.0, -kInf};

  const double lp = log_prefix(a, x, log_x);
  const int cap = iteration_cap(a);

  if (x < a + 1.0) {
    double sum = 1.0;
    double term = 1.0;
    for (int n = 1; n < cap; ++n) {
      term *= x / (a + n);
      sum += term;
      if (term < sum * kEps) break;
    }
    const double log_p = lp - std::log(a) + std::log(sum);
    return {log_p, std::log1p(-std::exp(log_p))};
  }

  constexpr double kTiny = 1e-300;
  double b = x + 1.0 - a;
  double c = 1.0 / kTiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < cap; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = b + an / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::fabs(delta - 1.0) < kEps) break;
  }
  const double log_q = lp + std::log(h);
  return {std::log1p(-std::exp(log_q)), log_q};
}

void require_shape(double a) {
  if (!(a > 0.0) || !std::isfinite(a)) {
    throw DomainError("incomplete gamma: shape must be positive and finite, got " +
                      std::to_string(a));
  }
}

LogPQ standard_log_pq(double a, double x) {
  require_shape(a);
  if (std::isnan(x)) throw DomainError("incomplete gamma: argument is NaN");
  if (x <= 0.0) return {-kInf, 0.0};
  return log_pq(a, x, std::log(x));
}

// Distribution functions of g at u = exp(log_u), via x = rate * u.
LogPQ marginal_log_pq(const GammaMarginal& g, double log_u) {
  if (std::isnan(log_u)) throw DomainError("gamma distribution: argument is NaN");
  const double log_x = log_u + std::log(g.rate());
  return log_pq(g.shape(), std::exp(log_x), log_x);
}

double require_finite(double u, const char* what) {
  if (!std::isfinite(u)) {
    throw DomainError(std::string(what) + ": argument must be finite");
  }
  return u;
}

}  // namespace

GammaMarginal::GammaMarginal(double shape, double rate) : shape_(shape), rate_(rate) {
  if (!(shape > 0.0) || !std::isfinite(shape)) {
    throw DomainError("GammaMarginal: shape must be positive, got " + std::to_string(shape));
  }
  if (!(rate > 0.0) || !std::isfinite(rate)) {
    throw DomainError("GammaMarginal: rate must be positive, got " + std::to_string(rate));
  }
}

double log_gamma(double x) {
  if (!(x > 0.0) || !std::isfinite(x)) {
    throw DomainError("log_gamma: argument must be positive and finite, got " +
                      std::to_string(x));
  }
  if (x == 1.0 || x == 2.0) return 0.0;
  if (x < 0.5) return lanczos_log_gamma(x + 1.0) - std::log(x);
  if (x < 10.0) return lanczos_log_gamma(x);
  return (x - 0.5) * std::log(x) - x + kLnSqrt2Pi + stirling_correction(x);
}

double incomplete_gamma_p(double a, double x) {
  return std::exp(standard_log_pq(a, x).log_p);
}

double incomplete_gamma_q(double a, double x) {
  return std::exp(standard_log_pq(a, x).log_q);
}

double log_incomplete_gamma_p(double a, double x) { return standard_log_pq(a, x).log_p; }

double log_incomplete_gamma_q(double a, double x) { return standard_log_pq(a, x).log_q; }

double gamma_cdf(const GammaMarginal& g, double u) {
  return incomplete_gamma_p(g.shape(), g.rate() * require_finite(u, "gamma_cdf"));
}

double gamma_sf(const GammaMarginal& g, double u) {
  return incomplete_gamma_q(g.shape(), g.rate() * require_finite(u, "gamma_sf"));
}

double gamma_log_cdf(const GammaMarginal& g, double u) {
  return log_incomplete_gamma_p(g.shape(), g.rate() * require_finite(u, "gamma_log_cdf"));
}

double gamma_log_sf(const GammaMarginal& g, double u) {
  return log_incomplete_gamma_q(g.shape(), g.rate() * require_finite(u, "gamma_log_sf"));
}

double gamma_log_pdf(const GammaMarginal& g, double u) {
  if (!(u > 0.0) || !std::isfinite(u)) {
    throw DomainError("gamma_log_pdf: argument must be positive and finite");
  }
  return gamma_log_pdf_at_log(g, std::log(u));
}

double gamma_log_cdf_at_log(const GammaMarginal& g, double log_u) {
  return marginal_log_pq(g, log_u).log_p;
}

double gamma_log_sf_at_log(const GammaMarginal& g, double log_u) {
  return marginal_log_pq(g, log_u).log_q;
}

double gamma_log_pdf_at_log(const GammaMarginal& g, double log_u) {
  if (std::isnan(log_u)) throw DomainError("gamma_log_pdf: argument is NaN");
  if (log_u == kInf) return -kInf;
  if (log_u == -kInf) {
    if (g.shape() == 1.0) return std::log(g.rate());
    return g.shape() < 1.0 ? kInf : -kInf;
  }
  // rate * x^{a-1} e^{-x} / Gamma(a) with x = rate * u
  const double log_x = log_u + std::log(g.rate());
  return std::log(g.rate()) + log_prefix(g.shape(), std::exp(log_x), log_x) - log_x;
}

double gamma_log_quantile(const GammaMarginal& g, double p) {
  if (!(p > 0.0 && p < 1.0)) {
    throw DomainError("gamma_quantile: probability must lie in (0, 1), got " +
                      std::to_string(p));
  }
  const double a = g.shape();
  const bool lower_tail = p <= 0.5;
  const double log_target = lower_tail ? std::log(p) : std::log1p(-p);

  // Solve in t = ln x for the standard Gamma(a, 1); the residual is increasing.
  struct Eval {
    double residual;
    double slope;
  };
  auto eval = [&](double t) -> Eval {
    const double x = std::exp(t);
    const LogPQ pq = log_pq(a, x, t);
    const double lp = log_prefix(a, x, t);
    if (lower_tail) return {pq.log_p - log_target, std::exp(lp - pq.log_p)};
    return {log_target - pq.log_q, std::exp(lp - pq.log_q)};
  };

  // Small-x asymptote P ~ x^a / Gamma(a+1) gives a good lower-tail start.
  double t = std::log(a);
  if (lower_tail) t = std::min(t, (std::log(p) + log_gamma(a + 1.0)) / a);

  double lo = t;
  double hi = t;
  for (double step = 1.0; eval(lo).residual > 0.0; step *= 2.0) lo -= step;
  for (double step = 1.0; eval(hi).residual < 0.0; step *= 2.0) hi += step;

  t = 0.5 * (lo + hi);
  for (int iter = 0; iter < 200; ++iter) {
    const Eval e = eval(t);
    if (e.residual == 0.0) break;
    if (e.residual < 0.0) lo = t; else hi = t;

    double next = t - e.residual / e.slope;
    if (!(next > lo && next < hi) || !std::isfinite(next)) next = 0.5 * (lo + hi);
    const double step = std::fabs(next - t);
    t = next;
    if (step <= 4.0 * kEps * std::max(1.0, std::fabs(t))) break;
  }
  return t - std::log(g.rate());
}

double gamma_quantile(const GammaMarginal& g, double p) {
  return std::exp(gamma_log_quantile(g, p));
}

}  // namespace runoff
