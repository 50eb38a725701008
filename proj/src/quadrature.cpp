#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <queue>
#include <string>
#include <vector>

#include "runoff/error.hpp"
#include "runoff/numerics.hpp"

namespace runoff {

namespace {

// QUADPACK qk15 abscissae and weights. xgk[1], xgk[3], xgk[5] are the
// 7-point Gauss nodes; xgk[7] is the centre.
constexpr std::array<double, 8> kXgk = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144838258730, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
constexpr std::array<double, 8> kWgk = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr std::array<double, 4> kWg = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Segment {
  double lo;
  double hi;
  double value;
  double error;

  bool operator<(const Segment& other) const { return error < other.error; }
};

double checked(const Integrand& f, double x) {
  const double y = f(x);
  if (!std::isfinite(y)) {
    throw DomainError("integrate: integrand is not finite at x = " + std::to_string(x));
  }
  return y;
}

Segment kronrod15(const Integrand& f, double lo, double hi) {
  const double centre = 0.5 * (lo + hi);
  const double half = 0.5 * (hi - lo);
  const double abs_half = std::fabs(half);

  std::array<double, 7> left{};
  std::array<double, 7> right{};
  const double fc = checked(f, centre);
  double gauss = fc * kWg[3];
  double kronrod = fc * kWgk[7];
  double res_abs = std::fabs(kronrod);

  for (int j = 0; j < 7; ++j) {
    const double offset = half * kXgk[j];
    left[j] = checked(f, centre - offset);
    right[j] = checked(f, centre + offset);
    const double sum = left[j] + right[j];
    kronrod += kWgk[j] * sum;
    res_abs += kWgk[j] * (std::fabs(left[j]) + std::fabs(right[j]));
    if (j % 2 == 1) gauss += kWg[j / 2] * sum;
  }

  const double mean = 0.5 * kronrod;
  double res_asc = kWgk[7] * std::fabs(fc - mean);
  for (int j = 0; j < 7; ++j) {
    res_asc += kWgk[j] * (std::fabs(left[j] - mean) + std::fabs(right[j] - mean));
  }
  res_abs *= abs_half;
  res_asc *= abs_half;

  double error = std::fabs((kronrod - gauss) * half);
  if (res_asc != 0.0 && error != 0.0) {
    error = res_asc * std::min(1.0, std::pow(200.0 * error / res_asc, 1.5));
  }
  constexpr double kEps = std::numeric_limits<double>::epsilon();
  constexpr double kUnderflow = std::numeric_limits<double>::min();
  if (res_abs > kUnderflow / (50.0 * kEps)) error = std::max(50.0 * kEps * res_abs, error);

  return {lo, hi, kronrod * half, error};
}

}  // namespace

void QuadratureSpec::validate() const {
  if (!(abs_tol >= 0.0) || !(rel_tol >= 0.0)) {
    throw DomainError("QuadratureSpec: tolerances must be non-negative");
  }
  if (abs_tol == 0.0 && rel_tol == 0.0) {
    throw DomainError("QuadratureSpec: at least one tolerance must be positive");
  }
  if (max_subdivisions < 1) {
    throw DomainError("QuadratureSpec: max_subdivisions must be at least 1");
  }
}

QuadratureResult integrate(const Integrand& f, double lo, double hi,
                           const QuadratureSpec& spec) {
  const std::array<double, 2> limits{lo, hi};
  return integrate(f, limits, spec);
}

QuadratureResult integrate(const Integrand& f, std::span<const double> breakpoints,
                           const QuadratureSpec& spec) {
  spec.validate();
  if (breakpoints.size() < 2) {
    throw DomainError("integrate: need at least the two integration limits");
  }
  for (std::size_t k = 0; k < breakpoints.size(); ++k) {
    if (!std::isfinite(breakpoints[k])) {
      throw DomainError("integrate: limits must be finite");
    }
    if (k > 0 && !(breakpoints[k - 1] < breakpoints[k])) {
      throw DomainError("integrate: limits must be strictly increasing");
    }
  }

  std::priority_queue<Segment> heap;
  double value = 0.0;
  double error = 0.0;
  for (std::size_t k = 1; k < breakpoints.size(); ++k) {
    const Segment s = kronrod15(f, breakpoints[k - 1], breakpoints[k]);
    value += s.value;
    error += s.error;
    heap.push(s);
  }

  auto tolerance = [&] { return std::max(spec.abs_tol, spec.rel_tol * std::fabs(value)); };
  int subdivisions = static_cast<int>(heap.size());

  while (error > tolerance()) {
    if (subdivisions >= spec.max_subdivisions) {
      throw ConvergenceError("integrate: tolerance not met after " +
                                 std::to_string(subdivisions) +
                                 " subintervals (error estimate " + std::to_string(error) + ")",
                             value, error);
    }
    const Segment worst = heap.top();
    const double mid = 0.5 * (worst.lo + worst.hi);
    if (!(mid > worst.lo && mid < worst.hi)) {
      throw ConvergenceError("integrate: subinterval cannot be bisected further", value, error);
    }
    heap.pop();
    const Segment left = kronrod15(f, worst.lo, mid);
    const Segment right = kronrod15(f, mid, worst.hi);
    value += left.value + right.value - worst.value;
    error += left.error + right.error - worst.error;
    heap.push(left);
    heap.push(right);
    ++subdivisions;
  }

  // Re-sum to shed the drift of the incremental updates.
  value = 0.0;
  error = 0.0;
  std::vector<Segment> parts;
  parts.reserve(heap.size());
  while (!heap.empty()) {
    parts.push_back(heap.top());
    heap.pop();
  }
  std::sort(parts.begin(), parts.end(),
            [](const Segment& a, const Segment& b) { return a.lo < b.lo; });
  for (const Segment& s : parts) {
    value += s.value;
    error += s.error;
  }
  return {value, error, subdivisions};
}

}  // namespace runoff
