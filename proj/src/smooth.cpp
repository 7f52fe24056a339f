#include "bpdo/smooth.hpp"

#include <cmath>
#include <vector>

namespace bpdo {

double bump_profile(double t) {
  if (std::abs(t) >= 1.0) return 0.0;
  return std::exp(1.0 - 1.0 / (1.0 - t * t));
}

namespace {

struct GaussLegendre {
  std::vector<double> node, weight;
  explicit GaussLegendre(int n) : node(n), weight(n) {
    for (int i = 0; i < n; ++i) {
      // Newton iteration from the Chebyshev-like initial guess.
      double x = std::cos(pi * (i + 0.75) / (n + 0.5));
      for (int it = 0; it < 64; ++it) {
        double p0 = 1.0, p1 = x;
        for (int k = 2; k <= n; ++k) {
          double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
          p0 = p1;
          p1 = p2;
        }
        double dp = n * (x * p1 - p0) / (x * x - 1.0);
        double dx = p1 / dp;
        x -= dx;
        if (std::abs(dx) < 1e-16) break;
      }
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      double dp = n * (x * p1 - p0) / (x * x - 1.0);
      node[i] = x;
      weight[i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
  }
};

const GaussLegendre& gl96() {
  static const GaussLegendre g(96);
  return g;
}

// Integral of bump_profile over [-1, u] by Gauss-Legendre on the mapped
// interval; smooth in u and exactly 0 at u = -1.
double bump_integral(double u) {
  if (u <= -1.0) return 0.0;
  if (u > 1.0) u = 1.0;
  const auto& g = gl96();
  double half = 0.5 * (u + 1.0);
  double mid = 0.5 * (u - 1.0);
  double acc = 0.0;
  for (std::size_t i = 0; i < g.node.size(); ++i)
    acc += g.weight[i] * bump_profile(mid + half * g.node[i]);
  return acc * half;
}

double bump_total() {
  static const double total = bump_integral(1.0);
  return total;
}

}  // namespace

double transition01(double s) {
  if (s <= 0.0) return 0.0;
  if (s >= 1.0) return 1.0;
  return bump_integral(2.0 * s - 1.0) / bump_total();
}

double cutoff_one_zero(double r, double r1, double r2) {
  return 1.0 - transition01((r - r1) / (r2 - r1));
}

double leibniz_phi(double r) {
  if (r <= 0.5) return 1.0;
  if (r >= 2.0) return 0.0;
  double t = std::log(r);
  double a = transition01(std::abs(t) / std::log(2.0));
  if (t < 0.0) a = -a;
  return 0.5 * (1.0 - a);
}

}  // namespace bpdo
