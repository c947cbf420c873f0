#include <algorithm>
#include <cmath>
#include <set>

#include <fmt/format.h>

#include "skintraj/ensemble.hpp"

namespace skintraj {

LogLogFit log_log_fit(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw std::invalid_argument("log_log_fit: size mismatch");
  if (x.size() < 2) throw std::invalid_argument("log_log_fit: need at least 2 points");
  const std::size_t n = x.size();
  std::vector<double> lx(n), ly(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0)) {
      throw std::invalid_argument(fmt::format("log_log_fit: non-positive value at point {}", i));
    }
    lx[i] = std::log(x[i]);
    ly[i] = std::log(y[i]);
  }
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += lx[i];
    my += ly[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
  }
  if (!(sxx > 0.0)) throw std::invalid_argument("log_log_fit: all x values coincide");

  LogLogFit fit;
  fit.n_points = n;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  if (n > 2) {
    double ssr = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double r = ly[i] - (fit.intercept + fit.slope * lx[i]);
      ssr += r * r;
    }
    fit.slope_err = std::sqrt(ssr / static_cast<double>(n - 2) / sxx);
  }
  return fit;
}

CollapseResult collapse_scan(std::span<const CollapsePoint> points) {
  std::set<int> sizes;
  for (const CollapsePoint& p : points) sizes.insert(p.L);
  if (sizes.size() < 3) {
    throw std::invalid_argument(fmt::format("collapse_scan: need >= 3 distinct L, got {}", sizes.size()));
  }

  CollapseResult out;
  for (const CollapsePoint& p : points) {
    if (!std::isfinite(p.S_cl_mean) || p.S_cl_mean < 0.0 || p.L <= 0) {
      throw std::invalid_argument(fmt::format("collapse_scan: invalid point L={} gamma={}", p.L, p.gamma));
    }
    const double L = p.L;
    out.table.push_back({p.L, p.gamma, p.gamma * L, p.S_cl_mean / L, p.S_cl_err / L});
  }
  std::sort(out.table.begin(), out.table.end(), [](const CollapseRow& a, const CollapseRow& b) {
    if (a.x != b.x) return a.x < b.x;
    return a.L < b.L;
  });

  double x_max = 0.0;
  for (const CollapseRow& r : out.table) x_max = std::max(x_max, r.x);
  const double x_min = x_max / 10.0;
  std::vector<double> xs, ys;
  for (const CollapseRow& r : out.table) {
    if (r.x >= x_min * (1.0 - 1e-12) && r.x > 0.0 && r.y > 0.0) {
      xs.push_back(r.x);
      ys.push_back(r.y);
    }
  }
  if (xs.size() < 3) {
    out.refusal = fmt::format("only {} usable points in the tail decade [{}, {}]", xs.size(), x_min, x_max);
    return out;
  }
  TailFit tail;
  tail.loglog = log_log_fit(xs, ys);
  double log_c = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) log_c += std::log(ys[i] * xs[i]);
  tail.c = std::exp(log_c / static_cast<double>(xs.size()));
  tail.x_min = *std::min_element(xs.begin(), xs.end());
  tail.x_max = x_max;
  out.tail = tail;
  return out;
}

ScalingFit scaling_exponent_fit(std::span<const std::pair<int, double>> points) {
  std::set<int> sizes;
  for (const auto& [L, S] : points) {
    if (!(S > 0.0)) throw std::invalid_argument(fmt::format("scaling_exponent_fit: S({}) = {} is not positive", L, S));
    sizes.insert(L);
  }
  if (sizes.size() < 3) throw std::invalid_argument("scaling_exponent_fit: need >= 3 distinct sizes");
  std::vector<double> x, y;
  for (const auto& [L, S] : points) {
    x.push_back(L);
    y.push_back(S);
  }
  const LogLogFit fit = log_log_fit(x, y);
  return {fit.slope, fit.slope_err};
}

}  // namespace skintraj
