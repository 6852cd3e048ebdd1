#include "oracles.hpp"

#include <cmath>

#include <Eigen/SVD>

#include "zerolm/error.hpp"

namespace zerolm::testing {

double kendall_tau_naive(std::span<const double> x, std::span<const double> y) {
  const std::size_t n = x.size();
  std::int64_t conc = 0, disc = 0, tie_x = 0, tie_y = 0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const double dx = x[i] - x[j];
      const double dy = y[i] - y[j];
      if (dx == 0.0 && dy == 0.0)
        continue;
      if (dx == 0.0)
        ++tie_x;
      else if (dy == 0.0)
        ++tie_y;
      else if ((dx > 0) == (dy > 0))
        ++conc;
      else
        ++disc;
    }
  const double a = static_cast<double>(conc + disc + tie_y); // pairs untied in x
  const double b = static_cast<double>(conc + disc + tie_x); // pairs untied in y
  if (a == 0.0 || b == 0.0)
    throw DegenerateInputError("naive tau: all pairs tied");
  return static_cast<double>(conc - disc) / std::sqrt(a * b);
}

namespace {

std::vector<double> count_ranks(std::span<const double> v) {
  std::vector<double> r(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    double less = 0, equal = 0;
    for (double w : v) {
      less += w < v[i];
      equal += w == v[i];
    }
    r[i] = less + (equal + 1.0) / 2.0;
  }
  return r;
}

} // namespace

double spearman_rho_naive(std::span<const double> x, std::span<const double> y) {
  const auto rx = count_ranks(x);
  const auto ry = count_ranks(y);
  const double n = static_cast<double>(rx.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    mx += rx[i];
    my += ry[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  if (sxx == 0 || syy == 0)
    throw DegenerateInputError("naive rho: constant ranks");
  return sxy / std::sqrt(sxx) / std::sqrt(syy);
}

double capacity_jacobi(const Matrix &m) {
  Eigen::JacobiSVD<Matrix> svd(m);
  const auto &s = svd.singularValues();
  double sum = 0.0;
  for (Eigen::Index i = 0; i < s.size(); ++i)
    sum += s[i] * s[i];
  return sum / static_cast<double>(s.size());
}

std::uint64_t encoder_params(std::uint64_t layers, std::uint64_t hidden, std::uint64_t ffn) {
  return layers * (4 * hidden * hidden + 2 * hidden * ffn);
}

double encoder_tflops(std::uint64_t layers, std::uint64_t hidden, std::uint64_t ffn, std::uint64_t seq) {
  const double p = static_cast<double>(encoder_params(layers, hidden, ffn));
  const double s = static_cast<double>(seq);
  return 2.0 * p * s / 1e12 + 2.0 * static_cast<double>(layers) * s * s * static_cast<double>(hidden) / 1e12;
}

std::vector<std::vector<std::size_t>> peel_fronts(std::span<const Candidate> pop) {
  std::vector<bool> taken(pop.size(), false);
  std::vector<std::vector<std::size_t>> fronts;
  std::size_t left = pop.size();
  while (left > 0) {
    std::vector<std::size_t> front;
    for (std::size_t i = 0; i < pop.size(); ++i) {
      if (taken[i])
        continue;
      bool dominated = false;
      for (std::size_t j = 0; j < pop.size() && !dominated; ++j)
        dominated = !taken[j] && j != i && constrained_dominates(pop[j], pop[i]);
      if (!dominated)
        front.push_back(i);
    }
    for (auto i : front)
      taken[i] = true;
    left -= front.size();
    fronts.push_back(std::move(front));
  }
  return fronts;
}

std::set<std::string> pareto_ids(std::span<const Candidate> all) {
  std::set<std::string> ids;
  for (const auto &c : all) {
    if (!c.feasible())
      continue;
    bool dominated = false;
    for (const auto &d : all) {
      if (!d.feasible())
        continue;
      if (d.proxy >= c.proxy && d.tflops <= c.tflops && (d.proxy > c.proxy || d.tflops < c.tflops)) {
        dominated = true;
        break;
      }
    }
    if (!dominated)
      ids.insert(c.arch.id);
  }
  return ids;
}

} // namespace zerolm::testing
