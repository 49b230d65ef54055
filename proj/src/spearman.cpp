#include <algorithm>
#include <cmath>
#include <numeric>

#include "w2s/harness.hpp"

namespace w2s {

Vec average_ranks(const Vec& x) {
  require_finite(x, "rank input");
  const Index n = x.size();
  std::vector<Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(), [&x](Index a, Index b) { return x(a) < x(b); });
  Vec ranks(n);
  Index i = 0;
  while (i < n) {
    Index j = i;
    while (j + 1 < n && x(order[j + 1]) == x(order[i])) ++j;
    const double rank = 0.5 * static_cast<double>(i + j) + 1.0;
    for (Index t = i; t <= j; ++t) ranks(order[t]) = rank;
    i = j + 1;
  }
  return ranks;
}

double spearman(const Vec& x, const Vec& y) {
  if (x.size() != y.size()) throw Error(Errc::LengthMismatch, "spearman inputs differ in length");
  if (x.size() < 2) throw Error(Errc::ConstantInput, "spearman needs at least two observations");
  const Vec rx = average_ranks(x);
  const Vec ry = average_ranks(y);
  const Vec cx = rx.array() - rx.mean();
  const Vec cy = ry.array() - ry.mean();
  const double sxx = cx.squaredNorm();
  const double syy = cy.squaredNorm();
  if (sxx == 0 || syy == 0) throw Error(Errc::ConstantInput, "spearman input has zero rank variance");
  return std::clamp(cx.dot(cy) / std::sqrt(sxx * syy), -1.0, 1.0);
}

}  // namespace w2s
