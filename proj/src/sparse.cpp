#include "bullysig/sparse.hpp"

#include <cmath>

namespace bullysig {

bool is_well_formed(const SparseVector& x, std::size_t dimension) {
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i].index >= dimension || !std::isfinite(x[i].value)) return false;
    if (i > 0 && x[i - 1].index >= x[i].index) return false;
  }
  return true;
}

double dot(std::span<const double> dense, const SparseVector& x) {
  double s = 0.0;
  for (const auto& e : x) s += dense[e.index] * e.value;
  return s;
}

double squared_norm(const SparseVector& x) {
  double s = 0.0;
  for (const auto& e : x) s += e.value * e.value;
  return s;
}

void axpy(double scale, const SparseVector& x, std::span<double> dense) {
  for (const auto& e : x) dense[e.index] += scale * e.value;
}

SparseVector merge_add(const SparseVector& a, const SparseVector& b) {
  SparseVector out;
  out.reserve(a.size() + b.size());
  std::size_t i = 0;
  std::size_t j = 0;
  while (i < a.size() || j < b.size()) {
    SparseEntry e;
    if (j == b.size() || (i < a.size() && a[i].index < b[j].index)) {
      e = a[i++];
    } else if (i == a.size() || b[j].index < a[i].index) {
      e = b[j++];
    } else {
      e = {a[i].index, a[i].value + b[j].value};
      ++i;
      ++j;
    }
    if (e.value != 0.0) out.push_back(e);
  }
  return out;
}

}  // namespace bullysig
