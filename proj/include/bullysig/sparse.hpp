#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace bullysig {

struct SparseEntry {
  std::size_t index = 0;
  double value = 0.0;

  friend bool operator==(const SparseEntry&, const SparseEntry&) = default;
};

// Entries sorted by strictly increasing index.
using SparseVector = std::vector<SparseEntry>;

// Strictly increasing indices, all below `dimension`, finite values.
bool is_well_formed(const SparseVector& x, std::size_t dimension);

double dot(std::span<const double> dense, const SparseVector& x);
double squared_norm(const SparseVector& x);

// dense += scale * x
void axpy(double scale, const SparseVector& x, std::span<double> dense);

// Sum of two sparse vectors; zero sums are kept out.
SparseVector merge_add(const SparseVector& a, const SparseVector& b);

}  // namespace bullysig
