#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "bullysig/sparse.hpp"

namespace bullysig::linsvm {

enum class Loss { kHinge, kSquaredHinge };
enum class ClassWeight { kNone, kBalanced };

std::string_view to_string(Loss loss);
std::string_view to_string(ClassWeight mode);
std::optional<Loss> parse_loss(std::string_view s);
std::optional<ClassWeight> parse_class_weight(std::string_view s);

struct SvmConfig {
  double C = 1.0;
  Loss loss = Loss::kSquaredHinge;
  ClassWeight class_weight = ClassWeight::kNone;
  double tolerance = 1e-4;
  int max_epochs = 1000;
  std::uint64_t seed = 42;
  // Appends a constant-1 feature (regularized like every other weight).
  bool fit_bias = true;

  // Throws ArgumentError unless C > 0, tolerance > 0 and max_epochs >= 1.
  void validate() const;

  friend bool operator==(const SvmConfig&, const SvmConfig&) = default;
};

struct ClassWeights {
  double positive = 1.0;
  double negative = 1.0;
};

// none -> (1, 1); balanced -> n / (2 n_c). Labels are +1 / -1; a single
// class throws ArgumentError.
ClassWeights class_weights(std::span<const int> labels, ClassWeight mode);

struct LinearModel {
  SvmConfig config;
  std::size_t dimension = 0;     // feature columns, without the bias slot
  std::vector<double> w;         // dimension + 1 entries; last one is the bias weight
  std::uint64_t feature_fingerprint = 0;

  // Training artifacts.
  std::vector<double> alpha;     // one dual variable per training instance
  std::size_t n_positive = 0;
  std::size_t n_negative = 0;
  bool converged = false;
  int epochs = 0;
  double max_violation = 0.0;    // max |projected gradient| at the last full check
  std::vector<double> dual_objective_trace;  // after each epoch, when recorded

  double bias() const { return config.fit_bias ? w.back() : 0.0; }

  std::string to_json() const;
  static LinearModel from_json(std::string_view text);
  void save(const std::string& path) const;
  static LinearModel load(const std::string& path);
};

struct TrainOptions {
  bool record_trace = false;
};

// Dual coordinate descent for the l2-regularized hinge / squared-hinge SVM
//   min_w  1/2 |w|^2 + sum_i C_i xi_i       (hinge)
//   min_w  1/2 |w|^2 + sum_i C_i xi_i^2     (squared hinge)
// with C_i = C * class_weight(y_i). Coordinates are visited in a seeded
// random order each epoch, with LIBLINEAR-style shrinking of bound
// variables. Stops when the largest projected-gradient magnitude over all
// variables drops below config.tolerance, or after max_epochs (then
// converged = false).
LinearModel train(std::span<const SparseVector> xs, std::span<const int> ys, std::size_t dimension,
                  const SvmConfig& config, const TrainOptions& options = {});

// Dual objective D(alpha) = sum alpha_i - 1/2 |sum alpha_i y_i x~_i|^2
// - 1/2 sum alpha_i^2 / (2 C_i) [squared hinge only], where x~ carries the
// bias feature when config.fit_bias is set. This is the quantity the solver
// maximizes.
double dual_objective(std::span<const SparseVector> xs, std::span<const int> ys, std::size_t dimension,
                      const SvmConfig& config, std::span<const double> alpha);

// Per-instance upper bound and diagonal shift of the dual problem.
struct DualTerms {
  std::vector<double> upper;     // C_i (hinge) or +inf
  std::vector<double> diagonal;  // 0 (hinge) or 1 / (2 C_i)
};
DualTerms dual_terms(std::span<const int> ys, const SvmConfig& config);

// w . x + b. Throws ArgumentError for an index outside the model dimension.
double decision(const LinearModel& model, const SparseVector& x);

// +1 if decision > 0, else -1 (an exact 0 goes to the negative class).
int predict(const LinearModel& model, const SparseVector& x);

}  // namespace bullysig::linsvm
