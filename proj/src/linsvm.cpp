#include "bullysig/linsvm.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "bullysig/error.hpp"
#include "bullysig/hexid.hpp"
#include "bullysig/random.hpp"

namespace bullysig::linsvm {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// x~_i . w, where x~ appends the constant bias feature.
double augmented_dot(const std::vector<double>& w, const SparseVector& x, std::size_t dimension,
                     bool fit_bias) {
  double s = 0.0;
  for (const auto& e : x) s += w[e.index] * e.value;
  if (fit_bias) s += w[dimension];
  return s;
}

void augmented_axpy(double scale, const SparseVector& x, std::size_t dimension, bool fit_bias,
                    std::vector<double>& w) {
  for (const auto& e : x) w[e.index] += scale * e.value;
  if (fit_bias) w[dimension] += scale;
}

void check_inputs(std::span<const SparseVector> xs, std::span<const int> ys, std::size_t dimension) {
  if (xs.size() != ys.size()) throw ArgumentError("train: instance and label counts differ");
  if (xs.size() < 2) throw ArgumentError("train: at least two instances are required");
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (ys[i] != 1 && ys[i] != -1) throw ArgumentError("train: labels must be +1 or -1");
    if (!is_well_formed(xs[i], dimension))
      throw ArgumentError("train: instance " + std::to_string(i) +
                          " has unsorted, out-of-range or non-finite entries");
  }
}

nlohmann::ordered_json config_json(const SvmConfig& c) {
  nlohmann::ordered_json j;
  j["C"] = c.C;
  j["loss"] = to_string(c.loss);
  j["class_weight"] = to_string(c.class_weight);
  j["tolerance"] = c.tolerance;
  j["max_epochs"] = c.max_epochs;
  j["seed"] = c.seed;
  j["fit_bias"] = c.fit_bias;
  return j;
}

}  // namespace

std::string_view to_string(Loss loss) { return loss == Loss::kHinge ? "hinge" : "squared_hinge"; }

std::string_view to_string(ClassWeight mode) { return mode == ClassWeight::kNone ? "none" : "balanced"; }

std::optional<Loss> parse_loss(std::string_view s) {
  if (s == "hinge") return Loss::kHinge;
  if (s == "squared_hinge") return Loss::kSquaredHinge;
  return std::nullopt;
}

std::optional<ClassWeight> parse_class_weight(std::string_view s) {
  if (s == "none") return ClassWeight::kNone;
  if (s == "balanced") return ClassWeight::kBalanced;
  return std::nullopt;
}

void SvmConfig::validate() const {
  if (!(C > 0.0) || !std::isfinite(C)) throw ArgumentError("SVM penalty C must be a positive finite number");
  if (!(tolerance > 0.0)) throw ArgumentError("SVM tolerance must be positive");
  if (max_epochs < 1) throw ArgumentError("SVM max_epochs must be at least 1");
}

ClassWeights class_weights(std::span<const int> labels, ClassWeight mode) {
  std::size_t pos = 0;
  std::size_t neg = 0;
  for (const int y : labels) (y > 0 ? pos : neg) += 1;
  if (pos == 0 || neg == 0) throw ArgumentError("class weights need both classes present");
  if (mode == ClassWeight::kNone) return {1.0, 1.0};
  const double n = static_cast<double>(labels.size());
  return {n / (2.0 * static_cast<double>(pos)), n / (2.0 * static_cast<double>(neg))};
}

DualTerms dual_terms(std::span<const int> ys, const SvmConfig& config) {
  const auto cw = class_weights(ys, config.class_weight);
  DualTerms t;
  t.upper.resize(ys.size());
  t.diagonal.resize(ys.size());
  for (std::size_t i = 0; i < ys.size(); ++i) {
    const double ci = config.C * (ys[i] > 0 ? cw.positive : cw.negative);
    if (config.loss == Loss::kHinge) {
      t.upper[i] = ci;
      t.diagonal[i] = 0.0;
    } else {
      t.upper[i] = kInf;
      t.diagonal[i] = 1.0 / (2.0 * ci);
    }
  }
  return t;
}

double dual_objective(std::span<const SparseVector> xs, std::span<const int> ys, std::size_t dimension,
                      const SvmConfig& config, std::span<const double> alpha) {
  const auto terms = dual_terms(ys, config);
  std::vector<double> w(dimension + 1, 0.0);
  double linear = 0.0;
  double diag = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    augmented_axpy(alpha[i] * ys[i], xs[i], dimension, config.fit_bias, w);
    linear += alpha[i];
    diag += terms.diagonal[i] * alpha[i] * alpha[i];
  }
  double wn = 0.0;
  for (const double v : w) wn += v * v;
  return linear - 0.5 * wn - 0.5 * diag;
}

LinearModel train(std::span<const SparseVector> xs, std::span<const int> ys, std::size_t dimension,
                  const SvmConfig& config, const TrainOptions& options) {
  config.validate();
  check_inputs(xs, ys, dimension);
  const auto terms = dual_terms(ys, config);  // throws on a single class
  const std::size_t n = xs.size();

  LinearModel model;
  model.config = config;
  model.dimension = dimension;
  model.w.assign(dimension + 1, 0.0);
  model.alpha.assign(n, 0.0);
  for (const int y : ys) (y > 0 ? model.n_positive : model.n_negative) += 1;

  std::vector<double> qd(n);
  for (std::size_t i = 0; i < n; ++i)
    qd[i] = terms.diagonal[i] + squared_norm(xs[i]) + (config.fit_bias ? 1.0 : 0.0);

  auto& w = model.w;
  auto& alpha = model.alpha;
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::size_t active = n;
  double pg_max_old = kInf;
  double pg_min_old = -kInf;
  Rng rng(config.seed);

  // Running dual objective pieces for the optional trace.
  double alpha_sum = 0.0;
  double diag_sum = 0.0;

  for (int epoch = 1; epoch <= config.max_epochs; ++epoch) {
    model.epochs = epoch;
    rng.shuffle(std::span<std::size_t>(order.data(), active));
    double pg_max_new = 0.0;
    double pg_min_new = 0.0;

    for (std::size_t s = 0; s < active; ++s) {
      const std::size_t i = order[s];
      const double yi = ys[i];
      const double g = yi * augmented_dot(w, xs[i], dimension, config.fit_bias) - 1.0 +
                       terms.diagonal[i] * alpha[i];
      const double upper = terms.upper[i];
      double pg = 0.0;
      if (alpha[i] == 0.0) {
        if (g > pg_max_old) {
          std::swap(order[s], order[--active]);
          --s;
          continue;
        }
        if (g < 0.0) pg = g;
      } else if (alpha[i] == upper) {
        if (g < pg_min_old) {
          std::swap(order[s], order[--active]);
          --s;
          continue;
        }
        if (g > 0.0) pg = g;
      } else {
        pg = g;
      }
      pg_max_new = std::max(pg_max_new, pg);
      pg_min_new = std::min(pg_min_new, pg);

      if (std::fabs(pg) > 1e-12) {
        const double old = alpha[i];
        if (qd[i] > 0.0) {
          alpha[i] = std::min(std::max(old - g / qd[i], 0.0), upper);
        } else {
          // Empty instance without bias: the objective is linear in alpha_i.
          alpha[i] = g < 0.0 ? upper : 0.0;
        }
        const double delta = alpha[i] - old;
        if (delta != 0.0) {
          augmented_axpy(delta * yi, xs[i], dimension, config.fit_bias, w);
          alpha_sum += delta;
          diag_sum += terms.diagonal[i] * (alpha[i] * alpha[i] - old * old);
        }
      }
    }

    if (options.record_trace) {
      double wn = 0.0;
      for (const double v : w) wn += v * v;
      model.dual_objective_trace.push_back(alpha_sum - 0.5 * wn - 0.5 * diag_sum);
    }

    const double violation = std::max(pg_max_new, -pg_min_new);
    model.max_violation = violation;
    if (violation < config.tolerance) {
      if (active == n) {
        model.converged = true;
        break;
      }
      // Re-check every variable before declaring convergence.
      active = n;
      pg_max_old = kInf;
      pg_min_old = -kInf;
      continue;
    }
    pg_max_old = pg_max_new <= 0.0 ? kInf : pg_max_new;
    pg_min_old = pg_min_new >= 0.0 ? -kInf : pg_min_new;
  }
  return model;
}

double decision(const LinearModel& model, const SparseVector& x) {
  double s = 0.0;
  for (const auto& e : x) {
    if (e.index >= model.dimension)
      throw ArgumentError("feature index " + std::to_string(e.index) + " outside model dimension " +
                          std::to_string(model.dimension));
    s += model.w[e.index] * e.value;
  }
  return s + model.bias();
}

int predict(const LinearModel& model, const SparseVector& x) { return decision(model, x) > 0.0 ? 1 : -1; }

std::string LinearModel::to_json() const {
  nlohmann::ordered_json j;
  j["format"] = "bullysig-linear-model";
  j["version"] = 1;
  j["feature_fingerprint"] = to_hex(feature_fingerprint);
  j["dimension"] = dimension;
  j["config"] = config_json(config);
  j["n_positive"] = n_positive;
  j["n_negative"] = n_negative;
  j["converged"] = converged;
  j["epochs"] = epochs;
  j["max_violation"] = max_violation;
  j["w"] = w;
  return j.dump();
}

LinearModel LinearModel::from_json(std::string_view text) {
  try {
    const auto j = nlohmann::json::parse(text);
    if (j.value("format", "") != "bullysig-linear-model" || j.value("version", 0) != 1)
      throw ParseError(0, "not a version 1 linear model file");
    LinearModel m;
    m.feature_fingerprint = from_hex(j.at("feature_fingerprint").get<std::string>());
    m.dimension = j.at("dimension").get<std::size_t>();
    const auto& c = j.at("config");
    m.config.C = c.at("C").get<double>();
    const auto loss = parse_loss(c.at("loss").get<std::string>());
    const auto weight = parse_class_weight(c.at("class_weight").get<std::string>());
    if (!loss || !weight) throw ParseError(0, "unknown loss or class weight in model file");
    m.config.loss = *loss;
    m.config.class_weight = *weight;
    m.config.tolerance = c.at("tolerance").get<double>();
    m.config.max_epochs = c.at("max_epochs").get<int>();
    m.config.seed = c.at("seed").get<std::uint64_t>();
    m.config.fit_bias = c.at("fit_bias").get<bool>();
    m.n_positive = j.at("n_positive").get<std::size_t>();
    m.n_negative = j.at("n_negative").get<std::size_t>();
    m.converged = j.at("converged").get<bool>();
    m.epochs = j.at("epochs").get<int>();
    m.max_violation = j.at("max_violation").get<double>();
    m.w = j.at("w").get<std::vector<double>>();
    if (m.w.size() != m.dimension + 1) throw IntegrityError("model weight vector does not match its dimension");
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(0, std::string("malformed model file: ") + e.what());
  }
}

void LinearModel::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path);
  out << to_json() << '\n';
}

LinearModel LinearModel::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return from_json(ss.str());
}

}  // namespace bullysig::linsvm
