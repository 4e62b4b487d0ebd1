#pragma once

#include <algorithm>
#include <numeric>
#include <string>
#include <vector>

#include "airfl/airphy.hpp"
#include "airfl/common.hpp"
#include "airfl/csv.hpp"
#include "airfl/mse_model.hpp"
#include "airfl/optimizer.hpp"
#include "airfl/rng.hpp"
#include "airfl/scenario.hpp"

namespace airfl {

enum class LossFamily { RegularizedQuadratic, MultinomialLogistic, Mlp };
enum class PartitionPlan { Iid, LabelSkew };
enum class Scheme { ErrorFree, StaticPs, Circular, Optimized };

inline std::string scheme_name(Scheme s) {
  switch (s) {
    case Scheme::ErrorFree: return "error-free";
    case Scheme::StaticPs: return "static-ps";
    case Scheme::Circular: return "circular";
    case Scheme::Optimized: return "optimized";
  }
  return "?";
}

inline Scheme scheme_from_name(const std::string& name) {
  if (name == "error-free") return Scheme::ErrorFree;
  if (name == "static-ps") return Scheme::StaticPs;
  if (name == "circular") return Scheme::Circular;
  if (name == "optimized") return Scheme::Optimized;
  throw Error("unknown scheme: " + name +
              " (expected error-free|static-ps|circular|optimized)");
}

struct LearningTask {
  LossFamily loss = LossFamily::MultinomialLogistic;
  PartitionPlan partition = PartitionPlan::Iid;
  int classes_per_device = 5;

  double learning_rate = 0.05;  // eta
  double momentum = 0.5;        // local SGD momentum
  int local_steps = 5;          // mini-batches per round
  int batch_size = 32;
  int rounds = 100;             // T
  bool pure_gradient = false;   // transmit exact local gradients instead

  // Synthetic Gaussian-mixture classification data.
  int num_classes = 10;
  int feature_dim = 15;
  int train_samples = 4000;
  int test_samples = 2000;
  double class_separation = 3.0;

  int hidden_units = 16;  // MLP only

  // Regularized-quadratic task (per-device quadratics with diagonal
  // curvature; exact spectrum, no dataset).
  int quad_dim = 64;
  double quad_curvature_min = 1.0;
  double quad_curvature_max = 4.0;
  double quad_center_scale = 2.0;

  // Trajectory re-optimization cadence in experiments: every round
  // (warm-started) or once on round 0.
  bool reoptimize_every_round = true;

  int model_dim() const {
    switch (loss) {
      case LossFamily::RegularizedQuadratic:
        return quad_dim;
      case LossFamily::MultinomialLogistic:
        return num_classes * (feature_dim + 1);
      case LossFamily::Mlp:
        return hidden_units * (feature_dim + 1) + num_classes * (hidden_units + 1);
    }
    return 0;
  }

  void validate() const {
    require(learning_rate > 0.0, "learning.learning_rate must be > 0");
    require(rounds >= 1, "learning.rounds must be >= 1");
    require(local_steps >= 1, "learning.local_steps must be >= 1");
    require(batch_size >= 1, "learning.batch_size must be >= 1");
    const int d = model_dim();
    require(d >= 2 && d % 2 == 0,
            "learning: model dimension " + std::to_string(d) + " must be even");
    if (loss != LossFamily::RegularizedQuadratic) {
      require(num_classes >= 2, "learning.num_classes must be >= 2");
      require(feature_dim >= 1, "learning.feature_dim must be >= 1");
      require(train_samples >= 1 && test_samples >= 1,
              "learning: train/test sample counts must be >= 1");
      require(classes_per_device >= 1 && classes_per_device <= num_classes,
              "learning.classes_per_device must be in [1, num_classes]");
    }
  }
};

inline LearningTask task_from_json(const nlohmann::json& root) {
  LearningTask t;
  if (!root.contains("learning")) {
    t.validate();
    return t;
  }
  const auto& j = root.at("learning");
  if (j.contains("loss")) {
    const std::string s = j.at("loss").get<std::string>();
    if (s == "quadratic") t.loss = LossFamily::RegularizedQuadratic;
    else if (s == "logistic") t.loss = LossFamily::MultinomialLogistic;
    else if (s == "mlp") t.loss = LossFamily::Mlp;
    else throw Error("learning.loss: unknown family " + s);
  }
  if (j.contains("partition")) {
    const std::string s = j.at("partition").get<std::string>();
    if (s == "iid") t.partition = PartitionPlan::Iid;
    else if (s == "label-skew") t.partition = PartitionPlan::LabelSkew;
    else throw Error("learning.partition: expected iid or label-skew");
  }
  const auto geti = [&](const char* key, int fallback) {
    return j.contains(key) ? j.at(key).get<int>() : fallback;
  };
  const auto getd = [&](const char* key, double fallback) {
    return j.contains(key) ? j.at(key).get<double>() : fallback;
  };
  t.classes_per_device = geti("classes_per_device", t.classes_per_device);
  t.learning_rate = getd("learning_rate", t.learning_rate);
  t.momentum = getd("momentum", t.momentum);
  t.local_steps = geti("local_steps", t.local_steps);
  t.batch_size = geti("batch_size", t.batch_size);
  t.rounds = geti("rounds", t.rounds);
  t.pure_gradient = j.contains("pure_gradient") ? j.at("pure_gradient").get<bool>()
                                                : t.pure_gradient;
  t.num_classes = geti("num_classes", t.num_classes);
  t.feature_dim = geti("feature_dim", t.feature_dim);
  t.train_samples = geti("train_samples", t.train_samples);
  t.test_samples = geti("test_samples", t.test_samples);
  t.class_separation = getd("class_separation", t.class_separation);
  t.hidden_units = geti("hidden_units", t.hidden_units);
  t.quad_dim = geti("quad_dim", t.quad_dim);
  t.quad_curvature_min = getd("quad_curvature_min", t.quad_curvature_min);
  t.quad_curvature_max = getd("quad_curvature_max", t.quad_curvature_max);
  t.quad_center_scale = getd("quad_center_scale", t.quad_center_scale);
  if (j.contains("reoptimize")) {
    const std::string s = j.at("reoptimize").get<std::string>();
    if (s == "every_round") t.reoptimize_every_round = true;
    else if (s == "once") t.reoptimize_every_round = false;
    else throw Error("learning.reoptimize: expected every_round or once");
  }
  t.validate();
  return t;
}

// ---------------------------------------------------------------------------
// Synthetic data and partitions
// ---------------------------------------------------------------------------

struct Dataset {
  Eigen::MatrixXd features;  // F x Q
  std::vector<int> labels;   // Q

  int size() const { return static_cast<int>(labels.size()); }
};

// Class centers on a seeded sphere of radius `separation`.
inline Eigen::MatrixXd make_class_means(int classes, int feature_dim,
                                        double separation, std::uint64_t seed) {
  require(classes >= 2 && feature_dim >= 1, "make_class_means: bad sizes");
  Rng rng(derive_seed(seed, 0x6d65616e73ULL));
  Eigen::MatrixXd means(feature_dim, classes);
  for (int c = 0; c < classes; ++c) {
    Eigen::VectorXd dir(feature_dim);
    for (int f = 0; f < feature_dim; ++f) dir(f) = rng.gaussian();
    means.col(c) = separation * dir / std::max(dir.norm(), 1e-12);
  }
  return means;
}

// Gaussian mixture around the given class means (unit covariance). Train and
// test splits share means and differ only in the sample seed.
inline Dataset sample_mixture(const Eigen::MatrixXd& means, int samples,
                              std::uint64_t seed) {
  const int classes = static_cast<int>(means.cols());
  const int feature_dim = static_cast<int>(means.rows());
  require(samples >= 1, "sample_mixture: samples >= 1");
  Rng rng(derive_seed(seed, 0x73616d706c6573ULL));
  Dataset ds;
  ds.features.resize(feature_dim, samples);
  ds.labels.resize(static_cast<std::size_t>(samples));
  for (int i = 0; i < samples; ++i) {
    const int label = static_cast<int>(rng.below(static_cast<std::uint64_t>(classes)));
    ds.labels[static_cast<std::size_t>(i)] = label;
    for (int f = 0; f < feature_dim; ++f)
      ds.features(f, i) = means(f, label) + rng.gaussian();
  }
  return ds;
}

inline std::vector<std::vector<int>> partition_iid(int samples, int devices,
                                                   std::uint64_t seed) {
  require(devices >= 1 && samples >= devices, "partition_iid: too few samples");
  std::vector<int> idx(static_cast<std::size_t>(samples));
  std::iota(idx.begin(), idx.end(), 0);
  Rng rng(derive_seed(seed, 0x696964ULL));
  for (std::size_t i = idx.size(); i > 1; --i)
    std::swap(idx[i - 1], idx[rng.below(i)]);
  std::vector<std::vector<int>> out(static_cast<std::size_t>(devices));
  for (int i = 0; i < samples; ++i)
    out[static_cast<std::size_t>(i % devices)].push_back(idx[static_cast<std::size_t>(i)]);
  return out;
}

// Label-skew split: each device picks `classes_per_device` classes and takes
// an equal quota from each selected class pool (cycling a shuffled pool when
// demand exceeds supply, so all devices end up with the same sample count).
inline std::vector<std::vector<int>> partition_label_skew(
    const std::vector<int>& labels, int devices, int classes_per_device,
    int num_classes, std::uint64_t seed) {
  require(devices >= 1, "partition_label_skew: devices >= 1");
  require(classes_per_device >= 1 && classes_per_device <= num_classes,
          "partition_label_skew: classes_per_device out of range");
  const int samples = static_cast<int>(labels.size());
  const int quota = samples / (classes_per_device * devices);
  require(quota >= 1, "partition_label_skew: quota per class is zero");

  std::vector<std::vector<int>> pools(static_cast<std::size_t>(num_classes));
  for (int i = 0; i < samples; ++i)
    pools[static_cast<std::size_t>(labels[static_cast<std::size_t>(i)])].push_back(i);
  Rng rng(derive_seed(seed, 0x736b6577ULL));
  for (auto& pool : pools) {
    require(!pool.empty(), "partition_label_skew: a class has no samples");
    for (std::size_t i = pool.size(); i > 1; --i)
      std::swap(pool[i - 1], pool[rng.below(i)]);
  }
  std::vector<std::size_t> cursor(static_cast<std::size_t>(num_classes), 0);

  std::vector<std::vector<int>> out(static_cast<std::size_t>(devices));
  std::vector<int> class_ids(static_cast<std::size_t>(num_classes));
  std::iota(class_ids.begin(), class_ids.end(), 0);
  for (int m = 0; m < devices; ++m) {
    for (std::size_t i = class_ids.size(); i > 1; --i)
      std::swap(class_ids[i - 1], class_ids[rng.below(i)]);
    for (int k = 0; k < classes_per_device; ++k) {
      const auto c = static_cast<std::size_t>(class_ids[static_cast<std::size_t>(k)]);
      for (int q = 0; q < quota; ++q) {
        out[static_cast<std::size_t>(m)].push_back(
            pools[c][cursor[c] % pools[c].size()]);
        ++cursor[c];
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Task context: dataset + partition + model definition
// ---------------------------------------------------------------------------

struct FlContext {
  LearningTask task;
  int num_devices = 0;

  Dataset train, test;
  std::vector<std::vector<int>> device_samples;
  std::vector<double> weights;  // b_m = Q_m / Q, exact unit sum

  // Regularized-quadratic task data (diagonal per-device curvatures).
  Eigen::MatrixXd quad_centers;     // D x M
  Eigen::MatrixXd quad_curvature;   // D x M
  Eigen::VectorXd quad_hessian;     // global diagonal Hessian
  double mu = 0.0, omega = 0.0;     // exact strong-convexity / smoothness
  Eigen::VectorXd quad_minimizer;
  double f_star = 0.0;
};

inline FlContext build_fl_context(const LearningTask& task, int devices,
                                  std::uint64_t seed) {
  task.validate();
  require(devices >= 1, "build_fl_context: devices >= 1");
  FlContext ctx;
  ctx.task = task;
  ctx.num_devices = devices;

  if (task.loss == LossFamily::RegularizedQuadratic) {
    const int d = task.quad_dim;
    Rng rng(derive_seed(seed, 0x71756164ULL));
    ctx.quad_centers.resize(d, devices);
    ctx.quad_curvature.resize(d, devices);
    for (int m = 0; m < devices; ++m) {
      for (int i = 0; i < d; ++i) {
        ctx.quad_centers(i, m) = task.quad_center_scale * rng.gaussian();
        ctx.quad_curvature(i, m) =
            rng.uniform(task.quad_curvature_min, task.quad_curvature_max);
      }
    }
    ctx.weights = normalize_weights(std::vector<double>(
        static_cast<std::size_t>(devices), 1.0 / devices));
    ctx.quad_hessian = Eigen::VectorXd::Zero(d);
    Eigen::VectorXd weighted_center = Eigen::VectorXd::Zero(d);
    for (int m = 0; m < devices; ++m) {
      ctx.quad_hessian += ctx.weights[static_cast<std::size_t>(m)] *
                          ctx.quad_curvature.col(m);
      weighted_center += ctx.weights[static_cast<std::size_t>(m)] *
                         ctx.quad_curvature.col(m).cwiseProduct(ctx.quad_centers.col(m));
    }
    ctx.mu = ctx.quad_hessian.minCoeff();
    ctx.omega = ctx.quad_hessian.maxCoeff();
    ctx.quad_minimizer = weighted_center.cwiseQuotient(ctx.quad_hessian);
    ctx.f_star = 0.0;
    for (int m = 0; m < devices; ++m) {
      const Eigen::VectorXd diff = ctx.quad_minimizer - ctx.quad_centers.col(m);
      ctx.f_star += 0.5 * ctx.weights[static_cast<std::size_t>(m)] *
                    diff.dot(ctx.quad_curvature.col(m).cwiseProduct(diff));
    }
    return ctx;
  }

  const Eigen::MatrixXd means = make_class_means(
      task.num_classes, task.feature_dim, task.class_separation, seed);
  ctx.train = sample_mixture(means, task.train_samples,
                             derive_seed(seed, 0x747261696eULL));
  ctx.test = sample_mixture(means, task.test_samples,
                            derive_seed(seed, 0x74657374ULL));
  ctx.device_samples =
      task.partition == PartitionPlan::Iid
          ? partition_iid(task.train_samples, devices, seed)
          : partition_label_skew(ctx.train.labels, devices,
                                 task.classes_per_device, task.num_classes, seed);
  std::vector<double> w;
  for (const auto& samples : ctx.device_samples) {
    require(!samples.empty(), "build_fl_context: a device has no samples");
    w.push_back(static_cast<double>(samples.size()) / task.train_samples);
  }
  ctx.weights = normalize_weights(std::move(w));
  return ctx;
}

// ---------------------------------------------------------------------------
// Losses, gradients, predictions
// ---------------------------------------------------------------------------

namespace detail {

// Multinomial logistic: w = vec(W), W in R^{C x (F+1)} column-major, last
// column is the bias.
inline Eigen::Map<const Eigen::MatrixXd> logits_matrix(const Eigen::VectorXd& w,
                                                       int classes, int features) {
  return {w.data(), classes, features + 1};
}

inline Eigen::VectorXd softmax(Eigen::VectorXd z) {
  z.array() -= z.maxCoeff();
  Eigen::VectorXd p = z.array().exp();
  return p / p.sum();
}

struct LossGrad {
  double loss = 0.0;
  Eigen::VectorXd grad;
};

inline LossGrad logistic_loss_grad(const Eigen::VectorXd& w, const Dataset& ds,
                                   const std::vector<int>& idx, int classes,
                                   int features, bool want_grad) {
  const auto weights = logits_matrix(w, classes, features);
  LossGrad out;
  Eigen::MatrixXd grad_w;
  if (want_grad) grad_w = Eigen::MatrixXd::Zero(classes, features + 1);
  Eigen::VectorXd x_ext(features + 1);
  for (const int i : idx) {
    x_ext.head(features) = ds.features.col(i);
    x_ext(features) = 1.0;
    const int y = ds.labels[static_cast<std::size_t>(i)];
    const Eigen::VectorXd p = softmax(weights * x_ext);
    out.loss += -std::log(std::max(p(y), 1e-300));
    if (want_grad) {
      Eigen::VectorXd delta = p;
      delta(y) -= 1.0;
      grad_w += delta * x_ext.transpose();
    }
  }
  const double inv = 1.0 / static_cast<double>(idx.size());
  out.loss *= inv;
  if (want_grad) {
    grad_w *= inv;
    out.grad = Eigen::Map<Eigen::VectorXd>(grad_w.data(), grad_w.size());
  }
  return out;
}

// One-hidden-layer tanh MLP with softmax output. w = [vec(W1); vec(W2)],
// W1 in R^{H x (F+1)}, W2 in R^{C x (H+1)}.
inline LossGrad mlp_loss_grad(const Eigen::VectorXd& w, const Dataset& ds,
                              const std::vector<int>& idx, int classes,
                              int features, int hidden, bool want_grad) {
  const int n1 = hidden * (features + 1);
  const Eigen::Map<const Eigen::MatrixXd> w1(w.data(), hidden, features + 1);
  const Eigen::Map<const Eigen::MatrixXd> w2(w.data() + n1, classes, hidden + 1);
  LossGrad out;
  Eigen::MatrixXd g1, g2;
  if (want_grad) {
    g1 = Eigen::MatrixXd::Zero(hidden, features + 1);
    g2 = Eigen::MatrixXd::Zero(classes, hidden + 1);
  }
  Eigen::VectorXd x_ext(features + 1), a_ext(hidden + 1);
  for (const int i : idx) {
    x_ext.head(features) = ds.features.col(i);
    x_ext(features) = 1.0;
    const Eigen::VectorXd z1 = w1 * x_ext;
    const Eigen::VectorXd a1 = z1.array().tanh();
    a_ext.head(hidden) = a1;
    a_ext(hidden) = 1.0;
    const int y = ds.labels[static_cast<std::size_t>(i)];
    const Eigen::VectorXd p = softmax(w2 * a_ext);
    out.loss += -std::log(std::max(p(y), 1e-300));
    if (want_grad) {
      Eigen::VectorXd delta = p;
      delta(y) -= 1.0;
      g2 += delta * a_ext.transpose();
      const Eigen::VectorXd back =
          (w2.leftCols(hidden).transpose() * delta).array() *
          (1.0 - a1.array().square());
      g1 += back * x_ext.transpose();
    }
  }
  const double inv = 1.0 / static_cast<double>(idx.size());
  out.loss *= inv;
  if (want_grad) {
    g1 *= inv;
    g2 *= inv;
    out.grad.resize(w.size());
    out.grad.head(n1) = Eigen::Map<Eigen::VectorXd>(g1.data(), g1.size());
    out.grad.tail(w.size() - n1) = Eigen::Map<Eigen::VectorXd>(g2.data(), g2.size());
  }
  return out;
}

}  // namespace detail

// Local loss F_m (mean over the device's samples or a given subset).
inline detail::LossGrad local_loss_grad(const FlContext& ctx, int device,
                                        const Eigen::VectorXd& w,
                                        const std::vector<int>& idx,
                                        bool want_grad) {
  const LearningTask& task = ctx.task;
  switch (task.loss) {
    case LossFamily::RegularizedQuadratic: {
      const Eigen::VectorXd diff = w - ctx.quad_centers.col(device);
      detail::LossGrad out;
      out.loss = 0.5 * diff.dot(ctx.quad_curvature.col(device).cwiseProduct(diff));
      if (want_grad) out.grad = ctx.quad_curvature.col(device).cwiseProduct(diff);
      return out;
    }
    case LossFamily::MultinomialLogistic:
      return detail::logistic_loss_grad(w, ctx.train, idx, task.num_classes,
                                        task.feature_dim, want_grad);
    case LossFamily::Mlp:
      return detail::mlp_loss_grad(w, ctx.train, idx, task.num_classes,
                                   task.feature_dim, task.hidden_units, want_grad);
  }
  throw Error("local_loss_grad: unreachable");
}

inline double global_loss(const FlContext& ctx, const Eigen::VectorXd& w) {
  const std::vector<int> no_samples;
  double loss = 0.0;
  for (int m = 0; m < ctx.num_devices; ++m) {
    const auto& idx = ctx.task.loss == LossFamily::RegularizedQuadratic
                          ? no_samples
                          : ctx.device_samples[static_cast<std::size_t>(m)];
    loss += ctx.weights[static_cast<std::size_t>(m)] *
            local_loss_grad(ctx, m, w, idx, false).loss;
  }
  return loss;
}

inline double test_accuracy(const FlContext& ctx, const Eigen::VectorXd& w) {
  if (ctx.task.loss == LossFamily::RegularizedQuadratic) return 0.0;
  const LearningTask& task = ctx.task;
  int correct = 0;
  Eigen::VectorXd x_ext(task.feature_dim + 1);
  for (int i = 0; i < ctx.test.size(); ++i) {
    x_ext.head(task.feature_dim) = ctx.test.features.col(i);
    x_ext(task.feature_dim) = 1.0;
    Eigen::VectorXd scores;
    if (task.loss == LossFamily::MultinomialLogistic) {
      scores = detail::logits_matrix(w, task.num_classes, task.feature_dim) * x_ext;
    } else {
      const int n1 = task.hidden_units * (task.feature_dim + 1);
      const Eigen::Map<const Eigen::MatrixXd> w1(w.data(), task.hidden_units,
                                                 task.feature_dim + 1);
      const Eigen::Map<const Eigen::MatrixXd> w2(w.data() + n1, task.num_classes,
                                                 task.hidden_units + 1);
      Eigen::VectorXd a_ext(task.hidden_units + 1);
      a_ext.head(task.hidden_units) = (w1 * x_ext).array().tanh();
      a_ext(task.hidden_units) = 1.0;
      scores = w2 * a_ext;
    }
    int arg = 0;
    scores.maxCoeff(&arg);
    if (arg == ctx.test.labels[static_cast<std::size_t>(i)]) ++correct;
  }
  return static_cast<double>(correct) / ctx.test.size();
}

inline Eigen::VectorXd initial_model(const FlContext& ctx, std::uint64_t seed) {
  const int d = ctx.task.model_dim();
  if (ctx.task.loss == LossFamily::Mlp) {
    Rng rng(derive_seed(seed, 0x696e6974ULL));
    Eigen::VectorXd w(d);
    for (int i = 0; i < d; ++i) w(i) = 0.1 * rng.gaussian();
    return w;
  }
  return Eigen::VectorXd::Zero(d);
}

// Per-device transmitted "gradient": the exact local gradient in
// pure-gradient mode, otherwise the effective update (w - w_local)/eta after
// `local_steps` momentum-SGD mini-batches.
inline GradientBatch compute_local_updates(const FlContext& ctx,
                                           const Eigen::VectorXd& w,
                                           std::uint64_t round_seed) {
  const LearningTask& task = ctx.task;
  GradientBatch batch;
  batch.values.resize(task.model_dim(), ctx.num_devices);
  for (int m = 0; m < ctx.num_devices; ++m) {
    const bool has_data = task.loss == LossFamily::RegularizedQuadratic ||
                          !ctx.device_samples[static_cast<std::size_t>(m)].empty();
    require(has_data, "compute_local_updates: device " + std::to_string(m) +
                          " has an empty local dataset");
    // The quadratic task has no dataset to mini-batch over; it always
    // transmits exact local gradients (the setting the bound checker needs).
    if (task.pure_gradient || task.loss == LossFamily::RegularizedQuadratic) {
      const std::vector<int> no_samples;
      const auto& idx = task.loss == LossFamily::RegularizedQuadratic
                            ? no_samples
                            : ctx.device_samples[static_cast<std::size_t>(m)];
      batch.values.col(m) = local_loss_grad(ctx, m, w, idx, true).grad;
      continue;
    }
    const auto& local = ctx.device_samples[static_cast<std::size_t>(m)];
    Rng rng(derive_seed(round_seed, 0x736764ULL, static_cast<std::uint64_t>(m)));
    Eigen::VectorXd w_local = w;
    Eigen::VectorXd velocity = Eigen::VectorXd::Zero(w.size());
    std::vector<int> batch_idx;
    for (int step = 0; step < task.local_steps; ++step) {
      if (task.batch_size >= static_cast<int>(local.size())) {
        batch_idx = local;  // full batch, no sampling
      } else {
        batch_idx.clear();
        for (int b = 0; b < task.batch_size; ++b)
          batch_idx.push_back(local[rng.below(local.size())]);
      }
      const Eigen::VectorXd grad =
          local_loss_grad(ctx, m, w_local, batch_idx, true).grad;
      velocity = task.momentum * velocity + grad;
      w_local -= task.learning_rate * velocity;
    }
    batch.values.col(m) = (w - w_local) / task.learning_rate;
  }
  batch.validate();
  return batch;
}

// ---------------------------------------------------------------------------
// Schemes and round execution
// ---------------------------------------------------------------------------

struct SchemeState {
  Scheme scheme = Scheme::ErrorFree;
  Trajectory trajectory;
  Eigen::MatrixXd gains;  // masked K, or unmasked for static-ps
  int optimizer_iters_last = 0;
  bool initialized = false;
};

struct RoundLog {
  int trial = 0;
  int round = 0;
  Scheme scheme = Scheme::ErrorFree;
  double accuracy = 0.0;
  double train_loss = 0.0;
  double error_sq_norm = 0.0;
  double analytic_mse = 0.0;  // Eq-22 scale (total, not per-dimension)
  int optimizer_iters = 0;
};

// One FL round for one scheme. Over-the-air schemes compute this round's
// correlation/scale statistics, pick zeta (and optionally re-optimize the
// trajectory), run the uplink simulation and apply Eq-5's update. The
// error-free scheme applies the ideal weighted aggregate.
inline std::pair<Eigen::VectorXd, RoundLog> run_round(
    const FlContext& ctx, const Scenario& sc, SchemeState& state,
    const Eigen::VectorXd& w, int round, std::uint64_t round_seed) {
  require(state.initialized, "run_round: scheme state not initialized");
  const GradientBatch batch = compute_local_updates(ctx, w, round_seed);
  RoundLog log;
  log.round = round;
  log.scheme = state.scheme;

  Eigen::VectorXd estimate;
  if (state.scheme == Scheme::ErrorFree) {
    estimate = Eigen::VectorXd::Zero(batch.dim());
    for (int m = 0; m < batch.num_devices(); ++m)
      estimate += ctx.weights[static_cast<std::size_t>(m)] * batch.values.col(m);
  } else {
    // Zero-variance columns are legitimate here (a converged device has a
    // constant, possibly all-zero, gradient), so the opt-in mapping is used.
    const NormalizedBatch normalized = normalize_gradients(batch, true);
    const Eigen::MatrixXd rho = floor_psd(estimate_correlation(normalized));
    const Eigen::VectorXd upsilon = weighted_stds(normalized, ctx.weights);
    const double sigma2 = sc.channel.noise_power;

    Eigen::VectorXd zeta;
    if (state.scheme == Scheme::Optimized && ctx.task.reoptimize_every_round) {
      Eigen::VectorXd warm_zeta =
          optimal_zeta(state.gains, rho, upsilon, sigma2, sigma2 == 0.0);
      OptimizationResult res = optimize_alternating(sc, rho, upsilon,
                                                    state.trajectory, warm_zeta);
      state.trajectory = res.trajectory;
      state.gains = res.gains;
      state.optimizer_iters_last = res.iterations;
      zeta = res.zeta;
    } else {
      // min-norm fallback only matters at sigma^2 = 0, where singular
      // systems are expected (slots outnumber covered devices).
      zeta = optimal_zeta(state.gains, rho, upsilon, sigma2, sigma2 == 0.0);
    }

    Scenario sc_round = sc;
    sc_round.weights = ctx.weights;
    const RoundOutcome outcome = simulate_round_with_gains(
        batch, state.gains, zeta, sc_round,
        derive_seed(round_seed, 0x6e6f697365ULL), true);
    estimate = outcome.estimate;
    log.error_sq_norm = outcome.error.squaredNorm();
    log.analytic_mse = mse(upsilon, rho, state.gains, zeta, sigma2, batch.dim());
    log.optimizer_iters = state.optimizer_iters_last;
  }

  Eigen::VectorXd w_next = w - ctx.task.learning_rate * estimate;
  log.accuracy = test_accuracy(ctx, w_next);
  log.train_loss = global_loss(ctx, w_next);
  return {std::move(w_next), log};
}

struct RoundStatistics {
  Eigen::MatrixXd rho;      // floored correlation estimate
  Eigen::VectorXd upsilon;  // b_m sqrt(variance_m)
};

// Correlation/scale statistics of the local updates at model w — what the
// trajectory optimizer and the tuned baselines consume.
inline RoundStatistics round_statistics(const FlContext& ctx,
                                        const Eigen::VectorXd& w,
                                        std::uint64_t seed) {
  const GradientBatch batch = compute_local_updates(ctx, w, seed);
  const NormalizedBatch normalized = normalize_gradients(batch, true);
  RoundStatistics out;
  out.rho = floor_psd(estimate_correlation(normalized));
  out.upsilon = weighted_stds(normalized, ctx.weights);
  return out;
}

// Builds the per-scheme trajectory/gain state. Needs this trial's round-0
// statistics for the tuned baselines and the optimizer.
inline SchemeState init_scheme_state(Scheme scheme, const FlContext& ctx,
                                     const Scenario& sc,
                                     const Eigen::VectorXd& w0,
                                     std::uint64_t trial_seed) {
  SchemeState state;
  state.scheme = scheme;
  state.initialized = true;
  if (scheme == Scheme::ErrorFree) return state;

  const RoundStatistics stats =
      round_statistics(ctx, w0, derive_seed(trial_seed, 0x70726f6265ULL));
  const Eigen::MatrixXd& rho = stats.rho;
  const Eigen::VectorXd& upsilon = stats.upsilon;

  switch (scheme) {
    case Scheme::StaticPs: {
      const StaticPsBaseline ps = static_ps_baseline(sc);
      state.trajectory = ps.trajectory;
      state.gains = ps.gains;
      break;
    }
    case Scheme::Circular: {
      const CircularBaseline circ = tuned_circular_trajectory(sc, rho, upsilon);
      state.trajectory = circ.trajectory;
      state.gains = gain_matrix(state.trajectory, sc);
      break;
    }
    case Scheme::Optimized: {
      const Trajectory init = initial_trajectory(sc);
      const Eigen::VectorXd init_zeta = optimal_zeta(
          gain_matrix(init, sc), rho, upsilon, sc.channel.noise_power,
          sc.channel.noise_power == 0.0);
      OptimizationResult res =
          optimize_alternating(sc, rho, upsilon, init, init_zeta);
      state.trajectory = res.trajectory;
      state.gains = res.gains;
      state.optimizer_iters_last = res.iterations;
      break;
    }
    default:
      break;
  }
  return state;
}

// ---------------------------------------------------------------------------
// Experiments
// ---------------------------------------------------------------------------

struct ExperimentReport {
  std::vector<Scheme> schemes;
  int rounds = 0;
  int trials = 0;
  std::vector<RoundLog> logs;  // all trials, schemes, rounds
  // [scheme][round] statistics over trials:
  std::vector<std::vector<double>> mean_accuracy;
  std::vector<std::vector<double>> std_accuracy;

  double final_mean_accuracy(Scheme s) const {
    for (std::size_t i = 0; i < schemes.size(); ++i)
      if (schemes[i] == s) return mean_accuracy[i].back();
    throw Error("final_mean_accuracy: scheme not in report");
  }
};

inline void write_round_logs_csv(const std::vector<RoundLog>& logs,
                                 const std::string& path) {
  CsvWriter csv(path, {"trial", "round", "scheme", "accuracy", "train_loss",
                       "error_sq_norm", "analytic_mse", "optimizer_iters"});
  for (const auto& log : logs) {
    csv.row({CsvWriter::cell(log.trial), CsvWriter::cell(log.round),
             scheme_name(log.scheme), CsvWriter::cell(log.accuracy),
             CsvWriter::cell(log.train_loss), CsvWriter::cell(log.error_sq_norm),
             CsvWriter::cell(log.analytic_mse), CsvWriter::cell(log.optimizer_iters)});
  }
}

// T rounds per scheme per trial with independent derived seeds. Each scheme
// evolves its own model from the shared per-trial initialization, so curves
// are directly comparable.
inline ExperimentReport run_experiment(const Scenario& sc, const LearningTask& task,
                                       const std::vector<Scheme>& schemes,
                                       int trials) {
  require(trials >= 1, "run_experiment: trials >= 1 required");
  require(!schemes.empty(), "run_experiment: no schemes selected");
  task.validate();

  ExperimentReport report;
  report.schemes = schemes;
  report.rounds = task.rounds;
  report.trials = trials;
  report.mean_accuracy.assign(schemes.size(),
                              std::vector<double>(task.rounds, 0.0));
  report.std_accuracy.assign(schemes.size(),
                             std::vector<double>(task.rounds, 0.0));
  std::vector<std::vector<std::vector<double>>> acc(
      schemes.size(), std::vector<std::vector<double>>(
                          static_cast<std::size_t>(task.rounds)));

  for (int trial = 0; trial < trials; ++trial) {
    const std::uint64_t trial_seed =
        derive_seed(sc.seed, 0x747269616cULL, static_cast<std::uint64_t>(trial));
    const FlContext ctx = build_fl_context(task, sc.num_devices(), trial_seed);
    const Eigen::VectorXd w0 = initial_model(ctx, trial_seed);
    for (std::size_t si = 0; si < schemes.size(); ++si) {
      SchemeState state = init_scheme_state(schemes[si], ctx, sc, w0, trial_seed);
      Eigen::VectorXd w = w0;
      for (int round = 0; round < task.rounds; ++round) {
        auto [w_next, log] =
            run_round(ctx, sc, state, w, round,
                      derive_seed(trial_seed, static_cast<std::uint64_t>(si),
                                  static_cast<std::uint64_t>(round)));
        w = std::move(w_next);
        log.trial = trial;
        acc[si][static_cast<std::size_t>(round)].push_back(log.accuracy);
        report.logs.push_back(log);
      }
    }
  }

  for (std::size_t si = 0; si < schemes.size(); ++si) {
    for (int r = 0; r < task.rounds; ++r) {
      const auto& xs = acc[si][static_cast<std::size_t>(r)];
      const double mean = pairwise_mean(xs);
      double var = 0.0;
      for (double x : xs) var += sq(x - mean);
      var /= xs.size();
      report.mean_accuracy[si][static_cast<std::size_t>(r)] = mean;
      report.std_accuracy[si][static_cast<std::size_t>(r)] = std::sqrt(var);
    }
  }
  return report;
}

// ---------------------------------------------------------------------------
// Convergence bound
// ---------------------------------------------------------------------------

// Per-round optimality-gap bound for eta = 1/omega:
//   B[0] = F(w0) - F*,
//   B[r] = sum_{t=0}^{r-1} (1 - mu/omega)^{r-1-t} err[t]
//          + (F(w0) - F*) (1 - mu/omega)^r,
// evaluated with realized (or trial-mean) squared error norms err[t].
inline std::vector<double> convergence_bound(double mu, double omega,
                                             const std::vector<double>& error_sq_norms,
                                             double initial_gap) {
  require(mu > 0.0, "convergence_bound: mu must be > 0");
  require(omega >= mu, "convergence_bound: omega must be >= mu");
  const double decay = 1.0 - mu / omega;
  std::vector<double> bound;
  bound.reserve(error_sq_norms.size() + 1);
  bound.push_back(initial_gap);
  for (const double err : error_sq_norms)
    bound.push_back(decay * bound.back() + err);
  return bound;
}

}  // namespace airfl
