#pragma once

#include <array>
#include <concepts>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "haptix/core.hpp"
#include "haptix/parallel.hpp"
#include "haptix/preprocess.hpp"

namespace haptix::nn {

inline constexpr double kProbClamp = 1e-12;

/// Max-subtracted softmax.
std::vector<double> softmax(std::span<const double> logits);

/// -log p[label], with p clamped at 1e-12 before the log.
double cross_entropy(std::span<const double> probs, std::size_t label);

/// -log softmax(logits)[label] computed through log-sum-exp. This is the
/// training loss; its gradient is softmax(logits) - onehot(label).
double softmax_cross_entropy(std::span<const double> logits, std::size_t label);

// ---------------------------------------------------------------------------
// Temporal convolutional network: conv(width 5, same padding) -> ReLU ->
// max-pool(2) per layer, then flatten -> ReLU -> linear.
//
// Parameter layout, per conv layer: weight[out][tap][in], bias[out]; then the
// head weight[class][flat] and bias[class]. The flattened activation is
// time-major (index t * channels + c).

struct TcnShape {
  std::size_t input_channels = 0;
  std::size_t seq_len = kDefaultGrid;
  std::vector<std::size_t> widths{32, 32, 32, 32};
  std::size_t kernel = 5;
  std::size_t num_classes = kNumClasses;

  std::size_t final_len() const noexcept { return seq_len >> widths.size(); }
  std::size_t flat_size() const noexcept { return final_len() * widths.back(); }
  std::size_t param_count() const noexcept;
  /// Throws std::invalid_argument for an even kernel or a length that does not halve cleanly.
  void validate() const;
  friend bool operator==(const TcnShape&, const TcnShape&) = default;
};

class TcnModel {
 public:
  TcnModel() = default;
  explicit TcnModel(TcnShape shape);  // all parameters zero
  static TcnModel random(TcnShape shape, std::uint64_t seed);

  const TcnShape& shape() const noexcept { return shape_; }
  std::vector<double>& params() noexcept { return params_; }
  const std::vector<double>& params() const noexcept { return params_; }

  std::span<double> conv_weight(std::size_t layer);
  std::span<double> conv_bias(std::size_t layer);
  std::span<double> head_weight();
  std::span<double> head_bias();

  std::vector<double> forward(const FeatureMatrix& x) const;
  double loss(const FeatureMatrix& x, std::size_t label) const;
  /// Adds d loss / d params into grad (same layout as params()); returns the loss.
  double loss_gradient(const FeatureMatrix& x, std::size_t label, std::span<double> grad) const;
  /// Output of the last conv block (final_len x widths.back(), row-major).
  std::vector<double> final_activations(const FeatureMatrix& x) const;

 private:
  struct Cache;
  std::vector<double> run(const FeatureMatrix& x, Cache* cache) const;
  void check_input(const FeatureMatrix& x) const;
  std::size_t layer_offset(std::size_t layer) const;
  std::size_t head_offset() const;

  TcnShape shape_;
  std::vector<double> params_;
};

// ---------------------------------------------------------------------------
// Stacked LSTM. Per layer: W[4H][in], U[4H][H], b[4H] with gate blocks in the
// order input, forget, cell candidate, output. Head: ReLU on the top layer's
// final hidden state, then linear to class logits.

struct LstmShape {
  std::size_t input_channels = 0;
  std::size_t hidden = 50;
  std::size_t layers = 2;
  std::size_t num_classes = kNumClasses;
  // Train on the mean loss of per-step predictions instead of the final step.
  bool per_step_loss = false;

  std::size_t param_count() const noexcept;
  void validate() const;
  friend bool operator==(const LstmShape&, const LstmShape&) = default;
};

class LstmModel {
 public:
  LstmModel() = default;
  explicit LstmModel(LstmShape shape);
  static LstmModel random(LstmShape shape, std::uint64_t seed);

  const LstmShape& shape() const noexcept { return shape_; }
  std::vector<double>& params() noexcept { return params_; }
  const std::vector<double>& params() const noexcept { return params_; }

  std::span<double> input_weight(std::size_t layer);
  std::span<double> recurrent_weight(std::size_t layer);
  std::span<double> bias(std::size_t layer);
  std::span<double> head_weight();
  std::span<double> head_bias();

  std::vector<double> forward(const FeatureMatrix& x) const;
  double loss(const FeatureMatrix& x, std::size_t label) const;
  double loss_gradient(const FeatureMatrix& x, std::size_t label, std::span<double> grad) const;

 private:
  struct Cache;
  std::vector<double> run(const FeatureMatrix& x, Cache* cache) const;
  void check_input(const FeatureMatrix& x) const;
  std::size_t layer_offset(std::size_t layer) const;
  std::size_t layer_input(std::size_t layer) const noexcept {
    return layer == 0 ? shape_.input_channels : shape_.hidden;
  }
  std::size_t head_offset() const;

  LstmShape shape_;
  std::vector<double> params_;
};

// ---------------------------------------------------------------------------
// Single linear layer over the channel-major flattened matrix. Used as a
// baseline and for checking the gradient machinery on a model that is
// linear in its parameters.

struct LinearShape {
  std::size_t input_channels = 0;
  std::size_t seq_len = kDefaultGrid;
  std::size_t num_classes = kNumClasses;
  std::size_t param_count() const noexcept { return num_classes * (input_channels * seq_len + 1); }
  friend bool operator==(const LinearShape&, const LinearShape&) = default;
};

class LinearModel {
 public:
  LinearModel() = default;
  explicit LinearModel(LinearShape shape);
  static LinearModel random(LinearShape shape, std::uint64_t seed);

  const LinearShape& shape() const noexcept { return shape_; }
  std::vector<double>& params() noexcept { return params_; }
  const std::vector<double>& params() const noexcept { return params_; }

  std::vector<double> forward(const FeatureMatrix& x) const;
  double loss(const FeatureMatrix& x, std::size_t label) const;
  double loss_gradient(const FeatureMatrix& x, std::size_t label, std::span<double> grad) const;

 private:
  LinearShape shape_;
  std::vector<double> params_;
};

template <class M>
concept SequenceModel = requires(M m, const M& cm, const FeatureMatrix& x, std::span<double> g) {
  { cm.forward(x) } -> std::same_as<std::vector<double>>;
  { cm.loss(x, std::size_t{}) } -> std::convertible_to<double>;
  { cm.loss_gradient(x, std::size_t{}, g) } -> std::convertible_to<double>;
  { m.params() } -> std::same_as<std::vector<double>&>;
};

// ---------------------------------------------------------------------------
// Training

enum class Optimizer { Sgd, Adam };

struct TrainConfig {
  double learning_rate = 1e-3;
  std::size_t epochs = 100;
  std::size_t batch_size = 32;
  std::uint64_t seed = 0;
  Optimizer optimizer = Optimizer::Adam;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  Exec exec = Exec::Parallel;

  void validate() const;
};

template <SequenceModel M>
struct TrainResult {
  M model;
  std::vector<double> loss_curve;  // mean training loss per epoch
};

/// Mean loss and mean gradient over data[indices]. Per-sample gradients are
/// summed in index order, so Serial and Parallel agree bitwise.
template <SequenceModel M>
double batch_gradient(const M& model, std::span<const FeatureMatrix> data, std::span<const std::size_t> indices,
                      std::span<double> grad, Exec exec);

/// Mini-batch training of the mean cross-entropy. Matrices must carry labels.
/// Throws NonFiniteLoss when a batch loss is not finite.
template <SequenceModel M>
TrainResult<M> train(M model, std::span<const FeatureMatrix> data, const TrainConfig& cfg);

struct GradCheckResult {
  double max_rel_error = 0.0;
  std::size_t checked = 0;
  std::size_t worst_index = 0;
};

/// Compares the analytic gradient with central differences on a random
/// subset of parameters (all of them when there are fewer than `count`).
/// Relative error uses max(|analytic|, |numeric|, 1e-8) as denominator.
/// When the loss depends only on the final logits, the loss difference is
/// formed from the two logit vectors instead of subtracting rounded losses.
template <SequenceModel M>
GradCheckResult grad_check(const M& model, const FeatureMatrix& sample, std::size_t label, double eps = 1e-5,
                           std::size_t count = 200, std::uint64_t seed = 0);

std::size_t predict(std::span<const double> logits) noexcept;

nlohmann::json to_json(const TcnModel& m);
nlohmann::json to_json(const LstmModel& m);
nlohmann::json to_json(const LinearModel& m);
TcnModel tcn_from_json(const nlohmann::json& j);
LstmModel lstm_from_json(const nlohmann::json& j);

/// "epoch,mean_loss" rows, epochs counted from 1.
std::string loss_curve_csv(std::span<const double> curve);

extern template double batch_gradient<TcnModel>(const TcnModel&, std::span<const FeatureMatrix>,
                                                std::span<const std::size_t>, std::span<double>, Exec);
extern template double batch_gradient<LstmModel>(const LstmModel&, std::span<const FeatureMatrix>,
                                                 std::span<const std::size_t>, std::span<double>, Exec);
extern template double batch_gradient<LinearModel>(const LinearModel&, std::span<const FeatureMatrix>,
                                                   std::span<const std::size_t>, std::span<double>, Exec);
extern template TrainResult<TcnModel> train<TcnModel>(TcnModel, std::span<const FeatureMatrix>, const TrainConfig&);
extern template TrainResult<LstmModel> train<LstmModel>(LstmModel, std::span<const FeatureMatrix>,
                                                        const TrainConfig&);
extern template TrainResult<LinearModel> train<LinearModel>(LinearModel, std::span<const FeatureMatrix>,
                                                            const TrainConfig&);
extern template GradCheckResult grad_check<TcnModel>(const TcnModel&, const FeatureMatrix&, std::size_t, double,
                                                     std::size_t, std::uint64_t);
extern template GradCheckResult grad_check<LstmModel>(const LstmModel&, const FeatureMatrix&, std::size_t, double,
                                                      std::size_t, std::uint64_t);
extern template GradCheckResult grad_check<LinearModel>(const LinearModel&, const FeatureMatrix&, std::size_t,
                                                        double, std::size_t, std::uint64_t);

}  // namespace haptix::nn
