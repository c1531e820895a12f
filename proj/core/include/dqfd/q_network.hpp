#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "dqfd/featurizer.hpp"
#include "dqfd/random.hpp"

namespace dqfd {

struct QNetShape {
  std::size_t input = 0;
  std::size_t hidden = 100;
  std::size_t actions = 0;

  std::size_t param_count() const { return hidden * input + hidden + hidden + 1 + actions * hidden + actions; }
  friend bool operator==(const QNetShape&, const QNetShape&) = default;
};

// One hidden ReLU layer feeding a dueling head:
//
//   h = relu(W1 x + b1)
//   V = w_v . h + b_v
//   A = W_a h + b_a
//   q = V + A - mean(A)
//
// Parameters live in one flat vector in the order W1, b1, w_v, b_v, W_a, b_a
// (matrices column-major), so optimizers and checkpoints can treat them as a
// single array.
class QNetwork {
 public:
  using Matrix = Eigen::MatrixXd;
  using Vector = Eigen::VectorXd;
  using MatrixMap = Eigen::Map<Matrix>;
  using ConstMatrixMap = Eigen::Map<const Matrix>;
  using VectorMap = Eigen::Map<Vector>;
  using ConstVectorMap = Eigen::Map<const Vector>;

  QNetwork() = default;
  explicit QNetwork(QNetShape shape);  // all parameters zero

  // Weights uniform in [-1/sqrt(fan_in), 1/sqrt(fan_in)], biases zero.
  static QNetwork initialized(QNetShape shape, Rng& rng);

  const QNetShape& shape() const { return shape_; }
  Vector& params() { return params_; }
  const Vector& params() const { return params_; }

  MatrixMap W1() { return {params_.data() + o_W1(), rows(shape_.hidden), rows(shape_.input)}; }
  VectorMap b1() { return {params_.data() + o_b1(), rows(shape_.hidden)}; }
  VectorMap w_v() { return {params_.data() + o_wv(), rows(shape_.hidden)}; }
  double& b_v() { return params_[static_cast<Eigen::Index>(o_bv())]; }
  MatrixMap W_a() { return {params_.data() + o_Wa(), rows(shape_.actions), rows(shape_.hidden)}; }
  VectorMap b_a() { return {params_.data() + o_ba(), rows(shape_.actions)}; }
  ConstMatrixMap W1() const { return {params_.data() + o_W1(), rows(shape_.hidden), rows(shape_.input)}; }
  ConstVectorMap b1() const { return {params_.data() + o_b1(), rows(shape_.hidden)}; }
  ConstVectorMap w_v() const { return {params_.data() + o_wv(), rows(shape_.hidden)}; }
  double b_v() const { return params_[static_cast<Eigen::Index>(o_bv())]; }
  ConstMatrixMap W_a() const { return {params_.data() + o_Wa(), rows(shape_.actions), rows(shape_.hidden)}; }
  ConstVectorMap b_a() const { return {params_.data() + o_ba(), rows(shape_.actions)}; }

  // Activations kept for a backward pass. Column b belongs to input b.
  struct Cache {
    std::vector<std::vector<std::uint32_t>> active;  // nonzero input positions
    std::vector<std::vector<double>> values;         // their values
    Matrix z;  // hidden pre-activations
    Matrix h;
    Matrix a;  // advantage head outputs
    Eigen::RowVectorXd v;
    Matrix q;  // actions x batch
  };

  Vector forward(const FeatureVector& x) const;
  Matrix forward_batch(std::span<const FeatureVector* const> xs) const;
  Cache forward_cache(std::span<const FeatureVector* const> xs) const;

  // Gradient of sum_{a,b} dq(a,b) * q(a,b) with respect to params(), for the
  // batch recorded in `cache`.
  Vector backward(const Cache& cache, const Matrix& dq) const;

 private:
  static Eigen::Index rows(std::size_t n) { return static_cast<Eigen::Index>(n); }
  std::size_t o_W1() const { return 0; }
  std::size_t o_b1() const { return shape_.hidden * shape_.input; }
  std::size_t o_wv() const { return o_b1() + shape_.hidden; }
  std::size_t o_bv() const { return o_wv() + shape_.hidden; }
  std::size_t o_Wa() const { return o_bv() + 1; }
  std::size_t o_ba() const { return o_Wa() + shape_.actions * shape_.hidden; }

  QNetShape shape_;
  Vector params_;
};

// Weighted squared TD error:
//
//   L = (1/B) sum_i w_i (y_i - Q(s_i, a_i))^2 + l2 * ||theta||^2
//
// Returns the loss, its gradient, and delta_i = y_i - Q(s_i, a_i).
struct TdResult {
  double loss = 0.0;
  Eigen::VectorXd grad;
  std::vector<double> td;
};

TdResult td_backward(const QNetwork& net, std::span<const FeatureVector* const> states,
                     std::span<const std::uint32_t> actions, std::span<const double> targets,
                     std::span<const double> weights, double l2);

}  // namespace dqfd
