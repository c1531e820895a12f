#include "dqfd/q_network.hpp"

#include <cmath>
#include <stdexcept>

namespace dqfd {

QNetwork::QNetwork(QNetShape shape) : shape_(shape) {
  if (shape_.input == 0 || shape_.hidden == 0 || shape_.actions == 0)
    throw std::invalid_argument("network dimensions must be positive");
  params_ = Vector::Zero(static_cast<Eigen::Index>(shape_.param_count()));
}

QNetwork QNetwork::initialized(QNetShape shape, Rng& rng) {
  QNetwork net(shape);
  auto fill = [&rng](auto&& m, std::size_t fan_in) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    for (Eigen::Index j = 0; j < m.cols(); ++j)
      for (Eigen::Index i = 0; i < m.rows(); ++i) m(i, j) = bound * (2.0 * uniform01(rng) - 1.0);
  };
  fill(net.W1(), shape.input);
  fill(net.w_v(), shape.hidden);
  fill(net.W_a(), shape.hidden);
  return net;
}

namespace {

void check_input(const FeatureVector& x, std::size_t n) {
  if (x.size() != n) throw std::invalid_argument("input length does not match network");
}

}  // namespace

QNetwork::Vector QNetwork::forward(const FeatureVector& x) const {
  check_input(x, shape_.input);
  const auto w1 = W1();
  Vector z = b1();
  for (std::size_t j = 0; j < x.size(); ++j)
    if (x[j]) z += static_cast<double>(x[j]) * w1.col(static_cast<Eigen::Index>(j));
  const Vector h = z.cwiseMax(0.0);
  const Vector a = W_a() * h + b_a();
  const double v = w_v().dot(h) + b_v();
  return (a.array() + (v - a.mean())).matrix();
}

QNetwork::Cache QNetwork::forward_cache(std::span<const FeatureVector* const> xs) const {
  const auto batch = static_cast<Eigen::Index>(xs.size());
  Cache c;
  c.active.resize(xs.size());
  c.values.resize(xs.size());
  c.z.resize(rows(shape_.hidden), batch);
  const auto w1 = W1();
  const auto bias = b1();
  for (Eigen::Index b = 0; b < batch; ++b) {
    const FeatureVector& x = *xs[static_cast<std::size_t>(b)];
    check_input(x, shape_.input);
    auto col = c.z.col(b);
    col = bias;
    auto& act = c.active[static_cast<std::size_t>(b)];
    auto& val = c.values[static_cast<std::size_t>(b)];
    for (std::size_t j = 0; j < x.size(); ++j) {
      if (!x[j]) continue;
      act.push_back(static_cast<std::uint32_t>(j));
      val.push_back(static_cast<double>(x[j]));
      col += val.back() * w1.col(static_cast<Eigen::Index>(j));
    }
  }
  c.h = c.z.cwiseMax(0.0);
  c.a = W_a() * c.h;
  c.a.colwise() += b_a();
  c.v = (w_v().transpose() * c.h).array() + b_v();
  const Eigen::RowVectorXd shift = c.v - c.a.colwise().mean();
  c.q = c.a;
  c.q.rowwise() += shift;
  return c;
}

QNetwork::Matrix QNetwork::forward_batch(std::span<const FeatureVector* const> xs) const {
  return forward_cache(xs).q;
}

QNetwork::Vector QNetwork::backward(const Cache& c, const Matrix& dq) const {
  if (dq.rows() != c.q.rows() || dq.cols() != c.q.cols())
    throw std::invalid_argument("output gradient shape does not match the cache");
  Vector grad = Vector::Zero(params_.size());

  // q_k = V + A_k - mean(A)  =>  dV = sum_k dq_k,  dA_k = dq_k - mean(dq)
  const Eigen::RowVectorXd dv = dq.colwise().sum();
  Matrix da = dq;
  da.rowwise() -= dq.colwise().mean();

  auto g = [&grad](std::size_t off, Eigen::Index r, Eigen::Index k) {
    return Eigen::Map<Matrix>(grad.data() + off, r, k);
  };
  const auto H = rows(shape_.hidden);
  const auto A = rows(shape_.actions);
  g(o_Wa(), A, H).noalias() = da * c.h.transpose();
  g(o_ba(), A, 1) = da.rowwise().sum();
  g(o_wv(), H, 1).noalias() = c.h * dv.transpose();
  grad[static_cast<Eigen::Index>(o_bv())] = dv.sum();

  Matrix dh = W_a().transpose() * da;
  dh.noalias() += w_v() * dv;
  const Matrix dz = (c.z.array() > 0.0).select(dh, 0.0);
  g(o_b1(), H, 1) = dz.rowwise().sum();
  auto gw1 = g(o_W1(), H, rows(shape_.input));
  for (Eigen::Index b = 0; b < dz.cols(); ++b) {
    const auto& act = c.active[static_cast<std::size_t>(b)];
    const auto& val = c.values[static_cast<std::size_t>(b)];
    for (std::size_t k = 0; k < act.size(); ++k) gw1.col(act[k]) += val[k] * dz.col(b);
  }
  return grad;
}

TdResult td_backward(const QNetwork& net, std::span<const FeatureVector* const> states,
                     std::span<const std::uint32_t> actions, std::span<const double> targets,
                     std::span<const double> weights, double l2) {
  const std::size_t n = states.size();
  if (actions.size() != n || targets.size() != n || weights.size() != n || n == 0)
    throw std::invalid_argument("td_backward: batch arrays differ in length");
  for (double y : targets)
    if (!std::isfinite(y)) throw std::invalid_argument("td_backward: non-finite target");

  const auto cache = net.forward_cache(states);
  QNetwork::Matrix dq = QNetwork::Matrix::Zero(cache.q.rows(), cache.q.cols());
  TdResult out;
  out.td.resize(n);
  const double inv_b = 1.0 / static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (actions[i] >= net.shape().actions) throw std::out_of_range("td_backward: action out of range");
    const auto b = static_cast<Eigen::Index>(i);
    const double delta = targets[i] - cache.q(actions[i], b);
    out.td[i] = delta;
    out.loss += inv_b * weights[i] * delta * delta;
    dq(actions[i], b) = -2.0 * inv_b * weights[i] * delta;
  }
  out.grad = net.backward(cache, dq);
  if (l2 != 0.0) {
    out.loss += l2 * net.params().squaredNorm();
    out.grad += 2.0 * l2 * net.params();
  }
  return out;
}

}  // namespace dqfd
