#include "mmfnd/fusion/nn.hpp"

#include <cmath>

namespace mmfnd::fusion {

namespace {

constexpr double kSqrt1_2 = 0.70710678118654752440;
constexpr double kInvSqrt2Pi = 0.39894228040143267794;

double gelu(double x) { return 0.5 * x * (1.0 + std::erf(x * kSqrt1_2)); }

double gelu_grad(double x) {
  return 0.5 * (1.0 + std::erf(x * kSqrt1_2)) + x * kInvSqrt2Pi * std::exp(-0.5 * x * x);
}

double sigmoid1(double z) {
  return z >= 0.0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z));
}

}  // namespace

Eigen::MatrixXd apply_act(Act act, const Eigen::MatrixXd& z) {
  switch (act) {
    case Act::NONE:
      return z;
    case Act::RELU:
      return z.cwiseMax(0.0);
    case Act::GELU:
      return z.unaryExpr([](double x) { return gelu(x); });
    case Act::SIGMOID:
      return z.unaryExpr([](double x) { return sigmoid1(x); });
  }
  return z;
}

Eigen::MatrixXd act_backward(Act act, const Eigen::MatrixXd& z, const Eigen::MatrixXd& dy) {
  switch (act) {
    case Act::NONE:
      return dy;
    case Act::RELU:
      return (z.array() > 0.0).cast<double>().matrix().cwiseProduct(dy);
    case Act::GELU:
      return z.unaryExpr([](double x) { return gelu_grad(x); }).cwiseProduct(dy);
    case Act::SIGMOID: {
      Eigen::MatrixXd s = apply_act(Act::SIGMOID, z);
      return s.cwiseProduct((1.0 - s.array()).matrix()).cwiseProduct(dy);
    }
  }
  return dy;
}

void init_fan_in(Eigen::MatrixXd& w, Eigen::Index fan_in, Rng& rng) {
  double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
  for (Eigen::Index c = 0; c < w.cols(); ++c)
    for (Eigen::Index r = 0; r < w.rows(); ++r) w(r, c) = rng.uniform(-bound, bound);
}

Dense::Dense(const std::string& name, Eigen::Index in, Eigen::Index out, Act activation, Rng& rng)
    : W(name + ".W", out, in), b(name + ".b", out, 1), act(activation) {
  init_fan_in(W.value, in, rng);
}

Eigen::MatrixXd Dense::forward(const Eigen::MatrixXd& x) {
  last_input = x;
  last_pre = (W.value * x).colwise() + Eigen::VectorXd(b.value.col(0));
  return apply_act(act, last_pre);
}

Eigen::MatrixXd Dense::backward(const Eigen::MatrixXd& dy) {
  Eigen::MatrixXd dz = act_backward(act, last_pre, dy);
  W.grad.noalias() += dz * last_input.transpose();
  b.grad.col(0).noalias() += dz.rowwise().sum();
  return W.value.transpose() * dz;
}

Adam::Adam(double lr, double beta1, double beta2, double eps)
    : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {}

void Adam::step(const std::vector<Tensor*>& params) {
  if (m_.size() != params.size()) {
    m_.clear();
    v_.clear();
    for (const Tensor* p : params) {
      m_.push_back(Eigen::MatrixXd::Zero(p->value.rows(), p->value.cols()));
      v_.push_back(Eigen::MatrixXd::Zero(p->value.rows(), p->value.cols()));
    }
  }
  ++t_;
  double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  for (std::size_t i = 0; i < params.size(); ++i) {
    Tensor& p = *params[i];
    m_[i] = beta1_ * m_[i] + (1.0 - beta1_) * p.grad;
    v_[i] = beta2_ * v_[i] + (1.0 - beta2_) * p.grad.cwiseProduct(p.grad);
    Eigen::MatrixXd mhat = m_[i] / bc1;
    Eigen::MatrixXd vhat = v_[i] / bc2;
    p.value.array() -= lr_ * mhat.array() / (vhat.array().sqrt() + eps_);
  }
}

Eigen::MatrixXd sigmoid(const Eigen::MatrixXd& z) { return apply_act(Act::SIGMOID, z); }

double bce_with_logits(const Eigen::MatrixXd& logits, const Eigen::MatrixXd& targets,
                       const Eigen::VectorXd& weights, Eigen::MatrixXd* dlogits) {
  Eigen::MatrixXd s = sigmoid(logits);
  const double eps = 1e-12;
  double total = 0.0;
  Eigen::Index batch = logits.cols();
  for (Eigen::Index c = 0; c < batch; ++c) {
    double sample = 0.0;
    for (Eigen::Index r = 0; r < logits.rows(); ++r) {
      double p = std::min(std::max(s(r, c), eps), 1.0 - eps);
      double t = targets(r, c);
      sample -= t * std::log(p) + (1.0 - t) * std::log(1.0 - p);
    }
    total += weights(c) * sample;
  }
  if (dlogits != nullptr) {
    // d/dz of sigmoid+BCE collapses to (s - t); weights fold in per column.
    *dlogits = (s - targets) * (1.0 / static_cast<double>(batch));
    for (Eigen::Index c = 0; c < batch; ++c) dlogits->col(c) *= weights(c);
  }
  return total / static_cast<double>(batch);
}

}  // namespace mmfnd::fusion
