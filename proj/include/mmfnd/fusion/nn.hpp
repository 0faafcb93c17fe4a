#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mmfnd/core/rng.hpp"

namespace mmfnd::fusion {

// One named parameter with its gradient; everything trains in float64.
struct Tensor {
  std::string name;
  Eigen::MatrixXd value;
  Eigen::MatrixXd grad;

  Tensor() = default;
  Tensor(std::string n, Eigen::Index rows, Eigen::Index cols)
      : name(std::move(n)),
        value(Eigen::MatrixXd::Zero(rows, cols)),
        grad(Eigen::MatrixXd::Zero(rows, cols)) {}

  void zero_grad() { grad.setZero(); }
};

enum class Act { NONE, RELU, GELU, SIGMOID };

Eigen::MatrixXd apply_act(Act act, const Eigen::MatrixXd& z);
// dL/dz given dL/dy and the pre-activation z.
Eigen::MatrixXd act_backward(Act act, const Eigen::MatrixXd& z, const Eigen::MatrixXd& dy);

// Fully connected layer on column-major batches: X is (in x B), output
// (out x B). Caches its input between forward and backward.
struct Dense {
  Tensor W;  // out x in
  Tensor b;  // out x 1
  Act act = Act::NONE;
  Eigen::MatrixXd last_input;
  Eigen::MatrixXd last_pre;  // pre-activation, cached for act_backward

  Dense() = default;
  Dense(const std::string& name, Eigen::Index in, Eigen::Index out, Act activation, Rng& rng);

  Eigen::MatrixXd forward(const Eigen::MatrixXd& x);
  // Accumulates into W.grad/b.grad; returns dL/dx.
  Eigen::MatrixXd backward(const Eigen::MatrixXd& dy);
  std::vector<Tensor*> parameters() { return {&W, &b}; }
};

// Fan-in uniform init, U(-1/sqrt(fan_in), +1/sqrt(fan_in)).
void init_fan_in(Eigen::MatrixXd& w, Eigen::Index fan_in, Rng& rng);

// Adaptive moment estimation over a fixed parameter list.
class Adam {
 public:
  explicit Adam(double lr, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8);

  void step(const std::vector<Tensor*>& params);
  double learning_rate() const { return lr_; }

 private:
  double lr_, beta1_, beta2_, eps_;
  long t_ = 0;
  std::vector<Eigen::MatrixXd> m_, v_;  // one slot per tensor, sized lazily
};

Eigen::MatrixXd sigmoid(const Eigen::MatrixXd& z);

// Mean-over-batch binary cross entropy against per-unit {0,1} targets;
// returns the loss and writes dL/dlogits (the caller feeds it back through
// the network). weights scales each sample's contribution (length B).
double bce_with_logits(const Eigen::MatrixXd& logits, const Eigen::MatrixXd& targets,
                       const Eigen::VectorXd& weights, Eigen::MatrixXd* dlogits);

}  // namespace mmfnd::fusion
