#pragma once

#include <Eigen/Dense>
#include <random>
#include <string>
#include <vector>

namespace gaitlab {

enum class Activation { Tanh, Elu };

/// Fully connected network with manual reverse-mode differentiation.
class Mlp {
 public:
  Mlp() = default;
  /// sizes = {input, hidden..., output}; hidden layers use `act`, the output
  /// layer is linear.
  Mlp(const std::vector<int>& sizes, Activation act, std::mt19937_64& rng);

  struct Cache {
    Eigen::VectorXd input;
    std::vector<Eigen::VectorXd> pre;  // pre-activations per layer
    std::vector<Eigen::VectorXd> post; // activations per layer
  };

  Eigen::VectorXd forward(const Eigen::VectorXd& x, Cache* cache = nullptr) const;

  struct Gradients {
    std::vector<Eigen::MatrixXd> dW;
    std::vector<Eigen::VectorXd> db;
    void accumulate(const Gradients& other);
    void scale(double s);
  };
  Gradients zero_gradients() const;

  /// Exact gradients of the forward map for one sample; `grad_out` is the
  /// gradient of the loss w.r.t. the network output.
  void backward(const Cache& cache, const Eigen::VectorXd& grad_out,
                Gradients& grads) const;

  const std::vector<Eigen::MatrixXd>& weights() const { return W_; }
  const std::vector<Eigen::VectorXd>& biases() const { return b_; }
  std::vector<Eigen::MatrixXd>& weights() { return W_; }
  std::vector<Eigen::VectorXd>& biases() { return b_; }
  const std::vector<int>& sizes() const { return sizes_; }
  Activation activation() const { return act_; }
  int input_dim() const { return sizes_.front(); }
  int output_dim() const { return sizes_.back(); }
  int num_layers() const { return static_cast<int>(W_.size()); }

 private:
  std::vector<int> sizes_;
  Activation act_ = Activation::Tanh;
  std::vector<Eigen::MatrixXd> W_;
  std::vector<Eigen::VectorXd> b_;
};

/// Diagonal-Gaussian policy head over an actor network, with a separate value
/// network of the same hidden sizes.
struct Policy {
  Mlp actor;
  Mlp critic;
  Eigen::VectorXd log_std; // per action dimension, clamped to [-4, 1]

  Policy() = default;
  Policy(int obs_dim, int action_dim, const std::vector<int>& hidden,
         Activation act, std::mt19937_64& rng);

  Eigen::VectorXd mean_action(const Eigen::VectorXd& obs) const;
  double value(const Eigen::VectorXd& obs) const;

  /// Sample a raw action and its log-probability.
  std::pair<Eigen::VectorXd, double> sample(const Eigen::VectorXd& obs,
                                            std::mt19937_64& rng) const;
  double log_prob(const Eigen::VectorXd& mean, const Eigen::VectorXd& action) const;
  double entropy() const;

  std::string serialize() const;
  static Policy deserialize(const std::string& text);
};

} // namespace gaitlab
