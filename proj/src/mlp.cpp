#include "gaitlab/mlp.hpp"

#include <cmath>
#include <nlohmann/json.hpp>
#include <stdexcept>

namespace gaitlab {

using nlohmann::json;

namespace {

double apply_act(double x, Activation a) {
  return a == Activation::Tanh ? std::tanh(x)
                               : (x > 0.0 ? x : std::expm1(x));
}

double act_grad(double pre, double post, Activation a) {
  return a == Activation::Tanh ? 1.0 - post * post
                               : (pre > 0.0 ? 1.0 : post + 1.0);
}

} // namespace

Mlp::Mlp(const std::vector<int>& sizes, Activation act, std::mt19937_64& rng)
    : sizes_(sizes), act_(act) {
  if (sizes.size() < 2) throw std::invalid_argument("Mlp needs >= 2 layer sizes");
  std::normal_distribution<double> normal(0.0, 1.0);
  for (size_t l = 0; l + 1 < sizes.size(); ++l) {
    const int in = sizes[l], out = sizes[l + 1];
    // Orthogonal-ish scaled init: Xavier for hidden, small output layer.
    const double scale = (l + 2 == sizes.size()) ? 0.01 : std::sqrt(2.0 / in);
    Eigen::MatrixXd W(out, in);
    for (int i = 0; i < out; ++i)
      for (int j = 0; j < in; ++j) W(i, j) = scale * normal(rng);
    W_.push_back(std::move(W));
    b_.push_back(Eigen::VectorXd::Zero(out));
  }
}

Eigen::VectorXd Mlp::forward(const Eigen::VectorXd& x, Cache* cache) const {
  if (x.size() != sizes_.front())
    throw std::invalid_argument("Mlp input size mismatch: expected " +
                                std::to_string(sizes_.front()) + ", got " +
                                std::to_string(x.size()));
  if (cache) {
    cache->input = x;
    cache->pre.clear();
    cache->post.clear();
  }
  Eigen::VectorXd h = x;
  for (size_t l = 0; l < W_.size(); ++l) {
    Eigen::VectorXd z = W_[l] * h + b_[l];
    if (l + 1 < W_.size()) {
      h = z.unaryExpr([this](double v) { return apply_act(v, act_); });
    } else {
      h = z;
    }
    if (cache) {
      cache->pre.push_back(std::move(z));
      cache->post.push_back(h);
    }
  }
  return h;
}

Mlp::Gradients Mlp::zero_gradients() const {
  Gradients g;
  for (size_t l = 0; l < W_.size(); ++l) {
    g.dW.push_back(Eigen::MatrixXd::Zero(W_[l].rows(), W_[l].cols()));
    g.db.push_back(Eigen::VectorXd::Zero(b_[l].size()));
  }
  return g;
}

void Mlp::Gradients::accumulate(const Gradients& other) {
  for (size_t l = 0; l < dW.size(); ++l) {
    dW[l] += other.dW[l];
    db[l] += other.db[l];
  }
}

void Mlp::Gradients::scale(double s) {
  for (size_t l = 0; l < dW.size(); ++l) {
    dW[l] *= s;
    db[l] *= s;
  }
}

void Mlp::backward(const Cache& cache, const Eigen::VectorXd& grad_out,
                   Gradients& grads) const {
  const int L = num_layers();
  Eigen::VectorXd delta = grad_out;
  for (int l = L - 1; l >= 0; --l) {
    if (l < L - 1) {
      // Through the activation of layer l.
      const Eigen::VectorXd& pre = cache.pre[l];
      const Eigen::VectorXd& post = cache.post[l];
      for (int i = 0; i < delta.size(); ++i)
        delta[i] *= act_grad(pre[i], post[i], act_);
    }
    const Eigen::VectorXd& in = l == 0 ? cache.input : cache.post[l - 1];
    grads.dW[l] += delta * in.transpose();
    grads.db[l] += delta;
    if (l > 0) delta = W_[l].transpose() * delta;
  }
}

Policy::Policy(int obs_dim, int action_dim, const std::vector<int>& hidden,
               Activation act, std::mt19937_64& rng) {
  std::vector<int> actor_sizes = {obs_dim};
  actor_sizes.insert(actor_sizes.end(), hidden.begin(), hidden.end());
  actor_sizes.push_back(action_dim);
  actor = Mlp(actor_sizes, act, rng);

  std::vector<int> critic_sizes = {obs_dim};
  critic_sizes.insert(critic_sizes.end(), hidden.begin(), hidden.end());
  critic_sizes.push_back(1);
  critic = Mlp(critic_sizes, act, rng);

  log_std = Eigen::VectorXd::Zero(action_dim);
}

Eigen::VectorXd Policy::mean_action(const Eigen::VectorXd& obs) const {
  return actor.forward(obs);
}

double Policy::value(const Eigen::VectorXd& obs) const {
  return critic.forward(obs)[0];
}

std::pair<Eigen::VectorXd, double> Policy::sample(const Eigen::VectorXd& obs,
                                                  std::mt19937_64& rng) const {
  const Eigen::VectorXd mean = mean_action(obs);
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::VectorXd a(mean.size());
  for (int i = 0; i < a.size(); ++i)
    a[i] = mean[i] + std::exp(log_std[i]) * normal(rng);
  return {a, log_prob(mean, a)};
}

double Policy::log_prob(const Eigen::VectorXd& mean,
                        const Eigen::VectorXd& action) const {
  double lp = 0.0;
  for (int i = 0; i < mean.size(); ++i) {
    const double std = std::exp(log_std[i]);
    const double z = (action[i] - mean[i]) / std;
    lp += -0.5 * z * z - log_std[i] - 0.5 * std::log(2.0 * M_PI);
  }
  return lp;
}

double Policy::entropy() const {
  double h = 0.0;
  for (int i = 0; i < log_std.size(); ++i)
    h += log_std[i] + 0.5 * std::log(2.0 * M_PI * std::exp(1.0));
  return h;
}

namespace {

json mlp_to_json(const Mlp& m) {
  json j;
  j["sizes"] = m.sizes();
  j["activation"] = m.activation() == Activation::Tanh ? "tanh" : "elu";
  json weights = json::array(), biases = json::array();
  for (int l = 0; l < m.num_layers(); ++l) {
    const auto& W = m.weights()[l];
    std::vector<double> flat(W.data(), W.data() + W.size());
    weights.push_back(flat);
    const auto& b = m.biases()[l];
    biases.push_back(std::vector<double>(b.data(), b.data() + b.size()));
  }
  j["weights"] = weights;
  j["biases"] = biases;
  return j;
}

Mlp mlp_from_json(const json& j) {
  const std::vector<int> sizes = j.at("sizes");
  const Activation act =
      j.at("activation") == "tanh" ? Activation::Tanh : Activation::Elu;
  std::mt19937_64 rng(0);
  Mlp m(sizes, act, rng);
  for (int l = 0; l < m.num_layers(); ++l) {
    const std::vector<double> flat = j.at("weights")[l];
    auto& W = m.weights()[l];
    if (static_cast<int>(flat.size()) != W.size())
      throw std::runtime_error("checkpoint weight shape mismatch");
    std::copy(flat.begin(), flat.end(), W.data());
    const std::vector<double> bv = j.at("biases")[l];
    auto& b = m.biases()[l];
    if (static_cast<int>(bv.size()) != b.size())
      throw std::runtime_error("checkpoint bias shape mismatch");
    std::copy(bv.begin(), bv.end(), b.data());
  }
  return m;
}

} // namespace

std::string Policy::serialize() const {
  json j;
  j["format"] = "gaitlab-policy";
  j["version"] = 1;
  j["actor"] = mlp_to_json(actor);
  j["critic"] = mlp_to_json(critic);
  j["log_std"] = std::vector<double>(log_std.data(), log_std.data() + log_std.size());
  return j.dump();
}

Policy Policy::deserialize(const std::string& text) {
  const json j = json::parse(text);
  if (j.at("format") != "gaitlab-policy")
    throw std::runtime_error("not a policy checkpoint");
  Policy p;
  p.actor = mlp_from_json(j.at("actor"));
  p.critic = mlp_from_json(j.at("critic"));
  const std::vector<double> ls = j.at("log_std");
  p.log_std = Eigen::Map<const Eigen::VectorXd>(ls.data(), ls.size());
  return p;
}

} // namespace gaitlab
