#include "apexrl/mlp.hpp"

#include <cmath>
#include <string>

#include "apexrl/errors.hpp"

namespace apexrl {

Mlp Mlp::make(const std::vector<int>& widths, std::mt19937_64& rng, double final_scale) {
  if (widths.size() < 2) throw ContractError("an MLP needs at least input and output widths");
  for (int w : widths) {
    if (w < 1) throw ContractError("layer widths must be positive");
  }
  Mlp net;
  net.widths = widths;
  const std::size_t layers = widths.size() - 1;
  net.W.resize(layers);
  net.b.resize(layers);
  for (std::size_t l = 0; l < layers; ++l) {
    const int fan_in = widths[l];
    const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    std::uniform_real_distribution<double> dist(-bound, bound);
    const double scale = (l + 1 == layers) ? final_scale : 1.0;
    net.W[l].resize(widths[l + 1], widths[l]);
    net.b[l].resize(widths[l + 1]);
    for (int r = 0; r < net.W[l].rows(); ++r) {
      for (int c = 0; c < net.W[l].cols(); ++c) net.W[l](r, c) = scale * dist(rng);
    }
    for (int r = 0; r < net.b[l].size(); ++r) net.b[l][r] = scale * dist(rng);
  }
  return net;
}

Eigen::MatrixXd forward(const Mlp& net, const Eigen::MatrixXd& input, Tape* tape) {
  if (input.rows() != net.input_dim()) {
    throw ContractError("forward: input has " + std::to_string(input.rows()) +
                        " rows, net expects " + std::to_string(net.input_dim()));
  }
  if (!input.allFinite()) throw ContractError("forward: non-finite input");

  if (tape) {
    tape->net = &net;
    tape->version = net.version;
    tape->acts.clear();
    tape->acts.reserve(net.n_layers() + 1);
    tape->acts.push_back(input);
  }
  Eigen::MatrixXd a = input;
  for (std::size_t l = 0; l < net.n_layers(); ++l) {
    Eigen::MatrixXd z = (net.W[l] * a).colwise() + net.b[l];
    a = (l + 1 == net.n_layers()) ? std::move(z) : z.array().tanh().matrix();
    if (tape) tape->acts.push_back(a);
  }
  return a;
}

Gradients Gradients::zeros_like(const Mlp& net) {
  Gradients g;
  g.dW.reserve(net.n_layers());
  g.db.reserve(net.n_layers());
  for (std::size_t l = 0; l < net.n_layers(); ++l) {
    g.dW.push_back(Eigen::MatrixXd::Zero(net.W[l].rows(), net.W[l].cols()));
    g.db.push_back(Eigen::VectorXd::Zero(net.b[l].size()));
  }
  return g;
}

void Gradients::add_scaled(const Gradients& other, double scale) {
  if (other.dW.size() != dW.size()) throw ContractError("gradient layer count mismatch");
  for (std::size_t l = 0; l < dW.size(); ++l) {
    dW[l] += scale * other.dW[l];
    db[l] += scale * other.db[l];
  }
}

bool Gradients::all_finite() const {
  for (const auto& m : dW) {
    if (!m.allFinite()) return false;
  }
  for (const auto& v : db) {
    if (!v.allFinite()) return false;
  }
  return true;
}

Eigen::MatrixXd backward(const Mlp& net, const Tape& tape, const Eigen::MatrixXd& output_grad,
                         Gradients& grads) {
  if (tape.net != &net || tape.version != net.version) {
    throw ContractError("backward: tape is stale or from a different net");
  }
  if (tape.acts.size() != net.n_layers() + 1) throw ContractError("backward: malformed tape");
  if (output_grad.rows() != net.output_dim() || output_grad.cols() != tape.acts[0].cols()) {
    throw ContractError("backward: output_grad shape mismatch");
  }
  if (grads.dW.size() != net.n_layers()) grads = Gradients::zeros_like(net);

  Eigen::MatrixXd g = output_grad;
  for (std::size_t l = net.n_layers(); l-- > 0;) {
    if (l + 1 != net.n_layers()) {
      // Crossing the tanh: derivative is 1 - a^2 with a the cached output.
      g = g.cwiseProduct((1.0 - tape.acts[l + 1].array().square()).matrix());
    }
    grads.dW[l] = g * tape.acts[l].transpose();
    grads.db[l] = g.rowwise().sum();
    g = net.W[l].transpose() * g;
  }
  return g;
}

AdamState AdamState::zeros_like(const Mlp& net) {
  AdamState s;
  for (std::size_t l = 0; l < net.n_layers(); ++l) {
    s.mW.push_back(Eigen::MatrixXd::Zero(net.W[l].rows(), net.W[l].cols()));
    s.vW.push_back(Eigen::MatrixXd::Zero(net.W[l].rows(), net.W[l].cols()));
    s.mb.push_back(Eigen::VectorXd::Zero(net.b[l].size()));
    s.vb.push_back(Eigen::VectorXd::Zero(net.b[l].size()));
  }
  return s;
}

void adam_step(Mlp& net, AdamState& opt, const Gradients& grads, double lr, double beta1,
               double beta2, double eps) {
  if (grads.dW.size() != net.n_layers() || opt.mW.size() != net.n_layers()) {
    throw ContractError("adam_step: gradient/optimizer layer count mismatch");
  }
  if (!grads.all_finite()) {
    ++opt.skipped;
    return;
  }
  ++opt.t;
  const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(opt.t));
  const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(opt.t));
  for (std::size_t l = 0; l < net.n_layers(); ++l) {
    opt.mW[l] = beta1 * opt.mW[l] + (1.0 - beta1) * grads.dW[l];
    opt.vW[l] = beta2 * opt.vW[l] + (1.0 - beta2) * grads.dW[l].cwiseProduct(grads.dW[l]);
    opt.mb[l] = beta1 * opt.mb[l] + (1.0 - beta1) * grads.db[l];
    opt.vb[l] = beta2 * opt.vb[l] + (1.0 - beta2) * grads.db[l].cwiseProduct(grads.db[l]);
    net.W[l] -= (lr * (opt.mW[l] / bc1).array() / ((opt.vW[l] / bc2).array().sqrt() + eps))
                    .matrix();
    net.b[l] -= (lr * (opt.mb[l] / bc1).array() / ((opt.vb[l] / bc2).array().sqrt() + eps))
                    .matrix();
  }
  ++net.version;
}

void soft_update(Mlp& target, const Mlp& online, double eps_polyak) {
  if (target.widths != online.widths) throw ContractError("soft_update: shape mismatch");
  for (std::size_t l = 0; l < target.n_layers(); ++l) {
    target.W[l] = eps_polyak * online.W[l] + (1.0 - eps_polyak) * target.W[l];
    target.b[l] = eps_polyak * online.b[l] + (1.0 - eps_polyak) * target.b[l];
  }
  ++target.version;
}

}  // namespace apexrl
