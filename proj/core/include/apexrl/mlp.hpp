#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <random>
#include <vector>

namespace apexrl {

// Dense MLP with tanh hidden layers and a linear output layer. Batches are
// stored column-wise (input_dim x batch). Parameters are mutated only by
// adam_step / soft_update, which bump `version` so stale tapes are caught.
struct Mlp {
  std::vector<int> widths;         // input, hidden..., output
  std::vector<Eigen::MatrixXd> W;  // W[l] is widths[l+1] x widths[l]
  std::vector<Eigen::VectorXd> b;
  std::uint64_t version = 0;

  // Uniform fan-in initialization; the last layer is scaled by final_scale
  // (use a small value for policy heads so initial actions sit near zero).
  static Mlp make(const std::vector<int>& widths, std::mt19937_64& rng,
                  double final_scale = 1.0);

  int input_dim() const { return widths.front(); }
  int output_dim() const { return widths.back(); }
  std::size_t n_layers() const { return W.size(); }
};

// Activation cache from one forward pass: acts[0] is the input, acts[l+1]
// the post-activation output of layer l (post-tanh for hidden, raw for the
// last). Valid only against the same net at the same parameter version.
struct Tape {
  const Mlp* net = nullptr;
  std::uint64_t version = 0;
  std::vector<Eigen::MatrixXd> acts;
};

// Forward pass; fills the tape if given. Throws ContractError on a shape
// mismatch or non-finite input.
Eigen::MatrixXd forward(const Mlp& net, const Eigen::MatrixXd& input, Tape* tape = nullptr);

struct Gradients {
  std::vector<Eigen::MatrixXd> dW;
  std::vector<Eigen::VectorXd> db;

  static Gradients zeros_like(const Mlp& net);
  void add_scaled(const Gradients& other, double scale);
  bool all_finite() const;
};

// Exact reverse-mode pass. output_grad is dLoss/dOutput (output_dim x batch);
// parameter gradients are summed over the batch; the return value is the
// gradient w.r.t. the input (input_dim x batch). Throws ContractError if the
// tape does not match the net's current version.
Eigen::MatrixXd backward(const Mlp& net, const Tape& tape, const Eigen::MatrixXd& output_grad,
                         Gradients& grads);

struct AdamState {
  std::vector<Eigen::MatrixXd> mW, vW;
  std::vector<Eigen::VectorXd> mb, vb;
  long long t = 0;
  long long skipped = 0;  // non-finite gradient events (update dropped)

  static AdamState zeros_like(const Mlp& net);
};

// One Adam update with bias correction. A non-finite gradient skips the
// update entirely and increments the skip counter.
void adam_step(Mlp& net, AdamState& opt, const Gradients& grads, double lr, double beta1 = 0.9,
               double beta2 = 0.999, double eps = 1e-8);

// Polyak update: target <- eps*online + (1-eps)*target.
void soft_update(Mlp& target, const Mlp& online, double eps_polyak);

}  // namespace apexrl
