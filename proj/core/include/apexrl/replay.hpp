#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <random>
#include <vector>

namespace apexrl {

// Ring buffer of transitions with FIFO overwrite. Observations are stored as
// float32 to halve memory; everything is widened back to double on sampling.
// The reward and cost streams live in one aligned store (two logical views),
// so a sampled batch is always time-consistent across both.
class ReplayBuffer {
 public:
  ReplayBuffer(std::size_t capacity, int obs_dim, int act_dim = 2);

  // Returns false (and counts a rejection) when any field is non-finite.
  bool push(const Eigen::VectorXd& obs, const Eigen::VectorXd& action, double reward,
            const Eigen::VectorXd& next_obs, bool done, double c_omega_w, double c_beta_w);

  std::size_t size() const { return size_; }
  std::size_t capacity() const { return capacity_; }
  long long rejected() const { return rejected_; }
  int obs_dim() const { return obs_dim_; }
  int act_dim() const { return act_dim_; }

  struct Batch {
    Eigen::MatrixXd obs;       // obs_dim x B
    Eigen::MatrixXd action;    // act_dim x B
    Eigen::MatrixXd next_obs;  // obs_dim x B
    Eigen::RowVectorXd reward;
    Eigen::RowVectorXd done;  // 0 or 1
    Eigen::RowVectorXd c_omega;
    Eigen::RowVectorXd c_beta;
    Eigen::Index cols() const { return obs.cols(); }
  };

  // Uniform sampling without replacement within the batch. Throws
  // ContractError when fewer than `batch` transitions are stored.
  Batch sample(std::size_t batch, std::mt19937_64& rng) const;

  // Exposed for statistical tests of sampling uniformity.
  std::vector<std::size_t> sample_indices(std::size_t batch, std::mt19937_64& rng) const;

  Batch gather(const std::vector<std::size_t>& indices) const;

 private:
  std::size_t capacity_;
  int obs_dim_;
  int act_dim_;
  std::size_t size_ = 0;
  std::size_t head_ = 0;  // next write slot
  long long rejected_ = 0;

  std::vector<float> obs_;
  std::vector<float> next_obs_;
  std::vector<double> action_;
  std::vector<double> reward_;
  std::vector<std::uint8_t> done_;
  std::vector<double> c_omega_;
  std::vector<double> c_beta_;
};

}  // namespace apexrl
