#include "apexrl/replay.hpp"

#include <algorithm>
#include <cmath>

#include "apexrl/errors.hpp"

namespace apexrl {

ReplayBuffer::ReplayBuffer(std::size_t capacity, int obs_dim, int act_dim)
    : capacity_(capacity), obs_dim_(obs_dim), act_dim_(act_dim) {
  if (capacity < 1) throw ContractError("replay capacity must be at least 1");
  if (obs_dim < 1 || act_dim < 1) throw ContractError("replay dims must be positive");
  obs_.resize(capacity * static_cast<std::size_t>(obs_dim));
  next_obs_.resize(capacity * static_cast<std::size_t>(obs_dim));
  action_.resize(capacity * static_cast<std::size_t>(act_dim));
  reward_.resize(capacity);
  done_.resize(capacity);
  c_omega_.resize(capacity);
  c_beta_.resize(capacity);
}

bool ReplayBuffer::push(const Eigen::VectorXd& obs, const Eigen::VectorXd& action, double reward,
                        const Eigen::VectorXd& next_obs, bool done, double c_omega_w,
                        double c_beta_w) {
  if (obs.size() != obs_dim_ || next_obs.size() != obs_dim_ || action.size() != act_dim_) {
    throw ContractError("push: transition shape mismatch");
  }
  const bool finite = obs.allFinite() && action.allFinite() && next_obs.allFinite() &&
                      std::isfinite(reward) && std::isfinite(c_omega_w) && std::isfinite(c_beta_w);
  if (!finite) {
    ++rejected_;
    return false;
  }

  const std::size_t slot = head_;
  for (int i = 0; i < obs_dim_; ++i) {
    obs_[slot * obs_dim_ + i] = static_cast<float>(obs[i]);
    next_obs_[slot * obs_dim_ + i] = static_cast<float>(next_obs[i]);
  }
  for (int i = 0; i < act_dim_; ++i) action_[slot * act_dim_ + i] = action[i];
  reward_[slot] = reward;
  done_[slot] = done ? 1 : 0;
  c_omega_[slot] = c_omega_w;
  c_beta_[slot] = c_beta_w;

  head_ = (head_ + 1) % capacity_;
  size_ = std::min(size_ + 1, capacity_);
  return true;
}

std::vector<std::size_t> ReplayBuffer::sample_indices(std::size_t batch,
                                                      std::mt19937_64& rng) const {
  if (batch > size_) throw ContractError("sample: batch larger than stored transitions");
  // Floyd's algorithm: `batch` distinct indices drawn uniformly from [0, size).
  std::vector<std::size_t> picked;
  picked.reserve(batch);
  for (std::size_t j = size_ - batch; j < size_; ++j) {
    std::uniform_int_distribution<std::size_t> dist(0, j);
    const std::size_t t = dist(rng);
    if (std::find(picked.begin(), picked.end(), t) == picked.end()) {
      picked.push_back(t);
    } else {
      picked.push_back(j);
    }
  }
  return picked;
}

ReplayBuffer::Batch ReplayBuffer::gather(const std::vector<std::size_t>& indices) const {
  const auto b = static_cast<Eigen::Index>(indices.size());
  Batch out;
  out.obs.resize(obs_dim_, b);
  out.next_obs.resize(obs_dim_, b);
  out.action.resize(act_dim_, b);
  out.reward.resize(b);
  out.done.resize(b);
  out.c_omega.resize(b);
  out.c_beta.resize(b);
  for (Eigen::Index k = 0; k < b; ++k) {
    const std::size_t slot = indices[static_cast<std::size_t>(k)];
    for (int i = 0; i < obs_dim_; ++i) {
      out.obs(i, k) = static_cast<double>(obs_[slot * obs_dim_ + i]);
      out.next_obs(i, k) = static_cast<double>(next_obs_[slot * obs_dim_ + i]);
    }
    for (int i = 0; i < act_dim_; ++i) out.action(i, k) = action_[slot * act_dim_ + i];
    out.reward[k] = reward_[slot];
    out.done[k] = done_[slot] ? 1.0 : 0.0;
    out.c_omega[k] = c_omega_[slot];
    out.c_beta[k] = c_beta_[slot];
  }
  return out;
}

ReplayBuffer::Batch ReplayBuffer::sample(std::size_t batch, std::mt19937_64& rng) const {
  return gather(sample_indices(batch, rng));
}

}  // namespace apexrl
