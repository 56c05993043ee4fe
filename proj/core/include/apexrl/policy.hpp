#pragma once

#include <Eigen/Dense>

namespace apexrl {

inline constexpr double kLogStdMin = -20.0;
inline constexpr double kLogStdMax = 2.0;
inline constexpr double kSquashEps = 1e-6;

// Distribution parameters split out of a raw actor output (2*act_dim x B):
// the first act_dim rows are means, the rest log standard deviations,
// clamped into [kLogStdMin, kLogStdMax]. `clamp_mask` marks clamped entries
// (their gradient is zero).
struct PolicyHead {
  Eigen::MatrixXd mean;
  Eigen::MatrixXd log_std;
  Eigen::ArrayXXd clamp_mask;
};

PolicyHead split_head(const Eigen::MatrixXd& raw);

// Tanh-squashed Gaussian sample via the reparameterization z = mean +
// std*noise. log_prob is the Gaussian log-density of z minus the squash
// correction sum log(1 - tanh(z)^2 + eps), one scalar per batch column.
struct PolicySample {
  Eigen::MatrixXd z;
  Eigen::MatrixXd action;  // strictly inside (-1, 1)
  Eigen::MatrixXd noise;
  Eigen::RowVectorXd log_prob;
};

// Pass zero noise for deterministic evaluation (action = tanh(mean)).
PolicySample policy_sample(const PolicyHead& head, const Eigen::MatrixXd& noise);

// Gradient w.r.t. the raw head output of
//   sum_j [ upsilon * log_prob(j) + sum_i dL_daction(i,j) * action(i,j) ],
// where the action depends on the head through the reparameterized sample
// (noise held fixed). Any batch normalization is the caller's business: fold
// 1/B into upsilon and dL_daction. Returns a (2*act_dim x B) matrix.
Eigen::MatrixXd policy_backward(const PolicyHead& head, const PolicySample& sample,
                                const Eigen::MatrixXd& dL_daction, double upsilon);

}  // namespace apexrl
