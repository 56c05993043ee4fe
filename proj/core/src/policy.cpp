#include "apexrl/policy.hpp"

#include <cmath>

#include "apexrl/errors.hpp"
#include "apexrl/geometry.hpp"

namespace apexrl {

PolicyHead split_head(const Eigen::MatrixXd& raw) {
  if (raw.rows() % 2 != 0) throw ContractError("policy head needs an even output dimension");
  const Eigen::Index act_dim = raw.rows() / 2;
  PolicyHead head;
  head.mean = raw.topRows(act_dim);
  const Eigen::ArrayXXd raw_log_std = raw.bottomRows(act_dim).array();
  head.log_std = raw_log_std.max(kLogStdMin).min(kLogStdMax).matrix();
  head.clamp_mask = ((raw_log_std < kLogStdMin) || (raw_log_std > kLogStdMax)).cast<double>();
  return head;
}

PolicySample policy_sample(const PolicyHead& head, const Eigen::MatrixXd& noise) {
  if (noise.rows() != head.mean.rows() || noise.cols() != head.mean.cols()) {
    throw ContractError("policy_sample: noise shape mismatch");
  }
  PolicySample s;
  const Eigen::ArrayXXd std = head.log_std.array().exp();
  s.noise = noise;
  s.z = (head.mean.array() + std * noise.array()).matrix();
  s.action = s.z.array().tanh().matrix();

  // Gaussian log-density of z (the (z-mean)/std ratio is exactly the noise)
  // plus the tanh change-of-variables correction.
  const double log_sqrt_2pi = 0.5 * std::log(2.0 * kPi);
  const Eigen::ArrayXXd sq = 1.0 - s.action.array().square();
  const Eigen::ArrayXXd per_dim = -log_sqrt_2pi - head.log_std.array() -
                                  0.5 * noise.array().square() - (sq + kSquashEps).log();
  s.log_prob = per_dim.colwise().sum().matrix();
  return s;
}

Eigen::MatrixXd policy_backward(const PolicyHead& head, const PolicySample& sample,
                                const Eigen::MatrixXd& dL_daction, double upsilon) {
  if (dL_daction.rows() != head.mean.rows() || dL_daction.cols() != head.mean.cols()) {
    throw ContractError("policy_backward: dL_daction shape mismatch");
  }
  const Eigen::ArrayXXd a = sample.action.array();
  const Eigen::ArrayXXd one_minus_a2 = 1.0 - a.square();
  const Eigen::ArrayXXd std = head.log_std.array().exp();

  // d log_prob / dz: only the squash correction depends on z once the
  // Gaussian term is written in the fixed noise (reparameterization).
  const Eigen::ArrayXXd dlogp_dz = 2.0 * a * one_minus_a2 / (one_minus_a2 + kSquashEps);
  const Eigen::ArrayXXd g_z = upsilon * dlogp_dz + dL_daction.array() * one_minus_a2;

  const Eigen::ArrayXXd d_mean = g_z;  // dz/dmean = 1
  // -upsilon from the -log_std term of log_prob; dz/dlog_std = std*noise.
  Eigen::ArrayXXd d_log_std = -upsilon + g_z * std * sample.noise.array();
  d_log_std *= (1.0 - head.clamp_mask);  // clamped entries get no gradient

  Eigen::MatrixXd d_raw(2 * head.mean.rows(), head.mean.cols());
  d_raw.topRows(head.mean.rows()) = d_mean.matrix();
  d_raw.bottomRows(head.mean.rows()) = d_log_std.matrix();
  return d_raw;
}

}  // namespace apexrl
