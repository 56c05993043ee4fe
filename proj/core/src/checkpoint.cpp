#include "apexrl/checkpoint.hpp"

#include <fstream>
#include <utility>
#include <vector>

#include <json.hpp>

#include "apexrl/errors.hpp"

namespace apexrl {
namespace {

using nlohmann::json;

constexpr int kSchemaVersion = 1;

json matrix_to_json(const Eigen::MatrixXd& m) {
  std::vector<double> flat(static_cast<std::size_t>(m.size()));
  // Row-major flattening keeps the dump diffable layer by layer.
  Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
      flat.data(), m.rows(), m.cols()) = m;
  return json(flat);
}

Eigen::MatrixXd matrix_from_json(const json& j, Eigen::Index rows, Eigen::Index cols,
                                 const std::string& where) {
  if (!j.is_array() || j.size() != static_cast<std::size_t>(rows * cols)) {
    throw ParseError(where + ": expected " + std::to_string(rows * cols) + " values");
  }
  Eigen::MatrixXd m(rows, cols);
  std::size_t k = 0;
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) {
      const json& v = j[k++];
      if (!v.is_number()) throw ParseError(where + ": non-numeric entry");
      m(r, c) = v.get<double>();
    }
  }
  return m;
}

json vector_to_json(const Eigen::VectorXd& v) {
  return json(std::vector<double>(v.data(), v.data() + v.size()));
}

Eigen::VectorXd vector_from_json(const json& j, Eigen::Index size, const std::string& where) {
  if (!j.is_array() || j.size() != static_cast<std::size_t>(size)) {
    throw ParseError(where + ": expected " + std::to_string(size) + " values");
  }
  Eigen::VectorXd v(size);
  for (Eigen::Index i = 0; i < size; ++i) {
    const json& e = j[static_cast<std::size_t>(i)];
    if (!e.is_number()) throw ParseError(where + ": non-numeric entry");
    v[i] = e.get<double>();
  }
  return v;
}

json net_to_json(const Mlp& net) {
  json j;
  j["widths"] = net.widths;
  json w = json::array();
  json b = json::array();
  for (std::size_t l = 0; l < net.n_layers(); ++l) {
    w.push_back(matrix_to_json(net.W[l]));
    b.push_back(vector_to_json(net.b[l]));
  }
  j["W"] = std::move(w);
  j["b"] = std::move(b);
  return j;
}

Mlp net_from_json(const json& j, const std::string& name) {
  if (!j.is_object() || !j.contains("widths") || !j.contains("W") || !j.contains("b")) {
    throw ParseError("nets." + name + ": missing widths/W/b");
  }
  Mlp net;
  net.widths = j.at("widths").get<std::vector<int>>();
  if (net.widths.size() < 2) throw ParseError("nets." + name + ": needs at least two widths");
  const std::size_t layers = net.widths.size() - 1;
  const json& w = j.at("W");
  const json& b = j.at("b");
  if (w.size() != layers || b.size() != layers) {
    throw ParseError("nets." + name + ": layer count mismatch");
  }
  for (std::size_t l = 0; l < layers; ++l) {
    const std::string where = "nets." + name + "[" + std::to_string(l) + "]";
    net.W.push_back(matrix_from_json(w[l], net.widths[l + 1], net.widths[l], where + ".W"));
    net.b.push_back(vector_from_json(b[l], net.widths[l + 1], where + ".b"));
  }
  return net;
}

json opt_to_json(const AdamState& opt) {
  json j;
  j["t"] = opt.t;
  j["skipped"] = opt.skipped;
  json mw = json::array(), vw = json::array(), mb = json::array(), vb = json::array();
  for (std::size_t l = 0; l < opt.mW.size(); ++l) {
    mw.push_back(matrix_to_json(opt.mW[l]));
    vw.push_back(matrix_to_json(opt.vW[l]));
    mb.push_back(vector_to_json(opt.mb[l]));
    vb.push_back(vector_to_json(opt.vb[l]));
  }
  j["mW"] = std::move(mw);
  j["vW"] = std::move(vw);
  j["mb"] = std::move(mb);
  j["vb"] = std::move(vb);
  return j;
}

AdamState opt_from_json(const json& j, const Mlp& net, const std::string& name) {
  AdamState opt;
  if (!j.is_object()) throw ParseError("opt." + name + ": expected object");
  opt.t = j.at("t").get<long long>();
  opt.skipped = j.at("skipped").get<long long>();
  const json& mw = j.at("mW");
  const json& vw = j.at("vW");
  const json& mb = j.at("mb");
  const json& vb = j.at("vb");
  const std::size_t layers = net.n_layers();
  if (mw.size() != layers || vw.size() != layers || mb.size() != layers || vb.size() != layers) {
    throw ParseError("opt." + name + ": layer count mismatch");
  }
  for (std::size_t l = 0; l < layers; ++l) {
    const std::string where = "opt." + name + "[" + std::to_string(l) + "]";
    opt.mW.push_back(matrix_from_json(mw[l], net.W[l].rows(), net.W[l].cols(), where + ".mW"));
    opt.vW.push_back(matrix_from_json(vw[l], net.W[l].rows(), net.W[l].cols(), where + ".vW"));
    opt.mb.push_back(vector_from_json(mb[l], net.b[l].size(), where + ".mb"));
    opt.vb.push_back(vector_from_json(vb[l], net.b[l].size(), where + ".vb"));
  }
  return opt;
}

Checkpoint load_fields(const json& j);

}  // namespace

void save_checkpoint(const std::string& path, const LearnerNets& nets,
                     const LagrangianState& lag) {
  json j;
  j["version"] = kSchemaVersion;
  j["log_upsilon"] = nets.log_upsilon;
  j["lambda"] = {{"omega", lag.lambda_omega},
                 {"beta", lag.lambda_beta},
                 {"lr_lambda", lag.lr_lambda},
                 {"d_omega", lag.d_omega},
                 {"d_beta", lag.d_beta}};
  json n;
  n["actor"] = net_to_json(nets.actor);
  n["q1"] = net_to_json(nets.q1);
  n["q2"] = net_to_json(nets.q2);
  n["q1_t"] = net_to_json(nets.q1_t);
  n["q2_t"] = net_to_json(nets.q2_t);
  n["qc_omega1"] = net_to_json(nets.qc_omega1);
  n["qc_omega2"] = net_to_json(nets.qc_omega2);
  n["qc_omega1_t"] = net_to_json(nets.qc_omega1_t);
  n["qc_omega2_t"] = net_to_json(nets.qc_omega2_t);
  n["qc_beta1"] = net_to_json(nets.qc_beta1);
  n["qc_beta2"] = net_to_json(nets.qc_beta2);
  n["qc_beta1_t"] = net_to_json(nets.qc_beta1_t);
  n["qc_beta2_t"] = net_to_json(nets.qc_beta2_t);
  j["nets"] = std::move(n);
  json o;
  o["actor"] = opt_to_json(nets.opt_actor);
  o["q1"] = opt_to_json(nets.opt_q1);
  o["q2"] = opt_to_json(nets.opt_q2);
  o["qc_omega1"] = opt_to_json(nets.opt_qc_omega1);
  o["qc_omega2"] = opt_to_json(nets.opt_qc_omega2);
  o["qc_beta1"] = opt_to_json(nets.opt_qc_beta1);
  o["qc_beta2"] = opt_to_json(nets.opt_qc_beta2);
  j["opt"] = std::move(o);

  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParseError("cannot open for writing: " + path);
  out << j.dump() << '\n';
  if (!out) throw ParseError("write failed: " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open checkpoint: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw ParseError(path + ": " + e.what());
  }
  if (!j.is_object() || !j.contains("version")) throw ParseError(path + ": missing version");
  if (j.at("version").get<int>() != kSchemaVersion) {
    throw ParseError(path + ": unsupported checkpoint version");
  }

  try {
    return load_fields(j);
  } catch (const json::exception& e) {
    throw ParseError(path + ": " + e.what());
  }
}

namespace {

Checkpoint load_fields(const json& j) {
  Checkpoint ck;
  ck.nets.log_upsilon = j.at("log_upsilon").get<double>();
  const json& lam = j.at("lambda");
  ck.lag.lambda_omega = lam.at("omega").get<double>();
  ck.lag.lambda_beta = lam.at("beta").get<double>();
  ck.lag.lr_lambda = lam.at("lr_lambda").get<double>();
  ck.lag.d_omega = lam.at("d_omega").get<double>();
  ck.lag.d_beta = lam.at("d_beta").get<double>();

  const json& n = j.at("nets");
  ck.nets.actor = net_from_json(n.at("actor"), "actor");
  ck.nets.q1 = net_from_json(n.at("q1"), "q1");
  ck.nets.q2 = net_from_json(n.at("q2"), "q2");
  ck.nets.q1_t = net_from_json(n.at("q1_t"), "q1_t");
  ck.nets.q2_t = net_from_json(n.at("q2_t"), "q2_t");
  ck.nets.qc_omega1 = net_from_json(n.at("qc_omega1"), "qc_omega1");
  ck.nets.qc_omega2 = net_from_json(n.at("qc_omega2"), "qc_omega2");
  ck.nets.qc_omega1_t = net_from_json(n.at("qc_omega1_t"), "qc_omega1_t");
  ck.nets.qc_omega2_t = net_from_json(n.at("qc_omega2_t"), "qc_omega2_t");
  ck.nets.qc_beta1 = net_from_json(n.at("qc_beta1"), "qc_beta1");
  ck.nets.qc_beta2 = net_from_json(n.at("qc_beta2"), "qc_beta2");
  ck.nets.qc_beta1_t = net_from_json(n.at("qc_beta1_t"), "qc_beta1_t");
  ck.nets.qc_beta2_t = net_from_json(n.at("qc_beta2_t"), "qc_beta2_t");

  const json& o = j.at("opt");
  ck.nets.opt_actor = opt_from_json(o.at("actor"), ck.nets.actor, "actor");
  ck.nets.opt_q1 = opt_from_json(o.at("q1"), ck.nets.q1, "q1");
  ck.nets.opt_q2 = opt_from_json(o.at("q2"), ck.nets.q2, "q2");
  ck.nets.opt_qc_omega1 = opt_from_json(o.at("qc_omega1"), ck.nets.qc_omega1, "qc_omega1");
  ck.nets.opt_qc_omega2 = opt_from_json(o.at("qc_omega2"), ck.nets.qc_omega2, "qc_omega2");
  ck.nets.opt_qc_beta1 = opt_from_json(o.at("qc_beta1"), ck.nets.qc_beta1, "qc_beta1");
  ck.nets.opt_qc_beta2 = opt_from_json(o.at("qc_beta2"), ck.nets.qc_beta2, "qc_beta2");
  return ck;
}

}  // namespace

}  // namespace apexrl
