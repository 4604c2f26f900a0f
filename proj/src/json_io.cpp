#include "csense/json_io.hpp"

#include <json.hpp>

#include <istream>
#include <ostream>

namespace csense {

using nlohmann::json;

namespace {

Vec<double> vec_from_json(const json& j) {
  Vec<double> v(static_cast<Index>(j.size()));
  for (Index i = 0; i < v.size(); ++i) v[i] = j[static_cast<std::size_t>(i)];
  return v;
}

json vec_to_json(const Vec<double>& v) {
  json j = json::array();
  for (Index i = 0; i < v.size(); ++i) j.push_back(v[i]);
  return j;
}

}  // namespace

Instance read_instance_json(std::istream& in) {
  json j;
  in >> j;
  const std::string kind_str = j.at("kind");
  const OperatorKind kind =
      kind_str == "toeplitz" ? OperatorKind::toeplitz : OperatorKind::circulant;
  const Index ambient = j.at("N");
  std::vector<Index> omega;
  for (const auto& v : j.at("omega")) omega.push_back(v.get<Index>());
  GeneratorVector<double> gen{vec_from_json(j.at("generator")), kind};
  if (gen.ambient_dim() != ambient)
    throw std::invalid_argument("instance: generator length inconsistent with N");
  const bool normalized = j.value("normalized", true);
  auto op = make_operator(gen, IndexSet(std::move(omega)), normalized);
  Vec<double> y = vec_from_json(j.at("y"));
  if (y.size() != op.rows())
    throw std::invalid_argument("instance: y length != |omega|");
  return {std::move(op), std::move(y)};
}

void write_instance_json(std::ostream& out, const StructuredOperator<double>& op,
                         const Vec<double>& y) {
  json j;
  j["kind"] = kind_name(op.kind());
  j["N"] = op.cols();
  j["omega"] = op.omega().values();
  j["generator"] = vec_to_json(op.generator().values);
  j["normalized"] = op.normalized();
  j["y"] = vec_to_json(y);
  out << j.dump(2) << '\n';
}

void write_signal_json(std::ostream& out, const SparseSignal<double>& signal) {
  json j;
  j["N"] = signal.ambient_dim;
  j["support"] = signal.support.values();
  j["signs"] = vec_to_json(signal.signs);
  j["magnitudes"] = vec_to_json(signal.magnitudes);
  out << j.dump(2) << '\n';
}

SparseSignal<double> read_signal_json(std::istream& in) {
  json j;
  in >> j;
  SparseSignal<double> sig;
  sig.ambient_dim = j.at("N");
  std::vector<Index> support;
  for (const auto& v : j.at("support")) support.push_back(v.get<Index>());
  sig.support = IndexSet(std::move(support));
  sig.signs = vec_from_json(j.at("signs"));
  sig.magnitudes = vec_from_json(j.at("magnitudes"));
  return sig;
}

void write_recovery_json(std::ostream& out, const RecoveryResult<double>& result) {
  json j;
  j["status"] = status_name(result.status);
  j["iterations"] = result.iterations;
  j["l1_value"] = result.l1_value;
  j["feas_residual"] = result.feas_residual;
  j["x_hat"] = vec_to_json(result.x_hat);
  out << j.dump(2) << '\n';
}

void write_fit_json(std::ostream& out, const ScalingFit& fit) {
  json j;
  j["N"] = fit.ambient;
  j["level"] = fit.level;
  j["exponent"] = fit.exponent;
  j["ci_lo"] = fit.ci_lo;
  j["ci_hi"] = fit.ci_hi;
  j["log_intercept"] = fit.log_intercept;
  j["bootstrap_reps"] = fit.bootstrap_reps;
  j["boundaries"] = json::array();
  for (const auto& b : fit.boundaries) {
    j["boundaries"].push_back(
        {{"s", b.sparsity}, {"n_star", b.n_star}, {"bracketed", b.bracketed}});
  }
  out << j.dump(2) << '\n';
}

}  // namespace csense
