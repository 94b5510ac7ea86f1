#include "nphf/eval.hpp"

#include <cmath>
#include <iomanip>
#include <sstream>

#include <json.hpp>

#include "nphf/errors.hpp"

namespace nphf {

namespace {

struct Moments {
  double mean_x = 0.0;
  double mean_y = 0.0;
  double var_x = 0.0;  // population
  double var_y = 0.0;
  double cov = 0.0;
};

void check_pairs(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw ShapeError("metric series differ in length");
  if (x.size() < 2) throw InsufficientData("metrics need at least two pairs");
  for (std::size_t i = 0; i < x.size(); ++i)
    if (!std::isfinite(x[i]) || !std::isfinite(y[i]))
      throw DomainError("non-finite value in metric input");
}

// Welford-style single pass; numerically stable for large offsets.
Moments moments(std::span<const double> x, std::span<const double> y) {
  Moments m;
  double m2x = 0.0, m2y = 0.0, cxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double k = static_cast<double>(i + 1);
    const double dx = x[i] - m.mean_x;
    const double dy = y[i] - m.mean_y;
    m.mean_x += dx / k;
    m.mean_y += dy / k;
    m2x += dx * (x[i] - m.mean_x);
    m2y += dy * (y[i] - m.mean_y);
    cxy += dx * (y[i] - m.mean_y);
  }
  const double n = static_cast<double>(x.size());
  m.var_x = m2x / n;
  m.var_y = m2y / n;
  m.cov = cxy / n;
  return m;
}

}  // namespace

void MetricPairSet::add(double y, double yhat, std::string domain_id, std::size_t walk_len) {
  truth.push_back(y);
  predicted.push_back(yhat);
  domain_ids.push_back(std::move(domain_id));
  walk_lens.push_back(walk_len);
}

double ccc(std::span<const double> truth, std::span<const double> predicted) {
  check_pairs(truth, predicted);
  const Moments m = moments(truth, predicted);
  const double gap = m.mean_x - m.mean_y;
  const double denom = m.var_x + m.var_y + gap * gap;
  if (denom == 0.0) return 1.0;
  return 2.0 * m.cov / denom;
}

double ccc(const MetricPairSet& pairs) { return ccc(pairs.truth, pairs.predicted); }

double pearson(std::span<const double> x, std::span<const double> y) {
  check_pairs(x, y);
  const Moments m = moments(x, y);
  if (m.var_x == 0.0 || m.var_y == 0.0) return 0.0;
  return m.cov / std::sqrt(m.var_x * m.var_y);
}

double r_squared(std::span<const double> truth, std::span<const double> predicted) {
  check_pairs(truth, predicted);
  const Moments m = moments(truth, predicted);
  if (m.var_x == 0.0) throw UndefinedVariance("ground truth is constant");
  double ss_res = 0.0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const double r = truth[i] - predicted[i];
    ss_res += r * r;
  }
  return 1.0 - ss_res / (m.var_x * static_cast<double>(truth.size()));
}

double r_squared(const MetricPairSet& pairs) { return r_squared(pairs.truth, pairs.predicted); }

EvalResult evaluate_model(const HeuristicModel& model, const Dataset& dataset) {
  const InputLayout layout = model.layout();
  std::vector<const DatasetRecord*> usable;
  for (const auto& rec : dataset.records)
    if (rec.opt_cost) usable.push_back(&rec);
  if (usable.empty()) throw InsufficientData("dataset has no records with known costs");

  const int n = dataset.domains[usable.front()->domain_index].domain.n();
  if (layout.n != 0 && layout.n != n)
    throw ShapeError("model trained for n=" + std::to_string(layout.n) + ", dataset has n=" +
                     std::to_string(n));
  const std::size_t dim = encoded_size(n, layout.with_actions);
  if (model.config().input_dim != dim)
    throw ShapeError("model input dim " + std::to_string(model.config().input_dim) +
                     " does not match dataset encoding " + std::to_string(dim));

  kernels::Matrix<float> inputs(usable.size(), dim);
  for (std::size_t i = 0; i < usable.size(); ++i) {
    const auto& rec = *usable[i];
    encode_into<float>(dataset.domains[rec.domain_index].domain, rec.state, layout.with_actions,
                       std::span<float>(inputs.flat().data() + i * dim, dim));
  }
  const std::vector<float> out = model.forward(inputs.cref());

  EvalResult result;
  for (std::size_t i = 0; i < usable.size(); ++i) {
    const auto& rec = *usable[i];
    result.pairs.add(static_cast<double>(*rec.opt_cost), static_cast<double>(out[i]),
                     dataset.domains[rec.domain_index].id, rec.walk_len);
  }
  result.ccc = ccc(result.pairs);
  result.r_squared = r_squared(result.pairs);
  return result;
}

std::string scatter_csv(const MetricPairSet& pairs) {
  std::ostringstream os;
  os << "y,yhat,domain_id,walk_len\n";
  os << std::setprecision(9);
  for (std::size_t i = 0; i < pairs.size(); ++i)
    os << pairs.truth[i] << ',' << pairs.predicted[i] << ',' << pairs.domain_ids[i] << ','
       << pairs.walk_lens[i] << '\n';
  return os.str();
}

std::string metrics_json(const EvalResult& result) {
  nlohmann::ordered_json j;
  j["pairs"] = result.pairs.size();
  j["ccc"] = result.ccc;
  j["r_squared"] = result.r_squared;
  j["pearson"] = pearson(result.pairs.truth, result.pairs.predicted);
  return j.dump(2) + "\n";
}

}  // namespace nphf
