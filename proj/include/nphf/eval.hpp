#pragma once

#include <span>
#include <string>
#include <vector>

#include "nphf/dataset.hpp"
#include "nphf/model.hpp"

namespace nphf {

/// Ground truth / prediction pairs with provenance.
struct MetricPairSet {
  std::vector<double> truth;
  std::vector<double> predicted;
  std::vector<std::string> domain_ids;
  std::vector<std::size_t> walk_lens;

  std::size_t size() const { return truth.size(); }
  void add(double y, double yhat, std::string domain_id = "", std::size_t walk_len = 0);
};

/// Lin's concordance correlation with population (1/N) moments. Two constant series
/// with equal means give 1. Throws InsufficientData below two pairs.
double ccc(std::span<const double> truth, std::span<const double> predicted);
double ccc(const MetricPairSet& pairs);

/// Pearson correlation with population moments; 0 when either series is constant.
double pearson(std::span<const double> x, std::span<const double> y);

/// 1 − SS_res/SS_tot. Throws UndefinedVariance when the ground truth is constant.
double r_squared(std::span<const double> truth, std::span<const double> predicted);
double r_squared(const MetricPairSet& pairs);

struct EvalResult {
  MetricPairSet pairs;
  double ccc = 0.0;
  double r_squared = 0.0;
};

/// One batched forward pass over every record with a known optimal cost.
/// Throws ShapeError when the model's input layout does not fit the dataset.
EvalResult evaluate_model(const HeuristicModel& model, const Dataset& dataset);

/// y,yhat,domain_id,walk_len
std::string scatter_csv(const MetricPairSet& pairs);
std::string metrics_json(const EvalResult& result);

}  // namespace nphf
