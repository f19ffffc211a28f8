#pragma once

#include <string>
#include <vector>

#include "simfuse/cohort.hpp"

namespace simfuse {

enum class DtMethod { awoe, zscore, none };

const char* dt_method_name(DtMethod m);
DtMethod dt_method_from_name(const std::string& name);

// Adaptive weight-of-evidence encoding.  Features with at most
// `unique_threshold` distinct training values get one bin per value;
// otherwise equal-frequency binning with floor(n_train / q) rows per bin
// (at least 2 bins).  Each bin b maps to
//   ln((pos_b / POS + eps) / (neg_b / NEG + eps)).
struct AwoeBinning {
  std::string feature;
  bool per_unique_value = false;
  std::vector<double> edges;     // ascending internal boundaries; value goes to
                                 // the first bin whose edge is >= value
  std::vector<double> bin_awoe;  // edges.size() + 1 entries
  std::vector<long long> bin_pos, bin_neg;
  double epsilon = 1e-4;
  int q = 20;
  int unique_threshold = 100;
};

struct AwoeOptions {
  double epsilon = 1e-4;
  int q = 20;
  int unique_threshold = 100;
};

AwoeBinning fit_awoe(const std::vector<double>& values,
                     const std::vector<int>& labels, const std::string& feature,
                     const AwoeOptions& opt = {});
double apply_awoe(const AwoeBinning& b, double value);
std::size_t awoe_bin_index(const AwoeBinning& b, double value);

struct ZScoreParams {
  std::string feature;
  double mean = 0.0;
  double stddev = 1.0;  // population (divides by N)
};

ZScoreParams fit_zscore(const std::vector<double>& values,
                        const std::string& feature);
inline double apply_zscore(const ZScoreParams& p, double value) {
  return (value - p.mean) / p.stddev;
}

// Per-feature transform parameters fitted on the training split only.  The
// prediction target's own label column is never part of the static features,
// and all methods operate on the same feature set, so `none` differs from the
// others only by leaving values untouched.
struct FittedTransform {
  DtMethod method = DtMethod::none;
  std::vector<FeatureSpec> features;
  std::vector<AwoeBinning> binnings;    // parallel to features when awoe
  std::vector<ZScoreParams> zparams;    // parallel to features when zscore
};

FittedTransform fit_transform(const Cohort& c, DtMethod method, Target target,
                              const AwoeOptions& opt = {});
Cohort apply_transform(const Cohort& c, const FittedTransform& ft);
Cohort transform_cohort(const Cohort& c, DtMethod method, Target target,
                        const AwoeOptions& opt = {});

// JSON document describing fitted aWOE binnings (edges, per-bin counts and
// values, epsilon, q, mode per feature).
std::string binning_to_json(const FittedTransform& ft);

}  // namespace simfuse
