#include "simfuse/transform.hpp"

#include <algorithm>
#include <cmath>

#include "json.hpp"
#include "simfuse/error.hpp"

namespace simfuse {

const char* dt_method_name(DtMethod m) {
  switch (m) {
    case DtMethod::awoe: return "awoe";
    case DtMethod::zscore: return "zscore";
    case DtMethod::none: return "none";
  }
  return "?";
}

DtMethod dt_method_from_name(const std::string& name) {
  if (name == "awoe") return DtMethod::awoe;
  if (name == "zscore") return DtMethod::zscore;
  if (name == "none") return DtMethod::none;
  throw Error(Errc::invalid_parameter, "unknown transform '" + name + "'");
}

std::size_t awoe_bin_index(const AwoeBinning& b, double value) {
  return static_cast<std::size_t>(
      std::lower_bound(b.edges.begin(), b.edges.end(), value) -
      b.edges.begin());
}

double apply_awoe(const AwoeBinning& b, double value) {
  return b.bin_awoe[awoe_bin_index(b, value)];
}

AwoeBinning fit_awoe(const std::vector<double>& values,
                     const std::vector<int>& labels, const std::string& feature,
                     const AwoeOptions& opt) {
  if (values.empty() || values.size() != labels.size())
    throw Error(Errc::invalid_parameter,
                "awoe fit needs matching non-empty values/labels for '" +
                    feature + "'");
  long long pos_total = 0, neg_total = 0;
  for (int l : labels) (l ? pos_total : neg_total)++;
  if (pos_total == 0)
    throw Error(Errc::no_positive_events,
                "no positive training events for '" + feature + "'");
  if (neg_total == 0)
    throw Error(Errc::no_negative_events,
                "no negative training events for '" + feature + "'");

  AwoeBinning b;
  b.feature = feature;
  b.epsilon = opt.epsilon;
  b.q = opt.q;
  b.unique_threshold = opt.unique_threshold;

  std::vector<double> sorted(values);
  std::sort(sorted.begin(), sorted.end());
  std::vector<double> uniq(sorted);
  uniq.erase(std::unique(uniq.begin(), uniq.end()), uniq.end());

  if (uniq.size() <= static_cast<std::size_t>(opt.unique_threshold)) {
    b.per_unique_value = true;
    b.edges.reserve(uniq.size() > 0 ? uniq.size() - 1 : 0);
    for (std::size_t i = 0; i + 1 < uniq.size(); ++i)
      b.edges.push_back(0.5 * (uniq[i] + uniq[i + 1]));
  } else {
    b.per_unique_value = false;
    const std::size_t n = sorted.size();
    const std::size_t n_bins =
        std::max<std::size_t>(2, n / static_cast<std::size_t>(opt.q));
    for (std::size_t k = 1; k < n_bins; ++k)
      b.edges.push_back(sorted[k * n / n_bins - 1]);
    b.edges.erase(std::unique(b.edges.begin(), b.edges.end()), b.edges.end());
  }

  const std::size_t n_bins = b.edges.size() + 1;
  b.bin_pos.assign(n_bins, 0);
  b.bin_neg.assign(n_bins, 0);
  for (std::size_t i = 0; i < values.size(); ++i) {
    const std::size_t bin = awoe_bin_index(b, values[i]);
    (labels[i] ? b.bin_pos[bin] : b.bin_neg[bin])++;
  }
  b.bin_awoe.resize(n_bins);
  for (std::size_t bin = 0; bin < n_bins; ++bin) {
    const double pos_rate =
        static_cast<double>(b.bin_pos[bin]) / static_cast<double>(pos_total);
    const double neg_rate =
        static_cast<double>(b.bin_neg[bin]) / static_cast<double>(neg_total);
    b.bin_awoe[bin] =
        std::log((pos_rate + b.epsilon) / (neg_rate + b.epsilon));
  }
  return b;
}

ZScoreParams fit_zscore(const std::vector<double>& values,
                        const std::string& feature) {
  if (values.empty())
    throw Error(Errc::empty_input, "zscore fit on empty '" + feature + "'");
  const double n = static_cast<double>(values.size());
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= n;
  double var = 0.0;
  for (double v : values) var += (v - mean) * (v - mean);
  var /= n;
  const double sd = std::sqrt(var);
  if (sd < 1e-12 * std::max(1.0, std::abs(mean)))
    throw Error(Errc::degenerate_feature,
                "training std of '" + feature + "' is 0");
  return {feature, mean, sd};
}

FittedTransform fit_transform(const Cohort& c, DtMethod method, Target target,
                              const AwoeOptions& opt) {
  if (!c.split)
    throw Error(Errc::invalid_parameter, "cohort has no train/test split");
  FittedTransform ft;
  ft.method = method;
  ft.features = c.schema;
  if (method == DtMethod::none) return ft;

  const auto& train_ids = c.split->train_ids;
  if (train_ids.empty())
    throw Error(Errc::cohort_too_small, "empty training split");

  std::vector<int> labels;
  labels.reserve(train_ids.size());
  for (const auto& id : train_ids) labels.push_back(c.label(id, target));

  for (std::size_t f = 0; f < c.schema.size(); ++f) {
    std::vector<double> values;
    values.reserve(train_ids.size());
    for (const auto& id : train_ids) values.push_back(c.at(id).statics[f]);
    if (method == DtMethod::awoe) {
      ft.binnings.push_back(fit_awoe(values, labels, c.schema[f].name, opt));
    } else {
      ft.zparams.push_back(fit_zscore(values, c.schema[f].name));
    }
  }
  return ft;
}

Cohort apply_transform(const Cohort& c, const FittedTransform& ft) {
  Cohort out;
  out.schema = ft.features;
  if (ft.method != DtMethod::none) {
    for (auto& f : out.schema) f.kind = FeatureKind::numeric;
  }
  out.split = c.split;
  out.records = c.records;
  if (ft.method != DtMethod::none) {
    for (auto& r : out.records) {
      for (std::size_t f = 0; f < r.statics.size(); ++f) {
        r.statics[f] = ft.method == DtMethod::awoe
                           ? apply_awoe(ft.binnings[f], r.statics[f])
                           : apply_zscore(ft.zparams[f], r.statics[f]);
      }
    }
  }
  out.rebuild_index();
  return out;
}

Cohort transform_cohort(const Cohort& c, DtMethod method, Target target,
                        const AwoeOptions& opt) {
  return apply_transform(c, fit_transform(c, method, target, opt));
}

std::string binning_to_json(const FittedTransform& ft) {
  nlohmann::json doc;
  doc["method"] = dt_method_name(ft.method);
  auto& feats = doc["features"] = nlohmann::json::array();
  for (const auto& b : ft.binnings) {
    nlohmann::json jb;
    jb["feature"] = b.feature;
    jb["mode"] = b.per_unique_value ? "per_unique_value" : "equal_frequency";
    jb["epsilon"] = b.epsilon;
    jb["q"] = b.q;
    jb["unique_threshold"] = b.unique_threshold;
    jb["edges"] = b.edges;
    jb["awoe"] = b.bin_awoe;
    jb["pos"] = b.bin_pos;
    jb["neg"] = b.bin_neg;
    feats.push_back(std::move(jb));
  }
  for (const auto& z : ft.zparams) {
    nlohmann::json jz;
    jz["feature"] = z.feature;
    jz["mean"] = z.mean;
    jz["stddev"] = z.stddev;
    feats.push_back(std::move(jz));
  }
  return doc.dump(2);
}

}  // namespace simfuse
