#include "simfuse/fusion.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "simfuse/csv.hpp"
#include "simfuse/error.hpp"

namespace simfuse {

std::vector<Neighbor> nearest_neighbors(const VariateDistanceBlock& block,
                                        const std::string& target_id,
                                        int lambda) {
  if (lambda < 1)
    throw Error(Errc::invalid_parameter, "lambda must be >= 1");
  std::size_t row = block.target_ids.size();
  for (std::size_t t = 0; t < block.target_ids.size(); ++t) {
    if (block.target_ids[t] == target_id) {
      row = t;
      break;
    }
  }
  if (row == block.target_ids.size())
    throw Error(Errc::unknown_target, "target '" + target_id +
                                          "' not in block for " +
                                          block.variate_id);

  std::vector<Neighbor> all;
  all.reserve(block.candidate_ids[row].size());
  for (std::size_t k = 0; k < block.candidate_ids[row].size(); ++k) {
    const double d = block.distances[row][k];
    if (std::isnan(d)) continue;
    all.push_back({block.candidate_ids[row][k], d});
  }
  std::sort(all.begin(), all.end(), [](const Neighbor& a, const Neighbor& b) {
    if (a.distance != b.distance) return a.distance < b.distance;
    return a.id < b.id;
  });
  if (all.size() > static_cast<std::size_t>(lambda))
    all.resize(static_cast<std::size_t>(lambda));
  return all;
}

NeighborhoodFusion fuse(const std::vector<VariateDistanceBlock>& blocks,
                        const std::string& target_id, int lambda,
                        const Cohort& c, Target target) {
  NeighborhoodFusion f;
  f.target_id = target_id;
  for (const auto& block : blocks) {
    auto nn = nearest_neighbors(block, target_id, lambda);
    for (const auto& n : nn) {
      if (c.label(n.id, target)) {
        ++f.votes_pos;
      } else {
        ++f.votes_neg;
      }
    }
    f.per_variate.emplace_back(block.variate_id, std::move(nn));
  }
  return f;
}

Prediction predict(const NeighborhoodFusion& f, const Cohort& c, Target target,
                   double train_pos_rate) {
  Prediction p;
  p.patient_id = f.target_id;
  p.true_label = c.label(f.target_id, target);
  p.votes_pos = f.votes_pos;
  p.votes_neg = f.votes_neg;

  const long long total = f.votes_pos + f.votes_neg;
  if (total == 0) {
    p.predicted = train_pos_rate >= 0.5 ? 1 : 0;
    p.score = train_pos_rate;
    return p;
  }
  p.score = static_cast<double>(f.votes_pos) / static_cast<double>(total);
  if (f.votes_pos != f.votes_neg) {
    p.predicted = f.votes_pos > f.votes_neg ? 1 : 0;
    return p;
  }
  // tie: follow the globally nearest neighbor across every variate
  const Neighbor* best = nullptr;
  for (const auto& [vid, nn] : f.per_variate) {
    for (const auto& n : nn) {
      if (!best || n.distance < best->distance ||
          (n.distance == best->distance && n.id < best->id)) {
        best = &n;
      }
    }
  }
  p.predicted = c.label(best->id, target);
  return p;
}

void write_predictions_csv(const std::vector<Prediction>& rows, Target target,
                           const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Errc::io_failure, "cannot write " + path);
  out << "patient_id,target,predicted,score,true_label,votes_pos,votes_neg\n";
  for (const auto& r : rows) {
    out << r.patient_id << ',' << target_name(target) << ',' << r.predicted
        << ',' << csv::format_double(r.score) << ',' << r.true_label << ','
        << r.votes_pos << ',' << r.votes_neg << "\n";
  }
}

}  // namespace simfuse
