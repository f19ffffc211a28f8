#pragma once

#include <string>
#include <vector>

#include "simfuse/cohort.hpp"
#include "simfuse/dtw.hpp"

namespace simfuse {

struct Neighbor {
  std::string id;
  double distance;
};

// Per-variate lambda nearest neighbors plus the pooled label votes
// (union with multiplicity across variates).
struct NeighborhoodFusion {
  std::string target_id;
  std::vector<std::pair<std::string, std::vector<Neighbor>>> per_variate;
  long long votes_pos = 0;
  long long votes_neg = 0;
};

// Lambda nearest candidates by (distance, id); missing pairings are skipped,
// so an absent variate contributes an empty neighborhood.
std::vector<Neighbor> nearest_neighbors(const VariateDistanceBlock& block,
                                        const std::string& target_id,
                                        int lambda);

NeighborhoodFusion fuse(const std::vector<VariateDistanceBlock>& blocks,
                        const std::string& target_id, int lambda,
                        const Cohort& c, Target target);

struct Prediction {
  std::string patient_id;
  int predicted = 0;
  double score = 0.0;  // positive vote fraction; prior rate when no votes
  int true_label = 0;
  long long votes_pos = 0;
  long long votes_neg = 0;
};

// Majority vote over the fused labels.  An exact tie follows the single
// globally nearest neighbor (smallest distance, then id).  Zero votes fall
// back to the training-majority label with the training positive rate as
// score.
Prediction predict(const NeighborhoodFusion& f, const Cohort& c, Target target,
                   double train_pos_rate);

void write_predictions_csv(const std::vector<Prediction>& rows, Target target,
                           const std::string& path);

}  // namespace simfuse
