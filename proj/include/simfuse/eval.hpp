#pragma once

#include <string>
#include <vector>

namespace simfuse {

struct ConfusionCounts {
  long long tp = 0, fp = 0, tn = 0, fn = 0;
};

// Any 0/0 ratio evaluates to 0 with its degenerate flag set.
struct Metrics {
  ConfusionCounts counts;
  double accuracy = 0.0;
  double specificity = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double f_measure = 0.0;
  double auc = 0.0;
  bool degenerate_accuracy = false;
  bool degenerate_specificity = false;
  bool degenerate_precision = false;
  bool degenerate_recall = false;
  bool degenerate_f = false;
  bool degenerate_auc = false;  // single-class truth
};

ConfusionCounts confusion(const std::vector<int>& truth,
                          const std::vector<int>& predicted);

// Rank-based AUC with 0.5 credit for tied scores.  Throws SingleClassInput
// when the truth contains only one class.
double auc_score(const std::vector<int>& truth,
                 const std::vector<double>& scores);

Metrics compute_metrics(const std::vector<int>& truth,
                        const std::vector<int>& predicted,
                        const std::vector<double>& scores);

struct PredictionRow {
  std::string patient_id;
  std::string target;
  int predicted = 0;
  double score = 0.0;
  int true_label = 0;
  long long votes_pos = 0;
  long long votes_neg = 0;
};

std::vector<PredictionRow> read_predictions_csv(const std::string& path);

struct ResultsRow {
  std::string target;
  std::string dt_method;
  std::string clustering;
  int k_clusters = 0;
  int lambda = 0;
  Metrics metrics;
  std::size_t n_test = 0;
  double wall_clock_s = 0.0;
};

Metrics evaluate_predictions(const std::vector<PredictionRow>& rows);
void append_results_csv(const ResultsRow& row, const std::string& path);
std::string results_header();
std::string results_row_csv(const ResultsRow& row);

}  // namespace simfuse
