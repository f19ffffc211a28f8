#include "simfuse/eval.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>

#include "simfuse/csv.hpp"
#include "simfuse/error.hpp"

namespace simfuse {

ConfusionCounts confusion(const std::vector<int>& truth,
                          const std::vector<int>& predicted) {
  if (truth.size() != predicted.size())
    throw Error(Errc::invalid_parameter, "truth/predicted size mismatch");
  ConfusionCounts c;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (truth[i]) {
      (predicted[i] ? c.tp : c.fn)++;
    } else {
      (predicted[i] ? c.fp : c.tn)++;
    }
  }
  return c;
}

double auc_score(const std::vector<int>& truth,
                 const std::vector<double>& scores) {
  if (truth.size() != scores.size())
    throw Error(Errc::invalid_parameter, "truth/scores size mismatch");
  std::vector<double> pos, neg;
  for (std::size_t i = 0; i < truth.size(); ++i)
    (truth[i] ? pos : neg).push_back(scores[i]);
  if (pos.empty() || neg.empty())
    throw Error(Errc::single_class_input,
                "auc needs both classes in the truth vector");
  double wins = 0.0;
  for (double p : pos) {
    for (double n : neg) {
      if (p > n) {
        wins += 1.0;
      } else if (p == n) {
        wins += 0.5;
      }
    }
  }
  return wins / (static_cast<double>(pos.size()) *
                 static_cast<double>(neg.size()));
}

namespace {
double ratio_or_zero(double num, double den, bool& degenerate) {
  if (den == 0.0) {
    degenerate = true;
    return 0.0;
  }
  return num / den;
}
}  // namespace

Metrics compute_metrics(const std::vector<int>& truth,
                        const std::vector<int>& predicted,
                        const std::vector<double>& scores) {
  Metrics m;
  m.counts = confusion(truth, predicted);
  const auto tp = static_cast<double>(m.counts.tp);
  const auto fp = static_cast<double>(m.counts.fp);
  const auto tn = static_cast<double>(m.counts.tn);
  const auto fn = static_cast<double>(m.counts.fn);

  m.accuracy = ratio_or_zero(tp + tn, tp + tn + fp + fn, m.degenerate_accuracy);
  m.specificity = ratio_or_zero(tn, tn + fp, m.degenerate_specificity);
  m.precision = ratio_or_zero(tp, tp + fp, m.degenerate_precision);
  m.recall = ratio_or_zero(tp, tp + fn, m.degenerate_recall);
  m.f_measure = ratio_or_zero(2.0 * m.precision * m.recall,
                              m.precision + m.recall, m.degenerate_f);
  try {
    m.auc = auc_score(truth, scores);
  } catch (const Error& e) {
    if (e.code() != Errc::single_class_input) throw;
    m.auc = std::nan("");
    m.degenerate_auc = true;
  }
  return m;
}

std::vector<PredictionRow> read_predictions_csv(const std::string& path) {
  const std::vector<std::string> header = {
      "patient_id", "target",    "predicted", "score",
      "true_label", "votes_pos", "votes_neg"};
  csv::Table tab;
  try {
    tab = csv::read_file(path, header);
  } catch (const Error& e) {
    if (e.code() == Errc::io_failure) throw;
    throw Error(Errc::malformed_predictions, e.what());
  }
  std::vector<PredictionRow> rows;
  rows.reserve(tab.rows.size());
  for (std::size_t i = 0; i < tab.rows.size(); ++i) {
    const auto& r = tab.rows[i];
    const std::size_t lineno = i + 2;
    try {
      PredictionRow row;
      row.patient_id = r[0];
      row.target = r[1];
      row.predicted = static_cast<int>(csv::parse_int(r[2], path, lineno));
      row.score = csv::parse_double(r[3], path, lineno);
      row.true_label = static_cast<int>(csv::parse_int(r[4], path, lineno));
      row.votes_pos = csv::parse_int(r[5], path, lineno);
      row.votes_neg = csv::parse_int(r[6], path, lineno);
      if ((row.predicted != 0 && row.predicted != 1) ||
          (row.true_label != 0 && row.true_label != 1)) {
        throw Error(Errc::malformed_predictions,
                    path + " row " + std::to_string(lineno) +
                        ": labels must be 0/1");
      }
      rows.push_back(std::move(row));
    } catch (const Error& e) {
      if (e.code() == Errc::malformed_predictions) throw;
      throw Error(Errc::malformed_predictions, e.what());
    }
  }
  return rows;
}

Metrics evaluate_predictions(const std::vector<PredictionRow>& rows) {
  if (rows.empty())
    throw Error(Errc::malformed_predictions, "no prediction rows");
  std::vector<int> truth, predicted;
  std::vector<double> scores;
  truth.reserve(rows.size());
  predicted.reserve(rows.size());
  scores.reserve(rows.size());
  for (const auto& r : rows) {
    truth.push_back(r.true_label);
    predicted.push_back(r.predicted);
    scores.push_back(r.score);
  }
  return compute_metrics(truth, predicted, scores);
}

std::string results_header() {
  return "target,dt_method,clustering,k_clusters,lambda,auc,accuracy,"
         "specificity,precision,recall,f_measure,n_test,wall_clock_s";
}

std::string results_row_csv(const ResultsRow& row) {
  std::string out;
  out += row.target;
  out += ',';
  out += row.dt_method;
  out += ',';
  out += row.clustering;
  out += ',';
  out += std::to_string(row.k_clusters);
  out += ',';
  out += std::to_string(row.lambda);
  out += ',';
  out += csv::format_double(row.metrics.auc);
  out += ',';
  out += csv::format_double(row.metrics.accuracy);
  out += ',';
  out += csv::format_double(row.metrics.specificity);
  out += ',';
  out += csv::format_double(row.metrics.precision);
  out += ',';
  out += csv::format_double(row.metrics.recall);
  out += ',';
  out += csv::format_double(row.metrics.f_measure);
  out += ',';
  out += std::to_string(row.n_test);
  out += ',';
  out += csv::format_double(row.wall_clock_s);
  return out;
}

void append_results_csv(const ResultsRow& row, const std::string& path) {
  const bool fresh = !std::filesystem::exists(path) ||
                     std::filesystem::file_size(path) == 0;
  std::ofstream out(path, std::ios::app | std::ios::binary);
  if (!out) throw Error(Errc::io_failure, "cannot write " + path);
  if (fresh) out << results_header() << "\n";
  out << results_row_csv(row) << "\n";
}

}  // namespace simfuse
