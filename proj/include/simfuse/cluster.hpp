#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "simfuse/cohort.hpp"

namespace simfuse {

enum class ClusterAlgo { kmeans, agglomerative, spectral, optics };

const char* cluster_algo_name(ClusterAlgo a);
ClusterAlgo cluster_algo_from_name(const std::string& name);

struct Matrix {
  std::size_t rows = 0, cols = 0;
  std::vector<double> data;  // row-major

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}
  double* row(std::size_t i) { return data.data() + i * cols; }
  const double* row(std::size_t i) const { return data.data() + i * cols; }
  double& at(std::size_t i, std::size_t j) { return data[i * cols + j]; }
  double at(std::size_t i, std::size_t j) const { return data[i * cols + j]; }
};

// Cluster ids are relabeled by first occurrence in row order, so they are
// contiguous from 0 and deterministic.  -1 marks noise (optics only).
struct ClusterAssignment {
  ClusterAlgo algorithm = ClusterAlgo::kmeans;
  std::vector<std::string> ids;  // input order
  std::vector<int> labels;       // parallel to ids
  int n_clusters = 0;
  std::vector<std::vector<std::size_t>> members;  // cluster -> row indices

  int label_of(const std::string& id) const;
};

ClusterAssignment make_assignment(ClusterAlgo algo,
                                  std::vector<std::string> ids,
                                  std::vector<int> labels);

// Same-cluster candidates for a patient, excluding the patient itself.
// Noise points fall back to every other patient; downstream intersection
// with the training pool turns that into "the full training cohort".
std::vector<std::string> cluster_of(const ClusterAssignment& a,
                                    const std::string& patient_id);

struct KmeansResult {
  std::vector<int> labels;
  Matrix centroids;
  std::vector<double> inertia_history;  // after each assign+update iteration
};

KmeansResult kmeans(const Matrix& points, int k, std::uint64_t seed,
                    int max_iter = 100, double tol = 1e-6);

std::vector<int> agglomerative_ward(const Matrix& points, int k);

struct SpectralOptions {
  int k = 2;
  std::uint64_t seed = 0;
  std::optional<double> gamma;  // default 1 / n_features
};

std::vector<int> spectral_cluster(const Matrix& points,
                                  const SpectralOptions& opt);

struct OpticsOptions {
  int min_samples = 5;
  std::optional<double> eps_extract;  // default: 90th pct finite reachability
};

struct OpticsResult {
  std::vector<std::size_t> ordering;
  std::vector<double> reachability;   // by point index; inf = never reached
  std::vector<double> core_distance;  // inf when the point is not core-capable
  std::vector<int> labels;            // -1 noise
  double eps_extract = 0.0;
};

OpticsResult optics(const Matrix& points, const OpticsOptions& opt);

struct ClusterParams {
  ClusterAlgo algo = ClusterAlgo::kmeans;
  int k = 2;
  std::uint64_t seed = 0;
  std::optional<double> spectral_gamma;
  int optics_min_samples = 5;
  std::optional<double> optics_eps;
};

// Clusters all records (train and test together) on their static features.
ClusterAssignment cluster_cohort(const Cohort& c, const ClusterParams& p);

void write_assignment_csv(const ClusterAssignment& a, const std::string& path);

}  // namespace simfuse
