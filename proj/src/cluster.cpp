#include "simfuse/cluster.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

#include <Eigen/Dense>

#include "simfuse/error.hpp"
#include "simfuse/rng.hpp"
#include "simfuse/simd/kernels.hpp"

namespace simfuse {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

const char* cluster_algo_name(ClusterAlgo a) {
  switch (a) {
    case ClusterAlgo::kmeans: return "kmeans";
    case ClusterAlgo::agglomerative: return "agglomerative";
    case ClusterAlgo::spectral: return "spectral";
    case ClusterAlgo::optics: return "optics";
  }
  return "?";
}

ClusterAlgo cluster_algo_from_name(const std::string& name) {
  if (name == "kmeans") return ClusterAlgo::kmeans;
  if (name == "agglomerative") return ClusterAlgo::agglomerative;
  if (name == "spectral") return ClusterAlgo::spectral;
  if (name == "optics") return ClusterAlgo::optics;
  throw Error(Errc::invalid_parameter, "unknown clustering '" + name + "'");
}

int ClusterAssignment::label_of(const std::string& id) const {
  for (std::size_t i = 0; i < ids.size(); ++i)
    if (ids[i] == id) return labels[i];
  throw Error(Errc::unknown_patient, "patient '" + id + "' not clustered");
}

ClusterAssignment make_assignment(ClusterAlgo algo,
                                  std::vector<std::string> ids,
                                  std::vector<int> labels) {
  if (ids.size() != labels.size())
    throw Error(Errc::invalid_parameter, "ids/labels size mismatch");
  ClusterAssignment a;
  a.algorithm = algo;
  a.ids = std::move(ids);
  a.labels = std::move(labels);

  // relabel by first occurrence
  std::vector<int> remap;
  for (int& l : a.labels) {
    if (l < 0) {
      l = -1;
      continue;
    }
    auto it = std::find(remap.begin(), remap.end(), l);
    if (it == remap.end()) {
      remap.push_back(l);
      l = static_cast<int>(remap.size()) - 1;
    } else {
      l = static_cast<int>(it - remap.begin());
    }
  }
  a.n_clusters = static_cast<int>(remap.size());
  a.members.assign(a.n_clusters, {});
  for (std::size_t i = 0; i < a.labels.size(); ++i)
    if (a.labels[i] >= 0) a.members[a.labels[i]].push_back(i);
  return a;
}

std::vector<std::string> cluster_of(const ClusterAssignment& a,
                                    const std::string& patient_id) {
  std::size_t self = a.ids.size();
  for (std::size_t i = 0; i < a.ids.size(); ++i) {
    if (a.ids[i] == patient_id) {
      self = i;
      break;
    }
  }
  if (self == a.ids.size())
    throw Error(Errc::unknown_patient, "patient '" + patient_id + "' not clustered");

  std::vector<std::string> out;
  if (a.labels[self] < 0) {
    out.reserve(a.ids.size() - 1);
    for (std::size_t i = 0; i < a.ids.size(); ++i)
      if (i != self) out.push_back(a.ids[i]);
  } else {
    for (std::size_t i : a.members[a.labels[self]])
      if (i != self) out.push_back(a.ids[i]);
  }
  return out;
}

KmeansResult kmeans(const Matrix& points, int k, std::uint64_t seed,
                    int max_iter, double tol) {
  const std::size_t n = points.rows, d = points.cols;
  if (n == 0) throw Error(Errc::empty_input, "kmeans on empty matrix");
  if (k < 1 || static_cast<std::size_t>(k) > n)
    throw Error(Errc::invalid_parameter,
                "kmeans k=" + std::to_string(k) + " with n=" + std::to_string(n));

  Rng rng(seed);
  const auto K = static_cast<std::size_t>(k);
  Matrix centroids(K, d);
  std::vector<bool> chosen(n, false);

  // k-means++ seeding
  std::vector<double> best_d2(n, kInf);
  {
    const std::size_t first = rng.uniform_index(n);
    std::copy_n(points.row(first), d, centroids.row(0));
    chosen[first] = true;
    for (std::size_t c = 1; c < K; ++c) {
      double total = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        const double d2 = simd::sqdist(points.row(i), centroids.row(c - 1), d);
        if (d2 < best_d2[i]) best_d2[i] = d2;
        total += best_d2[i];
      }
      std::size_t pick = n;
      if (total > 0.0) {
        const double r = rng.uniform() * total;
        double acc = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
          acc += best_d2[i];
          if (acc >= r) {
            pick = i;
            break;
          }
        }
        if (pick == n) pick = n - 1;  // fp slack on the last element
      } else {
        for (std::size_t i = 0; i < n; ++i) {
          if (!chosen[i]) {
            pick = i;
            break;
          }
        }
        if (pick == n) pick = 0;
      }
      std::copy_n(points.row(pick), d, centroids.row(c));
      chosen[pick] = true;
    }
  }

  std::vector<int> labels(n, 0);
  KmeansResult res;
  for (int iter = 0; iter < max_iter; ++iter) {
    // assign
    bool changed = false;
    for (std::size_t i = 0; i < n; ++i) {
      int best = 0;
      double bd = simd::sqdist(points.row(i), centroids.row(0), d);
      for (std::size_t c = 1; c < K; ++c) {
        const double d2 = simd::sqdist(points.row(i), centroids.row(c), d);
        if (d2 < bd) {
          bd = d2;
          best = static_cast<int>(c);
        }
      }
      if (labels[i] != best) {
        labels[i] = best;
        changed = true;
      }
    }

    // steal the farthest point for each empty cluster
    std::vector<std::size_t> counts(K, 0);
    for (int l : labels) counts[static_cast<std::size_t>(l)]++;
    for (std::size_t c = 0; c < K; ++c) {
      if (counts[c] > 0) continue;
      std::size_t far = 0;
      double fd = -1.0;
      for (std::size_t i = 0; i < n; ++i) {
        if (counts[static_cast<std::size_t>(labels[i])] <= 1) continue;
        const double d2 =
            simd::sqdist(points.row(i),
                         centroids.row(static_cast<std::size_t>(labels[i])), d);
        if (d2 > fd) {
          fd = d2;
          far = i;
        }
      }
      counts[static_cast<std::size_t>(labels[far])]--;
      labels[far] = static_cast<int>(c);
      counts[c] = 1;
      changed = true;
    }

    // update
    Matrix next(K, d);
    std::vector<double> cnt(K, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      const auto c = static_cast<std::size_t>(labels[i]);
      cnt[c] += 1.0;
      const double* p = points.row(i);
      double* t = next.row(c);
      for (std::size_t j = 0; j < d; ++j) t[j] += p[j];
    }
    double shift2 = 0.0;
    for (std::size_t c = 0; c < K; ++c) {
      double* t = next.row(c);
      for (std::size_t j = 0; j < d; ++j) t[j] /= cnt[c];
      shift2 = std::max(shift2, simd::sqdist(t, centroids.row(c), d));
    }
    centroids = next;

    double inertia = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      inertia += simd::sqdist(points.row(i),
                              centroids.row(static_cast<std::size_t>(labels[i])), d);
    res.inertia_history.push_back(inertia);

    if (!changed || shift2 <= tol * tol) break;
  }
  res.labels = std::move(labels);
  res.centroids = std::move(centroids);
  return res;
}

std::vector<int> agglomerative_ward(const Matrix& points, int k) {
  const std::size_t n = points.rows;
  if (n == 0) throw Error(Errc::empty_input, "agglomerative on empty matrix");
  if (k < 1 || static_cast<std::size_t>(k) > n)
    throw Error(Errc::invalid_parameter,
                "agglomerative k=" + std::to_string(k) + " with n=" +
                    std::to_string(n));

  // Lance-Williams Ward update over squared euclidean dissimilarities.
  std::vector<std::vector<double>> dist(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      dist[i][j] = dist[j][i] =
          simd::sqdist(points.row(i), points.row(j), points.cols);

  std::vector<bool> active(n, true);
  std::vector<double> size(n, 1.0);
  std::vector<int> label(n);
  for (std::size_t i = 0; i < n; ++i) label[i] = static_cast<int>(i);

  for (std::size_t merges = 0; merges < n - static_cast<std::size_t>(k);
       ++merges) {
    std::size_t bi = 0, bj = 0;
    double best = kInf;
    for (std::size_t i = 0; i < n; ++i) {
      if (!active[i]) continue;
      for (std::size_t j = i + 1; j < n; ++j) {
        if (!active[j]) continue;
        if (dist[i][j] < best) {
          best = dist[i][j];
          bi = i;
          bj = j;
        }
      }
    }
    // merge bj into bi (bi < bj keeps representatives at lowest index)
    const double ni = size[bi], nj = size[bj], dij = dist[bi][bj];
    for (std::size_t t = 0; t < n; ++t) {
      if (!active[t] || t == bi || t == bj) continue;
      const double nt = size[t];
      dist[bi][t] = dist[t][bi] =
          ((ni + nt) * dist[bi][t] + (nj + nt) * dist[bj][t] - nt * dij) /
          (ni + nj + nt);
    }
    size[bi] += size[bj];
    active[bj] = false;
    for (std::size_t t = 0; t < n; ++t)
      if (label[t] == static_cast<int>(bj)) label[t] = static_cast<int>(bi);
  }
  return label;
}

std::vector<int> spectral_cluster(const Matrix& points,
                                  const SpectralOptions& opt) {
  const std::size_t n = points.rows;
  if (n == 0) throw Error(Errc::empty_input, "spectral on empty matrix");
  if (opt.k < 1 || static_cast<std::size_t>(opt.k) > n)
    throw Error(Errc::invalid_parameter,
                "spectral k=" + std::to_string(opt.k) + " with n=" +
                    std::to_string(n));
  const double gamma =
      opt.gamma.value_or(1.0 / static_cast<double>(points.cols));

  Eigen::MatrixXd A(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    A(i, i) = 1.0;
    for (std::size_t j = i + 1; j < n; ++j) {
      const double a =
          std::exp(-gamma * simd::sqdist(points.row(i), points.row(j),
                                         points.cols));
      A(i, j) = a;
      A(j, i) = a;
    }
  }
  Eigen::VectorXd dinv_sqrt(n);
  for (std::size_t i = 0; i < n; ++i) dinv_sqrt(i) = 1.0 / std::sqrt(A.row(i).sum());
  Eigen::MatrixXd L = Eigen::MatrixXd::Identity(n, n) -
                      dinv_sqrt.asDiagonal() * A * dinv_sqrt.asDiagonal();

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(L);
  if (solver.info() != Eigen::Success)
    throw Error(Errc::eigendecomposition_failure,
                "spectral embedding failed to converge");

  const auto K = static_cast<std::size_t>(opt.k);
  Matrix emb(n, K);
  for (std::size_t i = 0; i < n; ++i) {
    double norm2 = 0.0;
    for (std::size_t j = 0; j < K; ++j) {
      const double v = solver.eigenvectors()(i, j);
      emb.at(i, j) = v;
      norm2 += v * v;
    }
    if (norm2 > 0.0) {
      const double inv = 1.0 / std::sqrt(norm2);
      for (std::size_t j = 0; j < K; ++j) emb.at(i, j) *= inv;
    }
  }
  return kmeans(emb, opt.k, opt.seed).labels;
}

OpticsResult optics(const Matrix& points, const OpticsOptions& opt) {
  const std::size_t n = points.rows;
  if (n == 0) throw Error(Errc::empty_input, "optics on empty matrix");
  if (opt.min_samples < 2)
    throw Error(Errc::invalid_parameter, "optics min_samples must be >= 2");

  std::vector<std::vector<double>> dist(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      dist[i][j] = dist[j][i] = std::sqrt(
          simd::sqdist(points.row(i), points.row(j), points.cols));

  OpticsResult res;
  res.reachability.assign(n, kInf);
  res.core_distance.assign(n, kInf);

  // core distance: min_samples-th nearest counting the point itself
  const auto ms = static_cast<std::size_t>(opt.min_samples);
  if (n >= ms) {
    for (std::size_t i = 0; i < n; ++i) {
      std::vector<double> row;
      row.reserve(n - 1);
      for (std::size_t j = 0; j < n; ++j)
        if (j != i) row.push_back(dist[i][j]);
      std::nth_element(row.begin(), row.begin() + (ms - 2), row.end());
      res.core_distance[i] = row[ms - 2];
    }
  }

  // eps = infinity traversal: next point is the unprocessed one with the
  // smallest reachability, breaking ties (including all-inf starts) by index.
  std::vector<bool> processed(n, false);
  res.ordering.reserve(n);
  for (std::size_t step = 0; step < n; ++step) {
    std::size_t cur = n;
    double best = kInf;
    for (std::size_t i = 0; i < n; ++i) {
      if (processed[i]) continue;
      if (cur == n || res.reachability[i] < best) {
        cur = i;
        best = res.reachability[i];
      }
    }
    processed[cur] = true;
    res.ordering.push_back(cur);
    if (res.core_distance[cur] < kInf) {
      for (std::size_t q = 0; q < n; ++q) {
        if (processed[q]) continue;
        const double r = std::max(res.core_distance[cur], dist[cur][q]);
        if (r < res.reachability[q]) res.reachability[q] = r;
      }
    }
  }

  if (opt.eps_extract) {
    res.eps_extract = *opt.eps_extract;
  } else {
    std::vector<double> finite;
    for (double r : res.reachability)
      if (r < kInf) finite.push_back(r);
    if (finite.empty()) {
      res.eps_extract = 0.0;
    } else {
      std::sort(finite.begin(), finite.end());
      const std::size_t rank = static_cast<std::size_t>(
          std::ceil(0.9 * static_cast<double>(finite.size())));
      res.eps_extract = finite[std::min(rank, finite.size()) - 1];
    }
  }

  // dbscan-style extraction along the ordering
  res.labels.assign(n, -1);
  int cluster = -1;
  for (std::size_t idx : res.ordering) {
    if (res.reachability[idx] > res.eps_extract) {
      if (res.core_distance[idx] <= res.eps_extract) {
        ++cluster;
        res.labels[idx] = cluster;
      } else {
        res.labels[idx] = -1;
      }
    } else {
      res.labels[idx] = cluster;
    }
  }
  return res;
}

ClusterAssignment cluster_cohort(const Cohort& c, const ClusterParams& p) {
  if (c.records.empty()) throw Error(Errc::empty_input, "empty cohort");
  Matrix m(c.records.size(), c.schema.size());
  std::vector<std::string> ids;
  ids.reserve(c.records.size());
  for (std::size_t i = 0; i < c.records.size(); ++i) {
    ids.push_back(c.records[i].id);
    std::copy_n(c.records[i].statics.data(), c.schema.size(), m.row(i));
  }
  std::vector<int> labels;
  switch (p.algo) {
    case ClusterAlgo::kmeans:
      labels = kmeans(m, p.k, p.seed).labels;
      break;
    case ClusterAlgo::agglomerative:
      labels = agglomerative_ward(m, p.k);
      break;
    case ClusterAlgo::spectral:
      labels = spectral_cluster(m, {p.k, p.seed, p.spectral_gamma});
      break;
    case ClusterAlgo::optics:
      labels = optics(m, {p.optics_min_samples, p.optics_eps}).labels;
      break;
  }
  return make_assignment(p.algo, std::move(ids), std::move(labels));
}

void write_assignment_csv(const ClusterAssignment& a, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error(Errc::io_failure, "cannot write " + path);
  out << "patient_id,cluster_id\n";
  for (std::size_t i = 0; i < a.ids.size(); ++i)
    out << a.ids[i] << ',' << a.labels[i] << "\n";
}

}  // namespace simfuse
