#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>
#include <vector>

#include "doctest.h"
#include "helpers.hpp"
#include "simfuse/cluster.hpp"
#include "simfuse/error.hpp"
#include "simfuse/rng.hpp"
#include "simfuse/simd/kernels.hpp"

using namespace simfuse;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

Matrix blob_matrix(Rng& rng, const std::vector<std::pair<double, double>>& centers,
                   std::size_t per_blob, double spread, std::size_t dims = 2) {
  Matrix m(centers.size() * per_blob, dims);
  std::size_t r = 0;
  for (const auto& c : centers)
    for (std::size_t i = 0; i < per_blob; ++i, ++r) {
      m.at(r, 0) = c.first + rng.normal(0, spread);
      if (dims > 1) m.at(r, 1) = c.second + rng.normal(0, spread);
      for (std::size_t j = 2; j < dims; ++j) m.at(r, j) = rng.normal(0, spread);
    }
  return m;
}

// partition equality up to label renaming
bool same_partition(const std::vector<int>& a, const std::vector<int>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = i + 1; j < a.size(); ++j)
      if ((a[i] == a[j]) != (b[i] == b[j])) return false;
  return true;
}

struct DbscanOracle {
  std::vector<int> labels;      // -1 noise
  std::vector<bool> core;
};

// Textbook DBSCAN: cores have >= min_samples-1 other points within eps,
// clusters are eps-connected components of cores, borders attach to any
// adjacent core's cluster, the rest is noise.
DbscanOracle dbscan_bruteforce(const Matrix& pts, double eps, int min_samples) {
  const std::size_t n = pts.rows;
  std::vector<std::vector<double>> d(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      d[i][j] = d[j][i] =
          std::sqrt(simd::sqdist(pts.row(i), pts.row(j), pts.cols));

  DbscanOracle out;
  out.core.assign(n, false);
  for (std::size_t i = 0; i < n; ++i) {
    int within = 0;
    for (std::size_t j = 0; j < n; ++j)
      if (j != i && d[i][j] <= eps) ++within;
    out.core[i] = within >= min_samples - 1;
  }

  out.labels.assign(n, -1);
  int next = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!out.core[i] || out.labels[i] >= 0) continue;
    std::vector<std::size_t> stack{i};
    out.labels[i] = next;
    while (!stack.empty()) {
      const std::size_t c = stack.back();
      stack.pop_back();
      for (std::size_t j = 0; j < n; ++j) {
        if (!out.core[j] || out.labels[j] >= 0 || d[c][j] > eps) continue;
        out.labels[j] = next;
        stack.push_back(j);
      }
    }
    ++next;
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (out.core[i] || out.labels[i] >= 0) continue;
    for (std::size_t j = 0; j < n; ++j) {
      if (out.core[j] && d[i][j] <= eps) {
        out.labels[i] = out.labels[j];
        break;
      }
    }
  }
  return out;
}

// OPTICS extraction must equal DBSCAN up to the inherent border-point
// ambiguity: core points are clustered identically and never noise, DBSCAN
// noise stays noise, and a border point (non-core within eps of a core) may
// land in any adjacent core's cluster or drop to noise, depending on the
// order it was reached.  DBSCAN itself assigns borders visit-order first.
void check_optics_against_dbscan(const Matrix& pts, double eps,
                                 int min_samples) {
  OpticsOptions opt;
  opt.min_samples = min_samples;
  opt.eps_extract = eps;
  const OpticsResult got = optics(pts, opt);
  const DbscanOracle want = dbscan_bruteforce(pts, eps, min_samples);
  const std::size_t n = pts.rows;

  std::vector<std::vector<double>> d(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      d[i][j] = d[j][i] =
          std::sqrt(simd::sqdist(pts.row(i), pts.row(j), pts.cols));

  for (std::size_t i = 0; i < n; ++i) {
    CHECK((got.core_distance[i] <= eps) == want.core[i]);
    if (want.core[i]) REQUIRE(got.labels[i] != -1);
    if (want.labels[i] == -1) REQUIRE(got.labels[i] == -1);
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (!want.core[i]) continue;
    for (std::size_t j = i + 1; j < n; ++j) {
      if (!want.core[j]) continue;
      CHECK((got.labels[i] == got.labels[j]) ==
            (want.labels[i] == want.labels[j]));
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (want.core[i] || want.labels[i] == -1) continue;  // border points
    if (got.labels[i] == -1) continue;  // dropped border: allowed
    bool attached = false;
    for (std::size_t j = 0; j < n; ++j)
      if (want.core[j] && d[i][j] <= eps && got.labels[j] == got.labels[i])
        attached = true;
    CHECK(attached);
  }
}

}  // namespace

TEST_CASE("kmeans separates two well-separated blobs") {
  Rng rng(1);
  const Matrix m = blob_matrix(rng, {{0, 0}, {50, 50}}, 20, 0.5);
  const KmeansResult r = kmeans(m, 2, 7);
  for (std::size_t i = 1; i < 20; ++i) CHECK(r.labels[i] == r.labels[0]);
  for (std::size_t i = 21; i < 40; ++i) CHECK(r.labels[i] == r.labels[20]);
  CHECK(r.labels[0] != r.labels[20]);
}

TEST_CASE("kmeans satisfies the nearest-centroid condition and monotone inertia") {
  Rng rng(2);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 10 + rng.uniform_index(90);
    const std::size_t dims = 1 + rng.uniform_index(4);
    const int k = 1 + static_cast<int>(rng.uniform_index(5));
    Matrix m(n, dims);
    for (auto& v : m.data) v = rng.normal(0, 5);

    const KmeansResult r = kmeans(m, k, trial, /*max_iter=*/500, /*tol=*/0.0);
    REQUIRE(r.labels.size() == n);
    REQUIRE(r.centroids.rows == static_cast<std::size_t>(k));

    for (std::size_t i = 0; i < n; ++i) {
      int best = 0;
      double bd = simd::sqdist(m.row(i), r.centroids.row(0), dims);
      for (int c = 1; c < k; ++c) {
        const double d2 =
            simd::sqdist(m.row(i), r.centroids.row(static_cast<std::size_t>(c)),
                         dims);
        if (d2 < bd) {
          bd = d2;
          best = c;
        }
      }
      CHECK(r.labels[i] == best);
    }

    for (std::size_t t = 1; t < r.inertia_history.size(); ++t)
      CHECK(r.inertia_history[t] <=
            r.inertia_history[t - 1] * (1.0 + 1e-9) + 1e-12);
  }
}

TEST_CASE("kmeans never returns an empty cluster") {
  Rng rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 8 + rng.uniform_index(40);
    Matrix m(n, 2);
    for (auto& v : m.data) v = rng.normal(0, 1);
    const int k = 2 + static_cast<int>(rng.uniform_index(5));
    const KmeansResult r = kmeans(m, k, trial);
    std::set<int> seen(r.labels.begin(), r.labels.end());
    CHECK(seen.size() == static_cast<std::size_t>(k));
  }
}

TEST_CASE("kmeans edge shapes and validation") {
  Matrix m(4, 1);
  m.data = {1, 2, 3, 10};
  const KmeansResult one = kmeans(m, 1, 0);
  CHECK(one.centroids.at(0, 0) == doctest::Approx(4.0));
  for (int l : one.labels) CHECK(l == 0);

  const KmeansResult all = kmeans(m, 4, 0);
  std::set<int> seen(all.labels.begin(), all.labels.end());
  CHECK(seen.size() == 4);
  CHECK(all.inertia_history.back() == doctest::Approx(0.0));

  CHECK_THROWS_AS(kmeans(m, 5, 0), Error);
  CHECK_THROWS_AS(kmeans(m, 0, 0), Error);
  CHECK_THROWS_AS(kmeans(Matrix(), 1, 0), Error);
}

TEST_CASE("ward agglomerative hand fixture") {
  Matrix m(4, 1);
  m.data = {0.0, 0.1, 10.0, 10.1};
  const std::vector<int> l = agglomerative_ward(m, 2);
  CHECK(l[0] == l[1]);
  CHECK(l[2] == l[3]);
  CHECK(l[0] != l[2]);
}

TEST_CASE("ward recovers separated blobs") {
  Rng rng(4);
  const Matrix m = blob_matrix(rng, {{0, 0}, {40, 0}, {0, 40}}, 10, 0.5);
  const std::vector<int> l = agglomerative_ward(m, 3);
  std::vector<int> want(30);
  for (std::size_t i = 0; i < 30; ++i) want[i] = static_cast<int>(i / 10);
  CHECK(same_partition(l, want));
  CHECK_THROWS_AS(agglomerative_ward(m, 0), Error);
  CHECK_THROWS_AS(agglomerative_ward(m, 31), Error);
}

TEST_CASE("ward with k = n keeps singletons") {
  Matrix m(3, 1);
  m.data = {1, 2, 3};
  const std::vector<int> l = agglomerative_ward(m, 3);
  std::set<int> seen(l.begin(), l.end());
  CHECK(seen.size() == 3);
}

TEST_CASE("spectral recovers disconnected affinity blocks") {
  Rng rng(5);
  SpectralOptions opt;
  opt.gamma = 1.0;  // inter-block affinity underflows to exactly 0

  SUBCASE("three blocks") {
    const Matrix m = blob_matrix(rng, {{0, 0}, {100, 0}, {0, 100}}, 12, 0.3);
    opt.k = 3;
    opt.seed = 11;
    const std::vector<int> l = spectral_cluster(m, opt);
    std::vector<int> want(36);
    for (std::size_t i = 0; i < 36; ++i) want[i] = static_cast<int>(i / 12);
    CHECK(same_partition(l, want));
  }
  SUBCASE("two blocks") {
    const Matrix m = blob_matrix(rng, {{0, 0}, {120, 120}}, 15, 0.4);
    opt.k = 2;
    opt.seed = 3;
    const std::vector<int> l = spectral_cluster(m, opt);
    std::vector<int> want(30);
    for (std::size_t i = 0; i < 30; ++i) want[i] = static_cast<int>(i / 15);
    CHECK(same_partition(l, want));
  }
}

TEST_CASE("spectral validation") {
  Matrix m(3, 2);
  SpectralOptions opt;
  opt.k = 4;
  CHECK_THROWS_AS(spectral_cluster(m, opt), Error);
  CHECK_THROWS_AS(spectral_cluster(Matrix(), opt), Error);
}

TEST_CASE("optics two dense blobs: two clusters, no noise") {
  Matrix m(10, 1);
  m.data = {0.0, 0.3, 0.6, 0.9, 1.2, 100.0, 100.3, 100.6, 100.9, 101.2};
  OpticsOptions opt;
  opt.min_samples = 3;
  opt.eps_extract = 1.0;
  const OpticsResult r = optics(m, opt);
  std::set<int> seen(r.labels.begin(), r.labels.end());
  CHECK(seen == std::set<int>{0, 1});
  for (std::size_t i = 0; i < 5; ++i) CHECK(r.labels[i] == r.labels[0]);
  for (std::size_t i = 5; i < 10; ++i) CHECK(r.labels[i] == r.labels[5]);
  CHECK(r.labels[0] != r.labels[5]);
  CHECK(r.ordering.size() == 10);
}

TEST_CASE("optics marks isolated points as noise") {
  Matrix m(7, 1);
  m.data = {0.0, 0.1, 0.2, 0.3, 50.0, 100.0, 100.05};
  OpticsOptions opt;
  opt.min_samples = 3;
  opt.eps_extract = 0.5;
  const OpticsResult r = optics(m, opt);
  CHECK(r.labels[4] == -1);
  CHECK(r.labels[5] == -1);
  CHECK(r.labels[6] == -1);
  for (std::size_t i = 0; i < 4; ++i) CHECK(r.labels[i] == 0);
}

TEST_CASE("optics extraction matches brute-force dbscan") {
  Rng rng(6);
  for (int trial = 0; trial < 12; ++trial) {
    const std::size_t n = 30 + rng.uniform_index(50);
    Matrix m(n, 2);
    for (auto& v : m.data) v = rng.uniform() * 10.0;
    const int ms = 2 + static_cast<int>(rng.uniform_index(4));
    const double eps = 0.5 + rng.uniform() * 1.5;
    check_optics_against_dbscan(m, eps, ms);
  }
}

TEST_CASE("optics default extraction eps is the 90th percentile reachability") {
  Rng rng(7);
  Matrix m(40, 2);
  for (auto& v : m.data) v = rng.uniform() * 4.0;
  OpticsOptions opt;
  opt.min_samples = 4;
  const OpticsResult r = optics(m, opt);

  std::vector<double> finite;
  for (double x : r.reachability)
    if (x < kInf) finite.push_back(x);
  std::sort(finite.begin(), finite.end());
  const std::size_t rank = static_cast<std::size_t>(
      std::ceil(0.9 * static_cast<double>(finite.size())));
  CHECK(r.eps_extract == finite[rank - 1]);
  OpticsOptions bad;
  bad.min_samples = 1;
  CHECK_THROWS_AS(optics(m, bad), Error);
}

TEST_CASE("assignment canonicalizes labels and serves cluster members") {
  ClusterAssignment a = make_assignment(
      ClusterAlgo::kmeans, {"a", "b", "c", "d", "e"}, {7, 3, 7, -1, 3});
  CHECK(a.labels == std::vector<int>{0, 1, 0, -1, 1});
  CHECK(a.n_clusters == 2);
  CHECK(a.label_of("c") == 0);
  CHECK(cluster_of(a, "a") == std::vector<std::string>{"c"});
  CHECK(cluster_of(a, "b") == std::vector<std::string>{"e"});
  // noise falls back to everyone else
  CHECK(cluster_of(a, "d") == std::vector<std::string>{"a", "b", "c", "e"});
  CHECK_THROWS_AS(cluster_of(a, "zz"), Error);
  CHECK_THROWS_AS(a.label_of("zz"), Error);
}

TEST_CASE("cluster_cohort runs every algorithm on cohort statics") {
  const Cohort c = simfuse::test::make_cohort(24);
  for (ClusterAlgo algo : {ClusterAlgo::kmeans, ClusterAlgo::agglomerative,
                           ClusterAlgo::spectral, ClusterAlgo::optics}) {
    ClusterParams p;
    p.algo = algo;
    p.k = 3;
    p.seed = 9;
    const ClusterAssignment a = cluster_cohort(c, p);
    CHECK(a.ids.size() == 24);
    CHECK(a.labels.size() == 24);
    if (algo != ClusterAlgo::optics)
      for (int l : a.labels) CHECK(l >= 0);
  }

  simfuse::test::TempDir td("clu");
  ClusterParams p;
  p.k = 2;
  const ClusterAssignment a = cluster_cohort(c, p);
  write_assignment_csv(a, td.file("clusters.csv"));
  const std::string text = simfuse::test::read_text(td.file("clusters.csv"));
  CHECK(text.rfind("patient_id,cluster_id\n", 0) == 0);
  CHECK(std::count(text.begin(), text.end(), '\n') == 25);
}

TEST_CASE("cluster algo names round-trip") {
  CHECK(cluster_algo_from_name("kmeans") == ClusterAlgo::kmeans);
  CHECK(cluster_algo_from_name("agglomerative") == ClusterAlgo::agglomerative);
  CHECK(cluster_algo_from_name("spectral") == ClusterAlgo::spectral);
  CHECK(cluster_algo_from_name("optics") == ClusterAlgo::optics);
  CHECK(std::string(cluster_algo_name(ClusterAlgo::optics)) == "optics");
  CHECK_THROWS_AS(cluster_algo_from_name("dbscan"), Error);
}
