#include "simfuse/pipeline.hpp"

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "json.hpp"
#include "simfuse/csv.hpp"
#include "simfuse/distengine.hpp"
#include "simfuse/error.hpp"
#include "simfuse/fusion.hpp"
#include "simfuse/hash.hpp"
#include "simfuse/simd/kernels.hpp"
#include "simfuse/synthetic.hpp"

namespace fs = std::filesystem;

namespace simfuse {

int effective_k(const RunConfig& cfg) {
  if (cfg.k_clusters > 0) return cfg.k_clusters;
  return cfg.target == Target::cad ? 125 : 150;
}

std::string config_json(const RunConfig& cfg) {
  nlohmann::json j;
  j["target"] = target_name(cfg.target);
  j["dt_method"] = dt_method_name(cfg.dt_method);
  j["clustering"] = cluster_algo_name(cfg.clustering);
  j["k_clusters"] = effective_k(cfg);
  j["lambda"] = cfg.lambda;
  j["q"] = cfg.q;
  j["epsilon"] = cfg.epsilon;
  j["dtw_band"] =
      cfg.dtw_band ? nlohmann::json(*cfg.dtw_band) : nlohmann::json(nullptr);
  j["seed"] = cfg.seed;
  j["test_fraction"] = cfg.test_fraction;
  j["block_size"] = cfg.block_size;
  j["observation_hours"] = cfg.observation_hours
                               ? nlohmann::json(*cfg.observation_hours)
                               : nlohmann::json(nullptr);
  j["spectral_gamma"] = cfg.spectral_gamma
                            ? nlohmann::json(*cfg.spectral_gamma)
                            : nlohmann::json(nullptr);
  j["optics_min_samples"] = cfg.optics_min_samples;
  j["optics_eps"] =
      cfg.optics_eps ? nlohmann::json(*cfg.optics_eps) : nlohmann::json(nullptr);
  return j.dump(2);
}

std::string run_hash(const RunConfig& cfg, const Cohort& cohort) {
  Fnv1a h;
  h.str(config_json(cfg));
  h.u64(cohort.fingerprint());
  return h.hex();
}

std::string resolve_run_root(const std::optional<std::string>& cli_run_root) {
  if (cli_run_root && !cli_run_root->empty()) return *cli_run_root;
  if (const char* env = std::getenv("SIMFUSE_RUN_DIR"); env && *env)
    return env;
  return "runs";
}

namespace {

nlohmann::json metrics_json(const Metrics& m) {
  nlohmann::json j;
  j["tp"] = m.counts.tp;
  j["fp"] = m.counts.fp;
  j["tn"] = m.counts.tn;
  j["fn"] = m.counts.fn;
  j["accuracy"] = m.accuracy;
  j["specificity"] = m.specificity;
  j["precision"] = m.precision;
  j["recall"] = m.recall;
  j["f_measure"] = m.f_measure;
  j["auc"] = m.degenerate_auc ? nlohmann::json(nullptr)
                              : nlohmann::json(m.auc);
  j["degenerate"] = nlohmann::json::array();
  if (m.degenerate_accuracy) j["degenerate"].push_back("accuracy");
  if (m.degenerate_specificity) j["degenerate"].push_back("specificity");
  if (m.degenerate_precision) j["degenerate"].push_back("precision");
  if (m.degenerate_recall) j["degenerate"].push_back("recall");
  if (m.degenerate_f) j["degenerate"].push_back("f_measure");
  if (m.degenerate_auc) j["degenerate"].push_back("auc");
  return j;
}

Metrics metrics_from_json(const nlohmann::json& j) {
  Metrics m;
  m.counts.tp = j.at("tp").get<long long>();
  m.counts.fp = j.at("fp").get<long long>();
  m.counts.tn = j.at("tn").get<long long>();
  m.counts.fn = j.at("fn").get<long long>();
  m.accuracy = j.at("accuracy").get<double>();
  m.specificity = j.at("specificity").get<double>();
  m.precision = j.at("precision").get<double>();
  m.recall = j.at("recall").get<double>();
  m.f_measure = j.at("f_measure").get<double>();
  if (j.at("auc").is_null()) {
    m.auc = std::nan("");
    m.degenerate_auc = true;
  } else {
    m.auc = j.at("auc").get<double>();
  }
  for (const auto& d : j.at("degenerate")) {
    const std::string name = d.get<std::string>();
    if (name == "accuracy") m.degenerate_accuracy = true;
    if (name == "specificity") m.degenerate_specificity = true;
    if (name == "precision") m.degenerate_precision = true;
    if (name == "recall") m.degenerate_recall = true;
    if (name == "f_measure") m.degenerate_f = true;
  }
  return m;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Errc::io_failure, "cannot write " + path.string());
  out << text;
}

}  // namespace

RunOutput run_pipeline(const Cohort& cohort, const RunConfig& cfg,
                       const std::string& run_root, bool force) {
  const std::string hash = run_hash(cfg, cohort);
  const fs::path dir = fs::path(run_root) / hash;
  const fs::path report_path = dir / "report.json";

  if (!force && fs::exists(report_path)) {
    std::ifstream in(report_path);
    nlohmann::json j = nlohmann::json::parse(in, nullptr, false);
    if (!j.is_discarded()) {
      RunOutput out;
      out.run_dir = dir.string();
      out.reused = true;
      out.row.target = target_name(cfg.target);
      out.row.dt_method = dt_method_name(cfg.dt_method);
      out.row.clustering = cluster_algo_name(cfg.clustering);
      out.row.k_clusters = effective_k(cfg);
      out.row.lambda = cfg.lambda;
      out.row.metrics = metrics_from_json(j.at("metrics"));
      out.row.n_test = j.at("n_test").get<std::size_t>();
      out.row.wall_clock_s = j.at("wall_clock_s").get<double>();
      return out;
    }
  }

  const auto t0 = std::chrono::steady_clock::now();
  fs::create_directories(dir);

  // split, then truncate to the observation window
  Cohort base = cohort;
  base.split = split_cohort(base, cfg.test_fraction, cfg.seed);
  if (cfg.observation_hours)
    base = truncate_series(base, *cfg.observation_hours);

  // static-feature transform fitted on the training split
  const FittedTransform ft =
      fit_transform(base, cfg.dt_method, cfg.target,
                    {cfg.epsilon, cfg.q, /*unique_threshold=*/100});
  const Cohort transformed = apply_transform(base, ft);
  if (cfg.dt_method == DtMethod::awoe)
    write_text(dir / "binning.json", binning_to_json(ft));

  // clustering over everyone's transformed statics
  ClusterParams cp;
  cp.algo = cfg.clustering;
  cp.k = effective_k(cfg);
  cp.seed = cfg.seed;
  cp.spectral_gamma = cfg.spectral_gamma;
  cp.optics_min_samples = cfg.optics_min_samples;
  cp.optics_eps = cfg.optics_eps;
  if (cfg.clustering != ClusterAlgo::optics &&
      static_cast<std::size_t>(cp.k) > transformed.records.size()) {
    throw Error(Errc::invalid_parameter,
                "k_clusters " + std::to_string(cp.k) + " exceeds cohort size " +
                    std::to_string(transformed.records.size()));
  }
  const ClusterAssignment assignment = cluster_cohort(transformed, cp);
  write_assignment_csv(assignment, (dir / "clusters.csv").string());

  // distance blocks: per-variate DTW from each test target to its
  // same-cluster training candidates
  DtwConfig dtw_cfg;
  dtw_cfg.band = cfg.dtw_band;
  const std::vector<std::string> variates = base.variate_ids();
  if (variates.empty())
    throw Error(Errc::empty_job, "cohort has no time-series variates");
  const JobManifest manifest =
      plan_job(base, variates, base.split->test_ids, assignment, dtw_cfg,
               cfg.block_size, &base.split->train_ids);
  write_text(dir / "job.json", manifest_to_json(manifest));

  std::vector<VariateDistanceBlock> blocks;
  if (cfg.listen) {
    DistOptions opt;
    opt.task_timeout_s = cfg.task_timeout_s;
    opt.retry_budget = cfg.retry_budget;
    opt.min_workers = cfg.min_workers;
    blocks = run_distributed(manifest, *cfg.listen, opt);
  } else {
    blocks = run_local(manifest, base, cfg.workers);
  }
  write_blocks_csv(blocks, (dir / "blocks.csv").string());

  // fusion and prediction
  double train_pos_rate = 0.0;
  for (const auto& id : base.split->train_ids)
    train_pos_rate += base.label(id, cfg.target);
  train_pos_rate /= static_cast<double>(base.split->train_ids.size());

  std::vector<Prediction> predictions;
  predictions.reserve(base.split->test_ids.size());
  for (const auto& id : base.split->test_ids) {
    const NeighborhoodFusion f =
        fuse(blocks, id, cfg.lambda, base, cfg.target);
    predictions.push_back(predict(f, base, cfg.target, train_pos_rate));
  }
  write_predictions_csv(predictions, cfg.target,
                        (dir / "predictions.csv").string());

  const auto rows = read_predictions_csv((dir / "predictions.csv").string());
  const Metrics metrics = evaluate_predictions(rows);
  const double wall =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();

  RunOutput out;
  out.run_dir = dir.string();
  out.row.target = target_name(cfg.target);
  out.row.dt_method = dt_method_name(cfg.dt_method);
  out.row.clustering = cluster_algo_name(cfg.clustering);
  out.row.k_clusters = effective_k(cfg);
  out.row.lambda = cfg.lambda;
  out.row.metrics = metrics;
  out.row.n_test = rows.size();
  out.row.wall_clock_s = wall;

  nlohmann::json report;
  report["config"] = nlohmann::json::parse(config_json(cfg));
  report["cohort_fingerprint"] = manifest.cohort_fingerprint;
  report["run_hash"] = hash;
  report["simd_level"] = simd::level_name(simd::active_level());
  report["metrics"] = metrics_json(metrics);
  report["n_test"] = out.row.n_test;
  report["wall_clock_s"] = wall;
  write_text(dir / "config.json", config_json(cfg));
  write_text(report_path, report.dump(2) + "\n");
  append_results_csv(out.row, (fs::path(run_root) / "results.csv").string());
  return out;
}

BenchResult bench_dtw(std::size_t n_patients, std::size_t series_len,
                      int workers, std::uint64_t seed) {
  SyntheticConfig sc;
  sc.n_patients = n_patients;
  sc.n_variates = 1;
  sc.series_len = series_len;
  sc.signal_strength = 1.0;
  sc.seed = seed;
  sc.missing_frac = 0.0;
  const Cohort c = generate_synthetic_cohort(sc);

  std::vector<std::string> ids;
  ids.reserve(c.records.size());
  for (const auto& r : c.records) ids.push_back(r.id);
  const ClusterAssignment all_one = make_assignment(
      ClusterAlgo::kmeans, ids, std::vector<int>(ids.size(), 0));

  const JobManifest manifest =
      plan_job(c, c.variate_ids(), ids, all_one, DtwConfig{}, 25, nullptr);

  const auto t0 = std::chrono::steady_clock::now();
  const auto blocks = run_local(manifest, c, workers);
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  (void)blocks;

  BenchResult r;
  r.n_patients = n_patients;
  r.series_len = series_len;
  r.workers = workers;
  r.seconds = secs;
  return r;
}

void append_bench_csv(const BenchResult& r, const std::string& path) {
  const bool fresh = !fs::exists(path) || fs::file_size(path) == 0;
  std::ofstream out(path, std::ios::app | std::ios::binary);
  if (!out) throw Error(Errc::io_failure, "cannot write " + path);
  if (fresh) out << "n_patients,series_len,workers,simd_level,seconds\n";
  out << r.n_patients << ',' << r.series_len << ',' << r.workers << ','
      << simd::level_name(simd::active_level()) << ','
      << csv::format_double(r.seconds) << "\n";
}

}  // namespace simfuse
