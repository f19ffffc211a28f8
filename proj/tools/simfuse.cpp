// simfuse: patient-similarity engine over static-feature clustering and
// per-variate DTW neighborhoods.
//
// Subcommands:
//   gen          write a synthetic cohort
//   run          run the full pipeline on a cohort directory
//   sweep        re-run the pipeline across one swept axis
//   bench        time a full-pairwise single-variate DTW job
//   coordinator  serve a planned job to remote workers
//   worker       compute DTW task blocks for a coordinator
//   eval         score an existing predictions CSV

#include <atomic>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "simfuse/cohort_io.hpp"
#include "simfuse/distengine.hpp"
#include "simfuse/error.hpp"
#include "simfuse/eval.hpp"
#include "simfuse/pipeline.hpp"
#include "simfuse/synthetic.hpp"

namespace fs = std::filesystem;
using namespace simfuse;

namespace {

struct RunFlags {
  std::string cohort_dir;
  std::string config_file;
  std::string target = "cad";
  std::string dt = "awoe";
  std::string clustering = "kmeans";
  int k = 0;
  int lambda = 1;
  int q = 20;
  double epsilon = 1e-4;
  int band = -1;
  std::uint64_t seed = 1;
  double test_fraction = 0.2;
  int workers = 1;
  int block_size = 25;
  double hours = 0.0;
  double gamma = 0.0;
  int optics_min_samples = 5;
  double optics_eps = 0.0;
  std::string listen;
  int min_workers = 1;
  double timeout = 60.0;
  int retry = 3;
  std::optional<std::string> run_root;
  bool force = false;
};

void add_run_flags(CLI::App* cmd, RunFlags& f) {
  cmd->add_option("--cohort", f.cohort_dir, "cohort directory (from gen)");
  cmd->add_option("--config", f.config_file,
                  "json config file (config.json keys); explicit flags "
                  "override it");
  cmd->add_option("--target", f.target, "prediction target: cad|chf");
  cmd->add_option("--dt", f.dt, "static transform: awoe|zscore|none");
  cmd->add_option("--clustering", f.clustering,
                  "kmeans|agglomerative|spectral|optics");
  cmd->add_option("-k,--k-clusters", f.k,
                  "cluster count (0 = cad 125 / chf 150)");
  cmd->add_option("--lambda", f.lambda, "neighbors per variate");
  cmd->add_option("--q", f.q, "awoe rows per equal-frequency bin");
  cmd->add_option("--epsilon", f.epsilon, "awoe smoothing epsilon");
  cmd->add_option("--band", f.band, "dtw band radius (-1 = unconstrained)");
  cmd->add_option("--seed", f.seed, "split/clustering seed");
  cmd->add_option("--test-fraction", f.test_fraction, "test split fraction");
  cmd->add_option("--workers", f.workers, "local worker threads");
  cmd->add_option("--block-size", f.block_size, "targets per task");
  cmd->add_option("--hours", f.hours,
                  "observation window in hours (0 = full series)");
  cmd->add_option("--gamma", f.gamma,
                  "spectral rbf gamma (0 = 1/n_features)");
  cmd->add_option("--optics-min-samples", f.optics_min_samples,
                  "optics core size");
  cmd->add_option("--optics-eps", f.optics_eps,
                  "optics extraction eps (0 = 90th pct reachability)");
  cmd->add_option("--listen", f.listen,
                  "HOST:PORT; run distributed instead of local threads");
  cmd->add_option("--min-workers", f.min_workers,
                  "distributed dispatch gate");
  cmd->add_option("--timeout", f.timeout, "distributed task timeout (s)");
  cmd->add_option("--retry", f.retry, "distributed retry budget per task");
  cmd->add_option_function<std::string>(
      "--run-dir",
      [&f](const std::string& v) { f.run_root = v; },
      "run artifact root (default $SIMFUSE_RUN_DIR or ./runs)");
  cmd->add_flag("--force", f.force, "recompute even when the run exists");
}

// Fills in flags the user did not pass from --config. Keys mirror the
// config.json a run writes, so a previous run's artifact replays as-is.
void apply_config(const CLI::App* cmd, RunFlags& f) {
  if (f.config_file.empty()) return;
  std::ifstream in(f.config_file);
  if (!in) throw Error(Errc::io_failure, "cannot open " + f.config_file);
  std::stringstream buf;
  buf << in.rdbuf();
  auto j = nlohmann::json::parse(buf.str(), nullptr, false);
  if (j.is_discarded() || !j.is_object())
    throw Error(Errc::invalid_parameter,
                f.config_file + " is not a json object");

  auto want = [&](const char* key, const char* flag) {
    return j.contains(key) && !j[key].is_null() && cmd->count(flag) == 0;
  };
  try {
    if (want("cohort", "--cohort"))
      f.cohort_dir = j["cohort"].get<std::string>();
    if (want("target", "--target")) f.target = j["target"].get<std::string>();
    if (want("dt_method", "--dt")) f.dt = j["dt_method"].get<std::string>();
    if (want("clustering", "--clustering"))
      f.clustering = j["clustering"].get<std::string>();
    if (want("k_clusters", "--k-clusters"))
      f.k = j["k_clusters"].get<int>();
    if (want("lambda", "--lambda")) f.lambda = j["lambda"].get<int>();
    if (want("q", "--q")) f.q = j["q"].get<int>();
    if (want("epsilon", "--epsilon")) f.epsilon = j["epsilon"].get<double>();
    if (want("dtw_band", "--band")) f.band = j["dtw_band"].get<int>();
    if (want("seed", "--seed")) f.seed = j["seed"].get<std::uint64_t>();
    if (want("test_fraction", "--test-fraction"))
      f.test_fraction = j["test_fraction"].get<double>();
    if (want("workers", "--workers")) f.workers = j["workers"].get<int>();
    if (want("block_size", "--block-size"))
      f.block_size = j["block_size"].get<int>();
    if (want("observation_hours", "--hours"))
      f.hours = j["observation_hours"].get<double>();
    if (want("spectral_gamma", "--gamma"))
      f.gamma = j["spectral_gamma"].get<double>();
    if (want("optics_min_samples", "--optics-min-samples"))
      f.optics_min_samples = j["optics_min_samples"].get<int>();
    if (want("optics_eps", "--optics-eps"))
      f.optics_eps = j["optics_eps"].get<double>();
    if (want("run_dir", "--run-dir"))
      f.run_root = j["run_dir"].get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::invalid_parameter,
                "bad value in " + f.config_file + ": " + e.what());
  }
}

RunConfig to_config(const RunFlags& f) {
  RunConfig cfg;
  cfg.target = target_from_name(f.target);
  cfg.dt_method = dt_method_from_name(f.dt);
  cfg.clustering = cluster_algo_from_name(f.clustering);
  cfg.k_clusters = f.k;
  cfg.lambda = f.lambda;
  cfg.q = f.q;
  cfg.epsilon = f.epsilon;
  if (f.band >= 0) cfg.dtw_band = f.band;
  cfg.seed = f.seed;
  cfg.test_fraction = f.test_fraction;
  cfg.workers = f.workers;
  cfg.block_size = f.block_size;
  if (f.hours > 0.0) cfg.observation_hours = f.hours;
  if (f.gamma > 0.0) cfg.spectral_gamma = f.gamma;
  cfg.optics_min_samples = f.optics_min_samples;
  if (f.optics_eps > 0.0) cfg.optics_eps = f.optics_eps;
  if (!f.listen.empty()) cfg.listen = f.listen;
  cfg.min_workers = f.min_workers;
  cfg.task_timeout_s = f.timeout;
  cfg.retry_budget = f.retry;
  return cfg;
}

void print_row(const ResultsRow& row) {
  std::cout << results_header() << "\n" << results_row_csv(row) << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"patient similarity fusion engine"};
  app.require_subcommand(1);

  // gen
  auto* gen = app.add_subcommand("gen", "generate a synthetic cohort");
  std::string gen_out;
  SyntheticConfig sc;
  gen->add_option("--out", gen_out, "output cohort directory")->required();
  gen->add_option("--n", sc.n_patients, "patients");
  gen->add_option("--variates", sc.n_variates, "time-series variates (<=18)");
  gen->add_option("--series-len", sc.series_len, "samples per series");
  gen->add_option("--signal", sc.signal_strength, "class signal strength");
  gen->add_option("--seed", sc.seed, "generator seed");
  gen->add_option("--missing-frac", sc.missing_frac,
                  "per patient-variate missing probability");
  gen->add_option("--interval", sc.sample_interval_s, "sample spacing (s)");

  // run
  auto* run = app.add_subcommand("run", "run the pipeline");
  RunFlags rf;
  add_run_flags(run, rf);

  // sweep
  auto* sweep = app.add_subcommand("sweep", "sweep one axis");
  RunFlags sf;
  add_run_flags(sweep, sf);
  std::string sweep_axis;
  std::string sweep_values;
  int sweep_repeats = 1;
  sweep
      ->add_option("--axis", sweep_axis,
                   "k_clusters|lambda|observation_hours|workers "
                   "(k and hours accepted as shorthand)")
      ->required();
  sweep
      ->add_option("--values", sweep_values,
                   "comma-separated axis values (at least 2)")
      ->required();
  sweep->add_option("--repeats", sweep_repeats,
                    "seeds per value (seed, seed+1, ...)");

  // bench
  auto* bench = app.add_subcommand("bench", "time a pairwise dtw job");
  std::size_t bench_n = 200, bench_len = 200;
  int bench_workers = 1;
  std::uint64_t bench_seed = 42;
  std::string bench_out = "bench.csv";
  bench->add_option("--n", bench_n, "patients");
  bench->add_option("--series-len", bench_len, "samples per series");
  bench->add_option("--workers", bench_workers, "local worker threads");
  bench->add_option("--seed", bench_seed, "cohort seed");
  bench->add_option("--out", bench_out, "append timing row here");

  // coordinator
  auto* coord = app.add_subcommand("coordinator", "serve a planned job");
  std::string coord_job, coord_listen, coord_out = "blocks.csv";
  double coord_timeout = 60.0, coord_wait = 10.0;
  int coord_retry = 3, coord_min_workers = 1;
  coord->add_option("--job", coord_job, "job manifest json")->required();
  coord->add_option("--listen", coord_listen, "HOST:PORT to listen on")
      ->required();
  coord->add_option("--out", coord_out, "merged block csv path");
  coord->add_option("--timeout", coord_timeout, "task timeout (s)");
  coord->add_option("--retry", coord_retry, "retry budget per task");
  coord->add_option("--min-workers", coord_min_workers, "dispatch gate");
  coord->add_option("--register-wait", coord_wait,
                    "seconds to wait for the first worker");

  // worker
  auto* worker = app.add_subcommand("worker", "serve dtw tasks");
  std::string worker_cohort, worker_connect;
  double worker_hours = 0.0;
  worker->add_option("--cohort", worker_cohort, "cohort directory")
      ->required();
  worker->add_option("--connect", worker_connect, "coordinator HOST:PORT")
      ->required();
  worker->add_option("--hours", worker_hours,
                     "observation window; must match the coordinator's job");

  // eval
  auto* eval = app.add_subcommand("eval", "score a predictions csv");
  std::string eval_predictions;
  eval->add_option("--predictions", eval_predictions, "predictions csv")
      ->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed()) {
      const Cohort c = generate_synthetic_cohort(sc);
      write_cohort(c, gen_out);
      std::cout << "wrote " << c.records.size() << " patients, "
                << c.variate_ids().size() << " variates to " << gen_out
                << "\n";
      return 0;
    }

    if (run->parsed()) {
      apply_config(run, rf);
      if (rf.cohort_dir.empty())
        throw Error(Errc::invalid_parameter,
                    "no cohort: pass --cohort or a --config with one");
      const Cohort c = load_cohort_dir(rf.cohort_dir);
      const RunConfig cfg = to_config(rf);
      const RunOutput out =
          run_pipeline(c, cfg, resolve_run_root(rf.run_root), rf.force);
      print_row(out.row);
      std::cerr << (out.reused ? "reused " : "wrote ") << out.run_dir << "\n";
      return 0;
    }

    if (sweep->parsed()) {
      apply_config(sweep, sf);
      if (sf.cohort_dir.empty())
        throw Error(Errc::invalid_parameter,
                    "no cohort: pass --cohort or a --config with one");
      const Cohort c = load_cohort_dir(sf.cohort_dir);
      const RunConfig base = to_config(sf);
      const std::string root = resolve_run_root(sf.run_root);
      if (sweep_repeats < 1)
        throw Error(Errc::invalid_parameter, "--repeats must be >= 1");
      if (sweep_axis == "k") sweep_axis = "k_clusters";
      if (sweep_axis == "hours") sweep_axis = "observation_hours";
      if (sweep_axis != "k_clusters" && sweep_axis != "lambda" &&
          sweep_axis != "observation_hours" && sweep_axis != "workers")
        throw Error(Errc::invalid_parameter,
                    "unknown sweep axis '" + sweep_axis + "'");

      std::vector<double> values;
      std::stringstream ss(sweep_values);
      std::string item;
      while (std::getline(ss, item, ','))
        if (!item.empty()) values.push_back(std::stod(item));
      if (values.size() < 2)
        throw Error(Errc::invalid_parameter,
                    "--values needs at least 2 values");

      fs::create_directories(root);
      const std::string sweep_path =
          (fs::path(root) / ("sweep_" + sweep_axis + ".csv")).string();
      std::ofstream sout(sweep_path, std::ios::binary);
      sout << sweep_axis
           << ",repeats_ok,auc,accuracy,specificity,precision,recall,"
              "f_measure,wall_clock_s\n";
      for (double v : values) {
        double auc = 0, acc = 0, spec = 0, prec = 0, rec = 0, f = 0;
        double wall = 0;
        int ok = 0;
        for (int r = 0; r < sweep_repeats; ++r) {
          RunConfig cfg = base;
          cfg.seed = base.seed + static_cast<std::uint64_t>(r);
          if (sweep_axis == "k_clusters") {
            cfg.k_clusters = static_cast<int>(v);
          } else if (sweep_axis == "lambda") {
            cfg.lambda = static_cast<int>(v);
          } else if (sweep_axis == "observation_hours") {
            cfg.observation_hours = v;
          } else {
            cfg.workers = static_cast<int>(v);
          }
          try {
            const RunOutput out = run_pipeline(c, cfg, root, /*force=*/true);
            auc += out.row.metrics.auc;
            acc += out.row.metrics.accuracy;
            spec += out.row.metrics.specificity;
            prec += out.row.metrics.precision;
            rec += out.row.metrics.recall;
            f += out.row.metrics.f_measure;
            wall += out.row.wall_clock_s;
            ++ok;
          } catch (const Error& e) {
            std::cerr << "sweep " << sweep_axis << "=" << v << " rep " << r
                      << " failed: " << e.what() << "\n";
          }
        }
        const double d = ok > 0 ? ok : 1;
        sout << v << ',' << ok << ',' << auc / d << ',' << acc / d << ','
             << spec / d << ',' << prec / d << ',' << rec / d << ',' << f / d
             << ',' << wall / d << "\n";
        sout.flush();
      }
      std::cout << "wrote " << sweep_path << "\n";
      return 0;
    }

    if (bench->parsed()) {
      const BenchResult r =
          bench_dtw(bench_n, bench_len, bench_workers, bench_seed);
      append_bench_csv(r, bench_out);
      std::cout << "n=" << r.n_patients << " len=" << r.series_len
                << " workers=" << r.workers << " seconds=" << r.seconds
                << "\n";
      return 0;
    }

    if (coord->parsed()) {
      std::ifstream in(coord_job);
      if (!in)
        throw Error(Errc::io_failure, "cannot open job file " + coord_job);
      std::stringstream buf;
      buf << in.rdbuf();
      const JobManifest manifest = manifest_from_json(buf.str());
      DistOptions opt;
      opt.task_timeout_s = coord_timeout;
      opt.retry_budget = coord_retry;
      opt.min_workers = coord_min_workers;
      opt.register_wait_s = coord_wait;
      opt.on_listening = [](int port) {
        std::cerr << "listening on port " << port << "\n";
      };
      const auto blocks = run_distributed(manifest, coord_listen, opt);
      write_blocks_csv(blocks, coord_out);
      std::cout << "wrote " << coord_out << "\n";
      return 0;
    }

    if (worker->parsed()) {
      Cohort c = load_cohort_dir(worker_cohort);
      if (worker_hours > 0.0) c = truncate_series(c, worker_hours);
      worker_serve(worker_connect, c);
      return 0;  // unreachable; worker_serve loops forever
    }

    if (eval->parsed()) {
      const auto rows = read_predictions_csv(eval_predictions);
      const Metrics m = evaluate_predictions(rows);
      nlohmann::json j;
      j["n"] = rows.size();
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
      std::cout << j.dump(2) << "\n";
      return 0;
    }
  } catch (const Error& e) {
    std::cerr << "simfuse: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "simfuse: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
