#include "simfuse/cohort_io.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>

#include "simfuse/csv.hpp"
#include "simfuse/error.hpp"

namespace fs = std::filesystem;

namespace simfuse {

namespace {

const std::vector<std::string> kStaticHeader = {
    "patient_id", "age",           "weight", "height",
    "gender",     "admission_type", "cad",    "chf"};

const std::vector<std::string> kSeriesHeader = {"patient_id", "timestamp_s",
                                                "value"};

int parse_binary(const std::string& field, const std::string& path,
                 std::size_t row, const std::string& column) {
  if (field == "0") return 0;
  if (field == "1") return 1;
  throw Error(Errc::non_binary_label, path + " row " + std::to_string(row) +
                                          ": column " + column +
                                          " must be 0 or 1, got '" + field +
                                          "'");
}

double parse_finite(const std::string& field, const std::string& path,
                    std::size_t row) {
  const double v = csv::parse_double(field, path, row);
  if (!std::isfinite(v)) {
    throw Error(Errc::invalid_parameter,
                path + " row " + std::to_string(row) +
                    ": non-finite value '" + field + "'");
  }
  return v;
}

}  // namespace

Cohort load_cohort(const std::string& static_path,
                   const std::string& series_dir) {
  Cohort c;
  c.schema = static_schema();

  const csv::Table statics = csv::read_file(static_path, kStaticHeader);
  c.records.reserve(statics.rows.size());
  for (std::size_t i = 0; i < statics.rows.size(); ++i) {
    const auto& row = statics.rows[i];
    const std::size_t lineno = i + 2;  // header is row 1
    PatientRecord r;
    r.id = row[0];
    if (r.id.empty()) {
      throw Error(Errc::invalid_parameter,
                  static_path + " row " + std::to_string(lineno) +
                      ": empty patient_id");
    }
    r.statics = {parse_finite(row[1], static_path, lineno),
                 parse_finite(row[2], static_path, lineno),
                 parse_finite(row[3], static_path, lineno),
                 static_cast<double>(
                     parse_binary(row[4], static_path, lineno, "gender")),
                 static_cast<double>(parse_binary(row[5], static_path, lineno,
                                                  "admission_type"))};
    r.label_cad = parse_binary(row[6], static_path, lineno, "cad");
    r.label_chf = parse_binary(row[7], static_path, lineno, "chf");
    c.records.push_back(std::move(r));
  }
  c.rebuild_index();  // throws DuplicatePatientId on repeats

  if (!series_dir.empty() && fs::exists(series_dir)) {
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(series_dir)) {
      if (entry.is_regular_file() && entry.path().extension() == ".csv")
        files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    for (const auto& file : files) {
      const std::string variate_id = file.stem().string();
      const std::string path = file.string();
      const csv::Table tab = csv::read_file(path, kSeriesHeader);
      for (std::size_t i = 0; i < tab.rows.size(); ++i) {
        const auto& row = tab.rows[i];
        const std::size_t lineno = i + 2;
        PatientRecord* rec = c.find_mut(row[0]);
        if (!rec) {
          throw Error(Errc::unknown_patient,
                      path + " row " + std::to_string(lineno) +
                          ": patient '" + row[0] + "' not in static table");
        }
        const double t = parse_finite(row[1], path, lineno);
        const double v = parse_finite(row[2], path, lineno);
        TimeSeries& ts = rec->series[variate_id];
        if (!ts.timestamps.empty() && t <= ts.timestamps.back()) {
          throw Error(Errc::non_monotone_timestamps,
                      path + " row " + std::to_string(lineno) + ": patient '" +
                          row[0] + "' timestamp " + csv::format_double(t) +
                          " not after " +
                          csv::format_double(ts.timestamps.back()));
        }
        ts.timestamps.push_back(t);
        ts.values.push_back(v);
      }
    }
  }
  return c;
}

Cohort load_cohort_dir(const std::string& dir) {
  return load_cohort((fs::path(dir) / "static.csv").string(),
                     (fs::path(dir) / "series").string());
}

void write_cohort(const Cohort& c, const std::string& dir) {
  fs::create_directories(fs::path(dir) / "series");
  {
    std::ofstream out(fs::path(dir) / "static.csv");
    if (!out) throw Error(Errc::io_failure, "cannot write " + dir);
    out << csv::join(kStaticHeader) << "\n";
    for (const auto& r : c.records) {
      out << r.id;
      for (double v : r.statics) out << ',' << csv::format_double(v);
      out << ',' << r.label_cad << ',' << r.label_chf << "\n";
    }
  }
  for (const std::string& vid : c.variate_ids()) {
    std::ofstream out(fs::path(dir) / "series" / (vid + ".csv"));
    if (!out) throw Error(Errc::io_failure, "cannot write series for " + vid);
    out << csv::join(kSeriesHeader) << "\n";
    for (const auto& r : c.records) {
      auto it = r.series.find(vid);
      if (it == r.series.end()) continue;
      for (std::size_t i = 0; i < it->second.timestamps.size(); ++i) {
        out << r.id << ',' << csv::format_double(it->second.timestamps[i])
            << ',' << csv::format_double(it->second.values[i]) << "\n";
      }
    }
  }
}

}  // namespace simfuse
