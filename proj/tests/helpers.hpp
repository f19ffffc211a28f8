#pragma once

#include <unistd.h>

#include <filesystem>
#include <fstream>
#include <string>

#include "simfuse/cohort.hpp"
#include "simfuse/rng.hpp"

namespace simfuse::test {

// Unique scratch directory, removed on destruction.
struct TempDir {
  std::filesystem::path path;

  explicit TempDir(const std::string& tag) {
    static int counter = 0;
    path = std::filesystem::temp_directory_path() /
           ("simfuse_" + tag + "_" + std::to_string(::getpid()) + "_" +
            std::to_string(counter++));
    std::filesystem::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path, ec);
  }
  std::string str() const { return path.string(); }
  std::string file(const std::string& name) const {
    return (path / name).string();
  }
};

inline void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
}

inline std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// Small deterministic cohort with two variates ("hr", "bp"); patient i gets
// label_cad = i % 2 and a short series whose level depends on the label.
inline Cohort make_cohort(std::size_t n, std::uint64_t seed = 5,
                          std::size_t series_len = 8) {
  Cohort c;
  c.schema = static_schema();
  Rng rng(seed);
  for (std::size_t i = 0; i < n; ++i) {
    PatientRecord r;
    r.id = "p" + std::to_string(i);
    const int lab = static_cast<int>(i % 2);
    r.label_cad = lab;
    r.label_chf = static_cast<int>(i % 3 == 0);
    r.statics = {50.0 + 10.0 * lab + rng.normal(0, 2),
                 70.0 + 5.0 * lab + rng.normal(0, 2),
                 160.0 + rng.normal(0, 4),
                 static_cast<double>(i % 2),
                 static_cast<double>((i / 2) % 2)};
    for (const char* vid : {"bp", "hr"}) {
      TimeSeries ts;
      for (std::size_t k = 0; k < series_len; ++k) {
        ts.timestamps.push_back(600.0 * static_cast<double>(k + 1));
        ts.values.push_back(10.0 * lab + rng.normal(0, 1));
      }
      r.series[vid] = std::move(ts);
    }
    c.records.push_back(std::move(r));
  }
  c.rebuild_index();
  return c;
}

}  // namespace simfuse::test
