#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <algorithm>
#include <cmath>
#include <set>
#include <string>
#include <vector>

#include "doctest.h"
#include "helpers.hpp"
#include "simfuse/cohort.hpp"
#include "simfuse/cohort_io.hpp"
#include "simfuse/csv.hpp"
#include "simfuse/error.hpp"
#include "simfuse/hash.hpp"
#include "simfuse/rng.hpp"
#include "simfuse/synthetic.hpp"

using namespace simfuse;
using simfuse::test::TempDir;
using simfuse::test::write_text;

TEST_CASE("csv split and join") {
  CHECK(csv::split_line("a,b,c") == std::vector<std::string>{"a", "b", "c"});
  CHECK(csv::split_line("a,,c\r") == std::vector<std::string>{"a", "", "c"});
  CHECK(csv::split_line("x") == std::vector<std::string>{"x"});
  CHECK(csv::join({"a", "b"}) == "a,b");
}

TEST_CASE("csv double formatting round-trips") {
  for (double v : {0.1, -0.25, 1.0 / 3.0, 1e300, 1e-300, 0.0, 42.0,
                   123456.789, -9.99e-5}) {
    const std::string s = csv::format_double(v);
    CHECK(csv::parse_double(s, "mem", 0) == v);
  }
}

TEST_CASE("csv parse errors carry context") {
  CHECK_THROWS_AS(csv::parse_double("12x", "f.csv", 3), Error);
  CHECK_THROWS_AS(csv::parse_double("", "f.csv", 3), Error);
  CHECK_THROWS_AS(csv::parse_int("1.5", "f.csv", 3), Error);
  try {
    csv::parse_double("nope", "f.csv", 3);
  } catch (const Error& e) {
    CHECK(e.code() == Errc::invalid_parameter);
    CHECK(std::string(e.what()).find("f.csv") != std::string::npos);
  }
}

TEST_CASE("csv read_file validates header and arity") {
  TempDir td("csv");
  write_text(td.file("good.csv"), "a,b\n1,2\n3,4\n");
  const auto t = csv::read_file(td.file("good.csv"), {"a", "b"});
  CHECK(t.rows.size() == 2);
  CHECK(t.rows[1][1] == "4");

  write_text(td.file("bad_header.csv"), "a,c\n1,2\n");
  CHECK_THROWS_AS(csv::read_file(td.file("bad_header.csv"), {"a", "b"}), Error);

  write_text(td.file("ragged.csv"), "a,b\n1\n");
  CHECK_THROWS_AS(csv::read_file(td.file("ragged.csv"), {"a", "b"}), Error);

  CHECK_THROWS_AS(csv::read_file(td.file("absent.csv"), {"a"}), Error);
}

TEST_CASE("fnv1a matches the published test vectors") {
  CHECK(Fnv1a().value() == 0xcbf29ce484222325ULL);
  CHECK(Fnv1a().bytes("a", 1).value() == 0xaf63dc4c8601ec8cULL);
  CHECK(Fnv1a().bytes("foobar", 6).value() == 0x85944171f73967e8ULL);
  CHECK(Fnv1a().bytes("a", 1).hex() == "af63dc4c8601ec8c");
  // field separation: ("ab","c") and ("a","bc") must differ
  CHECK(Fnv1a().str("ab").str("c").value() != Fnv1a().str("a").str("bc").value());
}

TEST_CASE("rng reproduces and respects ranges") {
  Rng a(123), b(123);
  for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());

  Rng r(7);
  for (int i = 0; i < 1000; ++i) {
    const double u = r.uniform();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    CHECK(r.uniform_index(17) < 17);
    CHECK_FALSE(r.bernoulli(0.0));
    CHECK(r.bernoulli(1.0));
  }

  double sum = 0.0, sq = 0.0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) {
    const double x = r.normal();
    sum += x;
    sq += x * x;
  }
  const double mean = sum / n;
  const double var = sq / n - mean * mean;
  CHECK(std::abs(mean) < 0.05);
  CHECK(std::abs(var - 1.0) < 0.1);
}

TEST_CASE("split_cohort sizes, determinism, and validation") {
  const Cohort c = simfuse::test::make_cohort(10);
  const Split s = split_cohort(c, 0.2, 42);
  CHECK(s.test_ids.size() == 2);
  CHECK(s.train_ids.size() == 8);

  std::set<std::string> all(s.train_ids.begin(), s.train_ids.end());
  all.insert(s.test_ids.begin(), s.test_ids.end());
  CHECK(all.size() == 10);

  const Split again = split_cohort(c, 0.2, 42);
  CHECK(again.train_ids == s.train_ids);
  CHECK(again.test_ids == s.test_ids);

  const Split other = split_cohort(c, 0.2, 43);
  CHECK((other.train_ids != s.train_ids || other.test_ids != s.test_ids));

  CHECK(split_cohort(c, 0.0, 1).test_ids.empty());
  CHECK_THROWS_AS(split_cohort(c, 1.5, 1), Error);
  CHECK_THROWS_AS(split_cohort(c, -0.1, 1), Error);

  const Cohort tiny = simfuse::test::make_cohort(1);
  CHECK_THROWS_AS(split_cohort(tiny, 0.2, 1), Error);
}

TEST_CASE("truncate_series keeps the boundary sample and drops empty series") {
  Cohort c = simfuse::test::make_cohort(2, 5, 8);
  // samples at 600..4800 s; 1 hour keeps timestamps <= 3600 (6 samples)
  const Cohort t = truncate_series(c, 1.0);
  for (const auto& r : t.records)
    for (const auto& [vid, ts] : r.series) {
      CHECK(ts.timestamps.size() == 6);
      CHECK(ts.timestamps.back() == 3600.0);
    }

  // a window before the first sample removes the variate entirely
  const Cohort none = truncate_series(c, 600.0 / 3600.0 / 2.0);
  for (const auto& r : none.records) CHECK(r.series.empty());

  CHECK_THROWS_AS(truncate_series(c, 0.0), Error);
  CHECK_THROWS_AS(truncate_series(c, -1.0), Error);
}

TEST_CASE("fingerprint tracks content") {
  Cohort a = simfuse::test::make_cohort(4);
  Cohort b = simfuse::test::make_cohort(4);
  CHECK(a.fingerprint() == b.fingerprint());

  b.records[2].statics[0] += 1.0;
  CHECK(a.fingerprint() != b.fingerprint());

  Cohort c = simfuse::test::make_cohort(4);
  c.records[1].series["hr"].values[3] += 1e-9;
  CHECK(a.fingerprint() != c.fingerprint());
}

TEST_CASE("cohort io round-trips exactly") {
  const Cohort c = simfuse::test::make_cohort(6);
  TempDir td("io");
  write_cohort(c, td.str());
  const Cohort back = load_cohort_dir(td.str());
  CHECK(back.records.size() == 6);
  CHECK(back.fingerprint() == c.fingerprint());
}

TEST_CASE("cohort io rejects malformed inputs") {
  TempDir td("bad");
  std::filesystem::create_directories(td.path / "series");
  const std::string header =
      "patient_id,age,weight,height,gender,admission_type,cad,chf\n";

  SUBCASE("non-binary label") {
    write_text(td.file("static.csv"), header + "p0,50,70,160,0,0,2,0\n");
    CHECK_THROWS_WITH_AS(load_cohort_dir(td.str()),
                         doctest::Contains("cad"), Error);
  }
  SUBCASE("duplicate patient id") {
    write_text(td.file("static.csv"),
               header + "p0,50,70,160,0,0,1,0\np0,51,71,161,1,1,0,1\n");
    try {
      load_cohort_dir(td.str());
      FAIL("expected DuplicatePatientId");
    } catch (const Error& e) {
      CHECK(e.code() == Errc::duplicate_patient_id);
    }
  }
  SUBCASE("unknown patient in a series file") {
    write_text(td.file("static.csv"), header + "p0,50,70,160,0,0,1,0\n");
    write_text((td.path / "series" / "hr.csv").string(),
               "patient_id,timestamp_s,value\nghost,600,80\n");
    try {
      load_cohort_dir(td.str());
      FAIL("expected UnknownPatient");
    } catch (const Error& e) {
      CHECK(e.code() == Errc::unknown_patient);
    }
  }
  SUBCASE("non-monotone timestamps") {
    write_text(td.file("static.csv"), header + "p0,50,70,160,0,0,1,0\n");
    write_text((td.path / "series" / "hr.csv").string(),
               "patient_id,timestamp_s,value\np0,600,80\np0,600,81\n");
    try {
      load_cohort_dir(td.str());
      FAIL("expected NonMonotoneTimestamps");
    } catch (const Error& e) {
      CHECK(e.code() == Errc::non_monotone_timestamps);
    }
  }
  SUBCASE("non-finite value") {
    write_text(td.file("static.csv"), header + "p0,nan,70,160,0,0,1,0\n");
    CHECK_THROWS_AS(load_cohort_dir(td.str()), Error);
  }
}

TEST_CASE("synthetic cohort shape and determinism") {
  SyntheticConfig cfg;
  cfg.n_patients = 60;
  cfg.n_variates = 3;
  cfg.series_len = 20;
  cfg.seed = 9;
  cfg.missing_frac = 0.0;

  const Cohort a = generate_synthetic_cohort(cfg);
  CHECK(a.records.size() == 60);
  CHECK(a.variate_ids().size() == 3);
  for (const auto& r : a.records) {
    CHECK(r.series.size() == 3);
    for (const auto& [vid, ts] : r.series) {
      CHECK(ts.values.size() == 20);
      CHECK(std::is_sorted(ts.timestamps.begin(), ts.timestamps.end()));
      CHECK(ts.timestamps.front() == 600.0);
    }
    CHECK((r.label_cad == 0 || r.label_cad == 1));
    CHECK(r.statics.size() == a.schema.size());
  }

  const Cohort b = generate_synthetic_cohort(cfg);
  CHECK(a.fingerprint() == b.fingerprint());

  SyntheticConfig cfg2 = cfg;
  cfg2.seed = 10;
  CHECK(generate_synthetic_cohort(cfg2).fingerprint() != a.fingerprint());
}

TEST_CASE("synthetic missing fraction removes whole series") {
  SyntheticConfig cfg;
  cfg.n_patients = 200;
  cfg.n_variates = 4;
  cfg.series_len = 10;
  cfg.missing_frac = 0.3;
  cfg.seed = 4;
  const Cohort c = generate_synthetic_cohort(cfg);
  std::size_t present = 0;
  for (const auto& r : c.records) present += r.series.size();
  const double frac = static_cast<double>(present) / (200.0 * 4.0);
  CHECK(frac > 0.6);
  CHECK(frac < 0.8);
}

TEST_CASE("synthetic label prevalence is near one half") {
  SyntheticConfig cfg;
  cfg.n_patients = 1000;
  cfg.n_variates = 1;
  cfg.series_len = 4;
  cfg.signal_strength = 0.0;
  cfg.seed = 21;
  const Cohort c = generate_synthetic_cohort(cfg);
  int pos = 0;
  for (const auto& r : c.records) pos += r.label_cad;
  CHECK(pos > 400);
  CHECK(pos < 600);
}

TEST_CASE("synthetic config validation") {
  SyntheticConfig cfg;
  cfg.n_patients = 0;
  CHECK_THROWS_AS(generate_synthetic_cohort(cfg), Error);
  cfg = {};
  cfg.n_variates = 99;
  CHECK_THROWS_AS(generate_synthetic_cohort(cfg), Error);
  cfg = {};
  cfg.missing_frac = 1.5;
  CHECK_THROWS_AS(generate_synthetic_cohort(cfg), Error);
  cfg = {};
  cfg.series_len = 0;
  CHECK_THROWS_AS(generate_synthetic_cohort(cfg), Error);
}

TEST_CASE("target names round-trip") {
  CHECK(target_from_name("cad") == Target::cad);
  CHECK(target_from_name("chf") == Target::chf);
  CHECK(std::string(target_name(Target::chf)) == "chf");
  CHECK_THROWS_AS(target_from_name("flu"), Error);
}
