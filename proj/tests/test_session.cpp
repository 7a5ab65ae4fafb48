#include <doctest.h>

#include <fstream>
#include <sstream>

#include "experiment.hpp"
#include "session.hpp"
#include "support/test_util.hpp"

using namespace gridrel;
using gridrel::testing::TempDir;

namespace {

SessionConfig session_config(const TempDir& dir, bool csv = false) {
  SessionConfig cfg;
  cfg.db_dir = dir.str() + "/db";
  cfg.page_size = 512;
  cfg.use_cache = false;
  cfg.csv = csv;
  return cfg;
}

}  // namespace

TEST_CASE("a warm point query costs two page reads end to end") {
  TempDir dir;
  Session s(session_config(dir, true));
  std::ostringstream out;
  s.handle("CREATE TABLE T (A INTEGER, B INTEGER)", out);
  for (int i = 0; i < 40; ++i)
    s.handle("INSERT INTO T VALUES (" + std::to_string(i) + ", " +
                 std::to_string(i * 3) + ")",
             out);
  // Warm: relation handle open, scales and piece table resident.
  s.handle("SELECT * FROM T WHERE A = 7 AND B = 21", out);
  s.handle(".reset", out);
  out.str("");
  s.handle("SELECT * FROM T WHERE A = 7 AND B = 21", out);
  CHECK(out.str().find("7,21") != std::string::npos);
  out.str("");
  s.handle(".access", out);
  CHECK(out.str().find("access,data,1,0") != std::string::npos);
  CHECK(out.str().find("access,dir,1,0") != std::string::npos);
  CHECK(out.str().find("access,total,2,0") != std::string::npos);
}

TEST_CASE("stats output reports occupancy, redundancy and partitions") {
  TempDir dir;
  Session s(session_config(dir));
  std::ostringstream out;
  s.handle("CREATE TABLE T (A INTEGER, B INTEGER)", out);
  for (int i = 0; i < 30; ++i)
    s.handle("INSERT INTO T VALUES (" + std::to_string(i * 17 % 301) + ", " +
                 std::to_string(i) + ")",
             out);
  out.str("");
  s.handle(".stats T", out);
  std::string text = out.str();
  CHECK(text.find("occupancy=") != std::string::npos);
  CHECK(text.find("redundancy=") != std::string::npos);
  CHECK(text.find("A=") != std::string::npos);
  CHECK(text.find("B=") != std::string::npos);
}

TEST_CASE("explain on a two-relation equijoin shows one merge group") {
  TempDir dir;
  Session s(session_config(dir));
  std::ostringstream out;
  s.handle("CREATE TABLE R1 (A INTEGER)", out);
  s.handle("CREATE TABLE R2 (B INTEGER)", out);
  out.str("");
  s.handle(".explain SELECT * FROM R1, R2 WHERE R1.A = R2.B", out);
  CHECK(out.str().find("merge join") != std::string::npos);
}

TEST_CASE("script execution is sequential; strict mode stops with exit 1") {
  TempDir dir;
  std::string path = dir.str() + "/script.sql";
  {
    std::ofstream f(path);
    f << "-- build a small relation\n"
         "CREATE TABLE T (A INTEGER);\n"
         "INSERT INTO T VALUES (1);\n"
         "INSERT INTO T VALUES (oops);\n"
         "INSERT INTO T VALUES (2);\n";
  }
  SessionConfig cfg = session_config(dir);
  cfg.strict = true;
  Session s(cfg);
  std::ifstream in(path);
  std::ostringstream out;
  int rc = s.run_stream(in, out, false);
  CHECK(rc == 1);
  // Partial effects persist: the first insert happened.
  std::ostringstream out2;
  s.handle("SELECT * FROM T", out2);
  CHECK(out2.str().find("(1 row)") != std::string::npos);

  // Empty script exits 0.
  std::istringstream empty("");
  Session s2(session_config(dir));
  CHECK(s2.run_stream(empty, out, false) == 0);
}

TEST_CASE("malformed input never kills the session or the database") {
  TempDir dir;
  Session s(session_config(dir));
  std::ostringstream out;
  s.handle("CREATE TABLE T (A INTEGER)", out);
  s.handle("INSERT INTO T VALUES (5)", out);
  const char* junk[] = {"'",  "SELECT * FRO T", ");;;", "INSERT INTO",
                        ".bogus", "DROP TABLE", "\x7f\x01"};
  for (const char* j : junk) s.handle(j, out);
  out.str("");
  s.handle("SELECT * FROM T", out);
  CHECK(out.str().find("(1 row)") != std::string::npos);
}

TEST_CASE("multi-line statements accumulate until the semicolon") {
  TempDir dir;
  Session s(session_config(dir));
  std::istringstream in(
      "CREATE TABLE T (A INTEGER);\n"
      "INSERT INTO T\n"
      "VALUES (42);\n"
      "SELECT *\nFROM T;\n");
  std::ostringstream out;
  CHECK(s.run_stream(in, out, false) == 0);
  CHECK(out.str().find("42") != std::string::npos);
}

TEST_CASE("empty experiment reports redundancy exactly 1 for both policies") {
  TempDir dir;
  ExperimentSpec spec;
  spec.tuples = 0;
  spec.page_size = 512;
  ExperimentReport r = run_split_policy_experiment(spec, dir.str() + "/exp");
  CHECK(r.entries.size() == 4);
  for (const auto& e : r.entries) {
    CHECK(e.stats.redundancy == doctest::Approx(1.0));
    CHECK(e.stats.occupancy == doctest::Approx(0.0));
  }
}

TEST_CASE("experiment CSV output is byte-stable for a fixed seed") {
  TempDir dir;
  ExperimentSpec spec;
  spec.tuples = 120;
  spec.seed = 7;
  spec.page_size = 512;
  spec.bucket_capacity = 3;
  ExperimentReport a = run_split_policy_experiment(spec, dir.str() + "/a");
  ExperimentReport b = run_split_policy_experiment(spec, dir.str() + "/b");
  std::ostringstream ra, rb;
  render_report(a, ra, true);
  render_report(b, rb, true);
  CHECK(ra.str() == rb.str());
  CHECK(ra.str().find("stats,roundrobin,BOOKS,redundancy,") != std::string::npos);
}
