#include <doctest.h>

#include <random>

#include "gridrel/database.hpp"
#include "gridrel/parser.hpp"
#include "support/oracles.hpp"
#include "support/test_util.hpp"

using namespace gridrel;
using gridrel::testing::TempDir;
using gridrel::testing::reference_select;
using gridrel::testing::rnd_int;
using gridrel::testing::row_fingerprints;

namespace {

Database::Config small_config(const TempDir& dir) {
  Database::Config cfg;
  cfg.dir = dir.str();
  cfg.page_size = 512;
  cfg.use_cache = false;
  return cfg;
}

}  // namespace

TEST_CASE("catalog create, lookup, reopen and drop") {
  TempDir dir;
  {
    Database db(small_config(dir));
    db.execute("CREATE TABLE T (A INTEGER, B CHAR(8), C INTEGER) GRID (A, C)");
    RelationSchema s = db.catalog().lookup("T");
    CHECK(s.attrs.size() == 3);
    CHECK(s.attrs[1].name == "B");
    CHECK(s.attrs[1].width == 8);
    CHECK(s.grid_attrs == std::vector<uint32_t>{0, 2});
    CHECK_THROWS_WITH_AS(db.execute("CREATE TABLE T (X INTEGER)"),
                         doctest::Contains("already exists"), EngineError);
    db.execute("INSERT INTO T VALUES (1, 'X', 2)");
  }
  {
    Database db(small_config(dir));
    RelationSchema s = db.catalog().lookup("T");
    CHECK(s.attrs.size() == 3);
    auto res = db.execute("SELECT * FROM T");
    CHECK(res.rows.size() == 1);
    db.execute("DROP TABLE T");
    CHECK_THROWS_WITH_AS(db.catalog().lookup("T"), doctest::Contains("not found"),
                         EngineError);
    CHECK(!GridFile::exists(dir.str(), "T"));
    CHECK_THROWS_AS(db.execute("DROP TABLE RELCAT"), EngineError);
  }
  Database db(small_config(dir));
  CHECK(!db.catalog().exists("T"));
}

TEST_CASE("catalogs are ordinary relations and can be queried") {
  TempDir dir;
  Database db(small_config(dir));
  db.execute("CREATE TABLE T (A INTEGER)");
  auto res = db.execute("SELECT RELNAME, NATTRS FROM RELCAT WHERE RELNAME = 'T'");
  REQUIRE(res.rows.size() == 1);
  CHECK(std::get<std::string>(res.rows[0][0]) == "T");
  CHECK(std::get<int32_t>(res.rows[0][1]) == 1);
}

TEST_CASE("semantic errors name the offender") {
  TempDir dir;
  Database db(small_config(dir));
  db.execute("CREATE TABLE T (A INTEGER, B CHAR(4))");
  CHECK_THROWS_WITH_AS(db.execute("SELECT * FROM T WHERE NOPE = 1"),
                       doctest::Contains("NOPE"), EngineError);
  CHECK_THROWS_WITH_AS(db.execute("SELECT * FROM MISSING"),
                       doctest::Contains("MISSING"), EngineError);
  CHECK_THROWS_AS(db.execute("SELECT * FROM T WHERE B = 'TOOLONGVALUE'"),
                  EngineError);
  CHECK_THROWS_AS(db.execute("SELECT * FROM T WHERE A = 'X'"), EngineError);
  CHECK_THROWS_AS(db.execute("SELECT * FROM T WHERE B = 5"), EngineError);
  CHECK_THROWS_AS(db.execute("INSERT INTO T VALUES (1)"), EngineError);
  CHECK_THROWS_AS(db.execute("INSERT INTO T VALUES ('X', 'Y')"), EngineError);
}

TEST_CASE("create, insert and select round trip") {
  TempDir dir;
  Database db(small_config(dir));
  db.execute("CREATE TABLE T (A INTEGER, B CHAR(8))");
  db.execute("INSERT INTO T VALUES (1, 'ONE')");
  db.execute("INSERT INTO T VALUES (2, 'TWO')");
  db.execute("INSERT INTO T VALUES (3, 'THREE')");
  auto res = db.execute("SELECT * FROM T");
  CHECK(res.columns == std::vector<std::string>{"A", "B"});
  CHECK(res.rows.size() == 3);
  auto res2 = db.execute("SELECT B FROM T WHERE A >= 2");
  CHECK(res2.rows.size() == 2);
  auto none = db.execute("DELETE FROM T WHERE A > 100");
  CHECK(none.count == 0);
  auto some = db.execute("DELETE FROM T WHERE B = 'TWO'");
  CHECK(some.count == 1);
  CHECK(db.execute("SELECT * FROM T").rows.size() == 2);
}

TEST_CASE("update rewrites tuples and keeps grid placement correct") {
  TempDir dir;
  Database db(small_config(dir));
  db.execute("CREATE TABLE T (A INTEGER, B INTEGER) GRID (A)");
  for (int i = 0; i < 50; ++i)
    db.execute("INSERT INTO T VALUES (" + std::to_string(i) + ", 0)");
  auto res = db.execute("UPDATE T SET A = 500 WHERE A < 10");
  CHECK(res.count == 10);
  auto moved = db.execute("SELECT * FROM T WHERE A = 500");
  CHECK(moved.rows.size() == 10);
  CHECK(db.execute("SELECT * FROM T WHERE A < 10").rows.empty());
  CHECK(db.execute("SELECT * FROM T").rows.size() == 50);
}

TEST_CASE("single relation plans are one scan group") {
  TempDir dir;
  Database db(small_config(dir));
  db.execute("CREATE TABLE R (A INTEGER, B INTEGER)");
  Statement s = parse_statement("SELECT * FROM R WHERE A = 1");
  SelectStmt q = std::move(std::get<SelectStmt>(s));
  JoinPlan plan = make_plan(db, q);
  REQUIRE(plan.groups.size() == 1);
  CHECK(!plan.groups[0].is_merge());
  CHECK(plan_groups_valid(plan, q.where.get()));
}

TEST_CASE("a pure equijoin forms one merge group") {
  TempDir dir;
  Database db(small_config(dir));
  db.execute("CREATE TABLE R1 (A INTEGER, X INTEGER)");
  db.execute("CREATE TABLE R2 (B INTEGER, Y INTEGER)");
  Statement s = parse_statement("SELECT * FROM R1, R2 WHERE R1.A = R2.B");
  SelectStmt q = std::move(std::get<SelectStmt>(s));
  JoinPlan plan = make_plan(db, q);
  REQUIRE(plan.groups.size() == 1);
  CHECK(plan.groups[0].is_merge());
  CHECK(plan.groups[0].members.size() == 2);
  CHECK(plan_groups_valid(plan, q.where.get()));
}

TEST_CASE("a relation joined on two different attributes splits the groups") {
  TempDir dir;
  Database db(small_config(dir));
  db.execute("CREATE TABLE R1 (A INTEGER, C INTEGER)");
  db.execute("CREATE TABLE R2 (B INTEGER)");
  db.execute("CREATE TABLE R3 (D INTEGER)");
  Statement s = parse_statement(
      "SELECT * FROM R1, R2, R3 WHERE R1.A = R2.B AND R1.C = R3.D");
  SelectStmt q = std::move(std::get<SelectStmt>(s));
  JoinPlan plan = make_plan(db, q);
  // R2 and R3 cannot share R1's group: two groups, nested across.
  CHECK(plan.groups.size() == 2);
  CHECK(plan_groups_valid(plan, q.where.get()));
  bool r1_merged = false;
  for (const PlanGroup& g : plan.groups)
    for (size_t m : g.members)
      if (plan.relations[m].name == "R1" && g.is_merge()) r1_merged = true;
  CHECK(r1_merged);
}

TEST_CASE("a non-equijoin term between two relations blocks merging") {
  TempDir dir;
  Database db(small_config(dir));
  db.execute("CREATE TABLE R1 (A INTEGER, C INTEGER)");
  db.execute("CREATE TABLE R2 (B INTEGER, D INTEGER)");
  Statement s = parse_statement(
      "SELECT * FROM R1, R2 WHERE R1.A = R2.B AND R1.C < R2.D");
  SelectStmt q = std::move(std::get<SelectStmt>(s));
  JoinPlan plan = make_plan(db, q);
  CHECK(plan.groups.size() == 2);
  for (const PlanGroup& g : plan.groups) CHECK(!g.is_merge());
  CHECK(plan_groups_valid(plan, q.where.get()));
}

TEST_CASE("explain shows a merge group and its regions") {
  TempDir dir;
  Database db(small_config(dir));
  db.execute("CREATE TABLE R1 (A INTEGER)");
  db.execute("CREATE TABLE R2 (B INTEGER)");
  std::string text = db.explain("SELECT * FROM R1, R2 WHERE R1.A = R2.B");
  CHECK(text.find("merge join") != std::string::npos);
  CHECK(text.find("R1(A)") != std::string::npos);
  CHECK(text.find("R2(B)") != std::string::npos);
  CHECK(text.find("nested cost") != std::string::npos);
}

TEST_CASE("duplicate join keys produce the cross product of the runs") {
  TempDir dir;
  Database db(small_config(dir));
  db.execute("CREATE TABLE L (K INTEGER, T INTEGER)");
  db.execute("CREATE TABLE R (K INTEGER, U INTEGER)");
  for (int k : {1, 2, 2}) db.execute("INSERT INTO L VALUES (" + std::to_string(k) + ", 0)");
  for (int k : {2, 2, 3}) db.execute("INSERT INTO R VALUES (" + std::to_string(k) + ", 1)");
  auto res = db.execute("SELECT * FROM L, R WHERE L.K = R.K");
  CHECK(res.rows.size() == 4);
  for (const auto& row : res.rows) {
    CHECK(std::get<int32_t>(row[0]) == 2);
    CHECK(std::get<int32_t>(row[2]) == 2);
  }
}

TEST_CASE("merge join of empty inputs is empty") {
  TempDir dir;
  Database db(small_config(dir));
  db.execute("CREATE TABLE L (K INTEGER)");
  db.execute("CREATE TABLE R (K INTEGER)");
  CHECK(db.execute("SELECT * FROM L, R WHERE L.K = R.K").rows.empty());
}

TEST_CASE("order by returns rows sorted by the named column") {
  TempDir dir;
  Database db(small_config(dir));
  db.execute("CREATE TABLE T (A INTEGER, B CHAR(4)) GRID (A)");
  std::mt19937 rng(5);
  for (int i = 0; i < 80; ++i)
    db.execute("INSERT INTO T VALUES (" + std::to_string(rnd_int(rng, 0, 50)) +
               ", '" + gridrel::testing::rnd_string(rng, 3) + "')");
  auto asc = db.execute("SELECT * FROM T ORDER BY A");
  REQUIRE(asc.rows.size() == 80);
  for (size_t i = 1; i < asc.rows.size(); ++i)
    CHECK(std::get<int32_t>(asc.rows[i - 1][0]) <= std::get<int32_t>(asc.rows[i][0]));
  auto desc = db.execute("SELECT * FROM T ORDER BY B DESC");
  for (size_t i = 1; i < desc.rows.size(); ++i)
    CHECK(std::get<std::string>(desc.rows[i - 1][1]) >=
          std::get<std::string>(desc.rows[i][1]));
}

TEST_CASE("randomized queries match the reference evaluator either join way") {
  std::mt19937 rng(777);
  TempDir dir;
  Database db(small_config(dir));
  struct Rel {
    std::string name;
    std::vector<Tuple> rows;
  };
  std::vector<Rel> rels = {{"S1", {}}, {"S2", {}}, {"S3", {}}};
  db.execute("CREATE TABLE S1 (A INTEGER, B INTEGER, P INTEGER) GRID (A, B)");
  db.execute("CREATE TABLE S2 (A INTEGER, C INTEGER) GRID (A)");
  db.execute("CREATE TABLE S3 (D INTEGER, E CHAR(4))");
  for (int i = 0; i < 60; ++i) {
    Tuple t{Value{rnd_int(rng, 0, 12)}, Value{rnd_int(rng, 0, 12)},
            Value{rnd_int(rng, 0, 5)}};
    rels[0].rows.push_back(t);
    db.execute("INSERT INTO S1 VALUES (" + value_to_string(t[0]) + ", " +
               value_to_string(t[1]) + ", " + value_to_string(t[2]) + ")");
  }
  for (int i = 0; i < 40; ++i) {
    Tuple t{Value{rnd_int(rng, 0, 12)}, Value{rnd_int(rng, 0, 5)}};
    rels[1].rows.push_back(t);
    db.execute("INSERT INTO S2 VALUES (" + value_to_string(t[0]) + ", " +
               value_to_string(t[1]) + ")");
  }
  for (int i = 0; i < 25; ++i) {
    std::string e = gridrel::testing::rnd_string(rng, 2);
    Tuple t{Value{rnd_int(rng, 0, 12)}, Value{e}};
    rels[2].rows.push_back(t);
    db.execute("INSERT INTO S3 VALUES (" + value_to_string(t[0]) + ", '" + e + "')");
  }

  const char* queries[] = {
      "SELECT * FROM S1 WHERE A < 5 AND NOT (B = 3 OR P = 1)",
      "SELECT * FROM S1, S2 WHERE S1.A = S2.A",
      "SELECT S1.P, S2.C FROM S1, S2 WHERE S1.A = S2.A AND S1.B > 4",
      "SELECT * FROM S1, S2 WHERE S1.A = S2.A AND S1.B < S2.C",
      "SELECT * FROM S1, S2, S3 WHERE S1.A = S2.A AND S2.C = S3.D",
      "SELECT * FROM S2, S3 WHERE S2.C < S3.D AND S3.E <> 'AA'",
      "SELECT * FROM S1, S3 WHERE S1.A + 1 = S3.D - 1",
      "SELECT * FROM S2, S3",
  };
  for (const char* sql : queries) {
    INFO("query: " << sql);
    Statement st = parse_statement(sql);
    SelectStmt q = std::move(std::get<SelectStmt>(st));

    // Build the reference bindings in FROM order.
    std::vector<std::pair<RelationSchema, std::vector<Tuple>>> bound;
    for (const std::string& name : q.from)
      for (const Rel& r : rels)
        if (r.name == name) bound.emplace_back(db.catalog().lookup(name), r.rows);

    SelectStmt q_merge = std::move(std::get<SelectStmt>(parse_statement(sql)));
    SelectStmt q_nested = std::move(std::get<SelectStmt>(parse_statement(sql)));
    SelectStmt q_plan = std::move(std::get<SelectStmt>(parse_statement(sql)));
    JoinPlan plan = make_plan(db, q_plan);
    CHECK(plan_groups_valid(plan, q_plan.where.get()));

    ExecResult merged = run_select(db, std::move(q_merge), false);
    ExecResult nested = run_select(db, std::move(q_nested), true);

    SelectStmt q_ref = std::move(std::get<SelectStmt>(parse_statement(sql)));
    std::vector<BoundRelation> br;
    for (const std::string& name : q_ref.from)
      br.push_back(BoundRelation{name, db.catalog().lookup(name)});
    analyze_select(q_ref, br);
    auto expect = reference_select(q_ref, bound);

    CHECK(row_fingerprints(merged.rows) == row_fingerprints(expect));
    CHECK(row_fingerprints(nested.rows) == row_fingerprints(expect));
  }
}
