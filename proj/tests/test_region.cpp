#include <doctest.h>

#include <random>

#include "gridrel/region.hpp"
#include "support/test_util.hpp"

using namespace gridrel;
using gridrel::testing::rnd_int;

namespace {

// Three INTEGER grid attributes plus one non-grid attribute.
RelationSchema lattice_schema() {
  RelationSchema s;
  s.name = "R";
  s.attrs = {{"A1", AttrType::Integer, 4},
             {"A2", AttrType::Integer, 4},
             {"A3", AttrType::Integer, 4},
             {"N1", AttrType::Integer, 4}};
  s.grid_attrs = {0, 1, 2};
  return s;
}

Bytes ival(int32_t v) {
  return encode_value(AttrDef{"X", AttrType::Integer, 4}, Value{v});
}

ExprPtr col(const RelationSchema& s, int attr) {
  auto e = make_column("", s.attrs[attr].name);
  e->column.rel_index = 0;
  e->column.attr_index = attr;
  e->column.type = AttrType::Integer;
  e->column.width = 4;
  e->column.is_grid = false;
  e->column.grid_dim = -1;
  for (size_t g = 0; g < s.grid_attrs.size(); ++g)
    if (s.grid_attrs[g] == uint32_t(attr)) {
      e->column.is_grid = true;
      e->column.grid_dim = int(g);
    }
  return e;
}

ExprPtr cmp(const RelationSchema& s, int attr, CompareOp op, int32_t c) {
  return make_compare(op, col(s, attr), make_int(c));
}

Box box2(int lo1, int hi1, int lo2, int hi2) {
  Box b(2);
  b[0] = Interval{ival(lo1), ival(hi1)};
  b[1] = Interval{ival(lo2), ival(hi2)};
  return b;
}

bool region_disjoint(const RegionSet& r) {
  for (size_t i = 0; i < r.boxes.size(); ++i)
    for (size_t j = i + 1; j < r.boxes.size(); ++j)
      if (box_intersect(r.boxes[i], r.boxes[j])) return false;
  return true;
}

// Exhaustive membership over a small integer lattice.
bool lattice_equal(const RegionSet& region, size_t dims, int domain,
                   const std::function<bool(const std::vector<int32_t>&)>& truth) {
  std::vector<int32_t> pt(dims, 0);
  for (;;) {
    std::vector<Bytes> coords;
    for (int32_t v : pt) coords.push_back(ival(v));
    if (region.contains(coords) != truth(pt)) return false;
    size_t d = dims;
    bool adv = false;
    while (d-- > 0) {
      if (++pt[d] < domain) {
        adv = true;
        break;
      }
      pt[d] = 0;
      if (d == 0) break;
    }
    if (!adv) return true;
  }
}

// Random boolean expression over the lattice schema.
ExprPtr rnd_expr(std::mt19937& rng, const RelationSchema& s, int depth,
                 int domain) {
  int pick = rnd_int(rng, 0, depth <= 0 ? 2 : 7);
  if (pick <= 2) {
    int attr = rnd_int(rng, 0, 3);  // includes the non-grid attribute
    CompareOp op = CompareOp(rnd_int(rng, 0, 5));
    int kind = rnd_int(rng, 0, 9);
    if (kind < 7) return cmp(s, attr, op, rnd_int(rng, -2, domain + 1));
    if (kind == 7) {
      // Arithmetic linear in one attribute: (attr + c1) op c2.
      auto lhs = std::make_unique<Expr>();
      lhs->kind = Expr::Kind::Arith;
      lhs->arith = rnd_int(rng, 0, 1) ? ArithOp::Add : ArithOp::Sub;
      lhs->left = col(s, attr);
      lhs->right = make_int(rnd_int(rng, -3, 3));
      return make_compare(op, std::move(lhs), make_int(rnd_int(rng, -2, domain + 1)));
    }
    // Inter-attribute comparison.
    return make_compare(op, col(s, attr), col(s, rnd_int(rng, 0, 3)));
  }
  if (pick <= 4)
    return make_logical(Expr::Kind::And, rnd_expr(rng, s, depth - 1, domain),
                        rnd_expr(rng, s, depth - 1, domain));
  if (pick <= 6)
    return make_logical(Expr::Kind::Or, rnd_expr(rng, s, depth - 1, domain),
                        rnd_expr(rng, s, depth - 1, domain));
  return make_not(rnd_expr(rng, s, depth - 1, domain));
}

bool check_expr_equivalence(const Expr& e, const RelationSchema& s, int domain,
                            size_t box_limit = 256) {
  RegionResult rr = region_from_expr(e, s, box_limit);
  if (!region_disjoint(rr.region)) return false;
  std::vector<int32_t> pt(4, 0);
  for (;;) {
    auto get = [&pt](int, int attr) { return Value{pt[size_t(attr)]}; };
    bool truth = eval_predicate(e, get);
    std::vector<Bytes> coords{ival(pt[0]), ival(pt[1]), ival(pt[2])};
    bool covered = rr.region.contains(coords) &&
                   (!rr.residual || eval_predicate(*rr.residual, get));
    if (truth != covered) return false;
    size_t d = 4;
    bool adv = false;
    while (d-- > 0) {
      if (++pt[d] < domain) {
        adv = true;
        break;
      }
      pt[d] = 0;
      if (d == 0) break;
    }
    if (!adv) return true;
  }
}

}  // namespace

TEST_CASE("equality yields one box, inequality two disjoint boxes") {
  RelationSchema s = lattice_schema();
  RegionSet eq = region_from_basic_term(s, 0, CompareOp::Eq, ival(5));
  REQUIRE(eq.boxes.size() == 1);
  CHECK(eq.contains({ival(5), ival(0), ival(0)}));
  CHECK(!eq.contains({ival(6), ival(0), ival(0)}));
  CHECK(!eq.contains({ival(4), ival(0), ival(0)}));
  CHECK(eq.contains({ival(5), ival(INT32_MAX), ival(INT32_MIN)}));

  RegionSet ne = region_from_basic_term(s, 0, CompareOp::Ne, ival(5));
  CHECK(ne.boxes.size() == 2);
  CHECK(region_disjoint(ne));
  CHECK(!ne.contains({ival(5), ival(0), ival(0)}));
  CHECK(ne.contains({ival(4), ival(0), ival(0)}));
  CHECK(ne.contains({ival(6), ival(0), ival(0)}));
}

TEST_CASE("range regions at the domain edges degenerate correctly") {
  RelationSchema s = lattice_schema();
  CHECK(region_from_basic_term(s, 0, CompareOp::Lt, ival(INT32_MIN)).empty());
  CHECK(region_from_basic_term(s, 0, CompareOp::Ge, ival(INT32_MIN))
            .contains({ival(0), ival(0), ival(0)}));
  RegionSet top = region_from_basic_term(s, 0, CompareOp::Eq, ival(INT32_MAX));
  CHECK(top.contains({ival(INT32_MAX), ival(0), ival(0)}));
  CHECK(!top.contains({ival(INT32_MAX - 1), ival(0), ival(0)}));
}

TEST_CASE("box intersection is dimension-wise interval intersection") {
  Box a = box2(0, 10, 0, 10);
  Box b = box2(5, 20, 5, 20);
  auto c = box_intersect(a, b);
  REQUIRE(c);
  CHECK((*c)[0].lo == ival(5));
  CHECK(*(*c)[0].hi == ival(10));
  CHECK(!box_intersect(box2(0, 5, 0, 5), box2(5, 9, 0, 5)));
}

TEST_CASE("split keeps the union, stays disjoint and respects the bound") {
  Box c1 = box2(0, 5, 0, 5);
  Box c2 = box2(2, 7, 2, 7);
  RegionSet r = split_boxes(c1, c2);
  CHECK(r.boxes.size() <= 4);  // c1 plus at most 2^2 - 1 pieces of c2
  CHECK(region_disjoint(r));
  bool ok = lattice_equal(
      r, 2, 8, [&](const std::vector<int32_t>& p) {
        std::vector<Bytes> c{ival(p[0]), ival(p[1])};
        return box_contains(c1, c) || box_contains(c2, c);
      });
  CHECK(ok);

  // Nested and identical boxes collapse.
  CHECK(split_boxes(box2(0, 10, 0, 10), box2(2, 5, 2, 5)).boxes.size() == 1);
  CHECK(split_boxes(box2(2, 5, 2, 5), box2(0, 10, 0, 10)).boxes.size() == 1);
  CHECK(split_boxes(c1, c1).boxes.size() == 1);
  // Disjoint boxes pass through.
  CHECK(split_boxes(box2(0, 2, 0, 2), box2(5, 7, 5, 7)).boxes.size() == 2);
}

TEST_CASE("union covers exactly the pointwise OR and stays disjoint") {
  std::mt19937 rng(99);
  for (int iter = 0; iter < 200; ++iter) {
    RegionSet h1, h2;
    for (int i = rnd_int(rng, 0, 3); i-- > 0;) {
      int lo1 = rnd_int(rng, 0, 10), lo2 = rnd_int(rng, 0, 10);
      Box b = box2(lo1, lo1 + rnd_int(rng, 1, 6), lo2, lo2 + rnd_int(rng, 1, 6));
      h1 = region_union(h1, RegionSet{{b}});
    }
    for (int i = rnd_int(rng, 0, 3); i-- > 0;) {
      int lo1 = rnd_int(rng, 0, 10), lo2 = rnd_int(rng, 0, 10);
      Box b = box2(lo1, lo1 + rnd_int(rng, 1, 6), lo2, lo2 + rnd_int(rng, 1, 6));
      h2 = region_union(h2, RegionSet{{b}});
    }
    RegionSet u = region_union(h1, h2);
    RegionSet i = region_intersect(h1, h2);
    CHECK(region_disjoint(u));
    CHECK(region_disjoint(i));
    bool ok_u = lattice_equal(u, 2, 18, [&](const std::vector<int32_t>& p) {
      std::vector<Bytes> c{ival(p[0]), ival(p[1])};
      return h1.contains(c) || h2.contains(c);
    });
    bool ok_i = lattice_equal(i, 2, 18, [&](const std::vector<int32_t>& p) {
      std::vector<Bytes> c{ival(p[0]), ival(p[1])};
      return h1.contains(c) && h2.contains(c);
    });
    CHECK(ok_u);
    CHECK(ok_i);
  }
}

TEST_CASE("union is idempotent and concatenates disjoint inputs") {
  RegionSet h1{{box2(0, 5, 0, 5)}};
  RegionSet u = region_union(h1, h1);
  bool ok = lattice_equal(u, 2, 8, [&](const std::vector<int32_t>& p) {
    return h1.contains({ival(p[0]), ival(p[1])});
  });
  CHECK(ok);
  RegionSet h2{{box2(6, 9, 6, 9)}};
  CHECK(region_union(h1, h2).boxes.size() == 2);
}

TEST_CASE("the De Morgan example compiles to the complement region") {
  RelationSchema s = lattice_schema();
  // NOT((A1 < 20) AND (A2 = 0))
  ExprPtr e = make_not(make_logical(Expr::Kind::And,
                                    cmp(s, 0, CompareOp::Lt, 20),
                                    cmp(s, 1, CompareOp::Eq, 0)));
  RegionResult rr = region_from_expr(*e, s);
  CHECK(!rr.residual);
  CHECK(region_disjoint(rr.region));
  // Equivalent form: (A1 >= 20) OR (A2 <> 0), checked pointwise.
  for (int32_t a1 = 0; a1 < 32; ++a1) {
    for (int32_t a2 = -2; a2 < 3; ++a2) {
      bool expect = a1 >= 20 || a2 != 0;
      CHECK(rr.region.contains({ival(a1), ival(a2), ival(0)}) == expect);
    }
  }
}

TEST_CASE("contradictory conjunction produces an empty region") {
  RelationSchema s = lattice_schema();
  ExprPtr e = make_logical(Expr::Kind::And, cmp(s, 0, CompareOp::Eq, 3),
                           cmp(s, 0, CompareOp::Eq, 4));
  RegionResult rr = region_from_expr(*e, s);
  CHECK(rr.region.empty());
}

TEST_CASE("linear arithmetic folds to an exact box") {
  RelationSchema s = lattice_schema();
  // (A1 + 1 < 4) == (A1 < 3)
  auto lhs = std::make_unique<Expr>();
  lhs->kind = Expr::Kind::Arith;
  lhs->arith = ArithOp::Add;
  lhs->left = col(s, 0);
  lhs->right = make_int(1);
  ExprPtr e = make_compare(CompareOp::Lt, std::move(lhs), make_int(4));
  RegionResult rr = region_from_expr(*e, s);
  CHECK(!rr.residual);
  CHECK(check_expr_equivalence(*e, s, 8));
  CHECK(rr.region.contains({ival(2), ival(0), ival(0)}));
  CHECK(!rr.region.contains({ival(3), ival(0), ival(0)}));
}

TEST_CASE("inter-attribute terms keep the full space plus a residual") {
  RelationSchema s = lattice_schema();
  ExprPtr lt = make_compare(CompareOp::Lt, col(s, 0), col(s, 1));
  RegionResult rr = region_from_expr(*lt, s);
  REQUIRE(rr.region.boxes.size() == 1);
  CHECK(box_equal(rr.region.boxes[0], full_box(s)));
  REQUIRE(rr.residual);
  CHECK(check_expr_equivalence(*lt, s, 6));

  ExprPtr self = make_compare(CompareOp::Eq, col(s, 0), col(s, 0));
  RegionResult rr2 = region_from_expr(*self, s);
  REQUIRE(rr2.region.boxes.size() == 1);
  CHECK(box_equal(rr2.region.boxes[0], full_box(s)));
}

TEST_CASE("random expressions match direct evaluation over the lattice") {
  RelationSchema s = lattice_schema();
  std::mt19937 rng(2024);
  for (int iter = 0; iter < 300; ++iter) {
    ExprPtr e = rnd_expr(rng, s, 3, 6);
    CHECK(check_expr_equivalence(*e, s, 6));
  }
}

TEST_CASE("box-count valve collapses to a bounding box plus residual") {
  RelationSchema s = lattice_schema();
  // Each <> doubles the box count; with limit 4 the valve must trip.
  ExprPtr e = cmp(s, 0, CompareOp::Ne, 3);
  for (int32_t v = 1; v <= 4; ++v) {
    ExprPtr next = cmp(s, v % 3, CompareOp::Ne, v);
    e = make_logical(Expr::Kind::And, std::move(e), std::move(next));
  }
  RegionResult rr = region_from_expr(*e, s, 4);
  CHECK(rr.region.boxes.size() <= 4);
  REQUIRE(rr.residual);
  CHECK(check_expr_equivalence(*e, s, 6, 4));
}
