#include "gridrel/region.hpp"

#include <algorithm>
#include <stdexcept>

namespace gridrel {

namespace {

// nullopt upper bounds sort above every value.
int cmp_hi(const std::optional<Bytes>& a, const std::optional<Bytes>& b) {
  if (!a && !b) return 0;
  if (!a) return 1;
  if (!b) return -1;
  return compare_padded(*a, *b);
}

bool interval_empty(const Interval& iv) {
  return iv.hi && compare_padded(iv.lo, *iv.hi) >= 0;
}

std::optional<Interval> interval_intersect(const Interval& a,
                                           const Interval& b) {
  Interval out;
  out.lo = compare_padded(a.lo, b.lo) >= 0 ? a.lo : b.lo;
  out.hi = cmp_hi(a.hi, b.hi) <= 0 ? a.hi : b.hi;
  if (interval_empty(out)) return std::nullopt;
  return out;
}

}  // namespace

bool box_contains(const Box& b, const std::vector<Bytes>& coords) {
  for (size_t d = 0; d < b.size(); ++d)
    if (!b[d].contains(coords[d])) return false;
  return true;
}

bool box_equal(const Box& a, const Box& b) {
  if (a.size() != b.size()) return false;
  for (size_t d = 0; d < a.size(); ++d) {
    if (compare_padded(a[d].lo, b[d].lo) != 0) return false;
    if (cmp_hi(a[d].hi, b[d].hi) != 0) return false;
  }
  return true;
}

std::optional<Box> box_intersect(const Box& a, const Box& b) {
  Box out;
  out.reserve(a.size());
  for (size_t d = 0; d < a.size(); ++d) {
    auto iv = interval_intersect(a[d], b[d]);
    if (!iv) return std::nullopt;
    out.push_back(std::move(*iv));
  }
  return out;
}

bool RegionSet::contains(const std::vector<Bytes>& coords) const {
  for (const Box& b : boxes)
    if (box_contains(b, coords)) return true;
  return false;
}

Box full_box(const RelationSchema& schema) {
  Box b;
  b.reserve(schema.grid_dims());
  for (size_t d = 0; d < schema.grid_dims(); ++d)
    b.push_back(Interval{Bytes(schema.grid_attr(d).width, 0), std::nullopt});
  return b;
}

std::vector<Box> carve(Box outer, const Box& hole) {
  const size_t k = outer.size();
  std::vector<Box> out;
  while (!box_equal(outer, hole)) {
    // Prefer a dim where the hole touches one side of outer, so peeling
    // finishes that dim in a single piece.
    int pick = -1;
    for (size_t j = 0; j < k && pick < 0; ++j) {
      bool lo_pro = compare_padded(outer[j].lo, hole[j].lo) < 0;
      bool hi_pro = cmp_hi(outer[j].hi, hole[j].hi) > 0;
      if (lo_pro != hi_pro) pick = int(j);
    }
    if (pick < 0) {
      for (size_t j = 0; j < k && pick < 0; ++j)
        if (compare_padded(outer[j].lo, hole[j].lo) < 0 ||
            cmp_hi(outer[j].hi, hole[j].hi) > 0)
          pick = int(j);
    }
    if (pick < 0) throw std::logic_error("carve: hole not inside outer");
    size_t j = size_t(pick);
    Box piece = outer;
    if (compare_padded(outer[j].lo, hole[j].lo) < 0) {
      piece[j].hi = hole[j].lo;
      outer[j].lo = hole[j].lo;
    } else {
      piece[j].lo = *hole[j].hi;
      outer[j].hi = hole[j].hi;
    }
    out.push_back(std::move(piece));
  }
  if (k < 20 && out.size() > (size_t(1) << k) - 1)
    throw std::logic_error("carve exceeded the 2^k - 1 piece bound");
  return out;
}

RegionSet split_boxes(const Box& c1, const Box& c2) {
  RegionSet out;
  auto inter = box_intersect(c1, c2);
  if (!inter) {
    out.boxes = {c1, c2};
    return out;
  }
  if (box_equal(*inter, c1)) {
    out.boxes = {c2};
    return out;
  }
  if (box_equal(*inter, c2)) {
    out.boxes = {c1};
    return out;
  }
  out.boxes.push_back(c1);
  for (auto& p : carve(c2, *inter)) out.boxes.push_back(std::move(p));
  return out;
}

RegionSet region_intersect(const RegionSet& a, const RegionSet& b) {
  RegionSet out;
  for (const Box& c1 : a.boxes)
    for (const Box& c2 : b.boxes)
      if (auto iv = box_intersect(c1, c2)) out.boxes.push_back(std::move(*iv));
  return out;
}

namespace {

void add_disjoint(std::vector<Box>& result, Box b) {
  for (size_t i = 0; i < result.size(); ++i) {
    auto inter = box_intersect(result[i], b);
    if (!inter) continue;
    if (box_equal(*inter, b)) return;  // covered by an existing box
    if (box_equal(*inter, result[i])) {
      // Existing box swallowed by the new one; the new box still needs
      // checking against the rest.
      result.erase(result.begin() + i);
      --i;
      continue;
    }
    for (auto& piece : carve(std::move(b), *inter))
      add_disjoint(result, std::move(piece));
    return;
  }
  result.push_back(std::move(b));
}

}  // namespace

RegionSet region_union(const RegionSet& a, const RegionSet& b) {
  RegionSet out;
  out.boxes = a.boxes;
  for (const Box& c2 : b.boxes) add_disjoint(out.boxes, c2);
  return out;
}

RegionSet region_from_basic_term(const RelationSchema& schema, size_t grid_dim,
                                 CompareOp op, const Bytes& value) {
  const uint32_t width = schema.grid_attr(grid_dim).width;
  RegionSet out;
  auto push = [&](const Bytes& lo, std::optional<Bytes> hi) {
    Interval iv{lo, std::move(hi)};
    if (interval_empty(iv)) return;
    Box b = full_box(schema);
    b[grid_dim] = std::move(iv);
    out.boxes.push_back(std::move(b));
  };
  Bytes min_bound(width, 0);
  std::optional<Bytes> succ = increment(value);

  switch (op) {
    case CompareOp::Eq:
      push(value, succ);
      break;
    case CompareOp::Ne:
      push(min_bound, value);
      if (succ) push(*succ, std::nullopt);
      break;
    case CompareOp::Lt:
      push(min_bound, value);
      break;
    case CompareOp::Le:
      push(min_bound, succ);
      break;
    case CompareOp::Gt:
      if (succ) push(*succ, std::nullopt);
      break;
    case CompareOp::Ge:
      push(value, std::nullopt);
      break;
  }
  return out;
}

namespace {

struct LinearTerm {
  const ColumnRef* col = nullptr;
  int sign = 0;
  int64_t constant = 0;
};

std::optional<LinearTerm> linearize(const Expr& e) {
  switch (e.kind) {
    case Expr::Kind::IntLiteral:
      return LinearTerm{nullptr, 0, e.int_value};
    case Expr::Kind::Column:
      if (e.column.type != AttrType::Integer) return std::nullopt;
      return LinearTerm{&e.column, 1, 0};
    case Expr::Kind::Arith: {
      auto l = linearize(*e.left);
      auto r = linearize(*e.right);
      if (!l || !r) return std::nullopt;
      if (e.arith == ArithOp::Sub) {
        r->sign = -r->sign;
        r->constant = -r->constant;
      }
      if (l->col && r->col) return std::nullopt;
      LinearTerm out;
      out.col = l->col ? l->col : r->col;
      out.sign = l->col ? l->sign : r->sign;
      out.constant = l->constant + r->constant;
      return out;
    }
    default:
      return std::nullopt;
  }
}

CompareOp mirror_op(CompareOp op) {
  switch (op) {
    case CompareOp::Lt: return CompareOp::Gt;
    case CompareOp::Gt: return CompareOp::Lt;
    case CompareOp::Le: return CompareOp::Ge;
    case CompareOp::Ge: return CompareOp::Le;
    default: return op;
  }
}

struct Compiler {
  const RelationSchema& schema;
  size_t limit;

  RegionResult full_with(ExprPtr residual) const {
    RegionResult out;
    out.region.boxes.push_back(full_box(schema));
    out.residual = std::move(residual);
    return out;
  }

  // Exact region for an INTEGER grid attribute compared to an int64 bound
  // (folding can push the bound outside the 32-bit domain).
  RegionSet int_term(size_t dim, CompareOp op, int64_t bound) const {
    constexpr int64_t kMin = INT32_MIN, kMax = INT32_MAX;
    RegionSet empty;
    auto whole = [&] {
      RegionSet r;
      r.boxes.push_back(full_box(schema));
      return r;
    };
    switch (op) {
      case CompareOp::Eq:
        if (bound < kMin || bound > kMax) return empty;
        break;
      case CompareOp::Ne:
        if (bound < kMin || bound > kMax) return whole();
        break;
      case CompareOp::Lt:
        if (bound <= kMin) return empty;
        if (bound > kMax) return whole();
        break;
      case CompareOp::Le:
        if (bound < kMin) return empty;
        if (bound >= kMax) return whole();
        break;
      case CompareOp::Gt:
        if (bound >= kMax) return empty;
        if (bound < kMin) return whole();
        break;
      case CompareOp::Ge:
        if (bound > kMax) return empty;
        if (bound <= kMin) return whole();
        break;
    }
    Bytes v = encode_value(schema.grid_attr(dim),
                           Value{int32_t(std::clamp(bound, kMin, kMax))});
    return region_from_basic_term(schema, dim, op, v);
  }

  RegionResult leaf(const Expr& e, bool negate) const {
    CompareOp op = negate ? negate_op(e.cmp) : e.cmp;
    const Expr* l = e.left.get();
    const Expr* r = e.right.get();

    auto basic = [&](const ColumnRef& col, CompareOp o,
                     const Expr& lit) -> RegionResult {
      Value v = lit.kind == Expr::Kind::IntLiteral
                    ? Value{int32_t(lit.int_value)}
                    : Value{lit.str_value};
      if (!col.is_grid)
        return full_with(make_compare(op, e.left->clone(), e.right->clone()));
      RegionResult out;
      out.region = region_from_basic_term(
          schema, size_t(col.grid_dim), o,
          encode_value(schema.attrs[col.attr_index], v));
      return out;
    };

    bool l_lit = l->kind == Expr::Kind::IntLiteral || l->kind == Expr::Kind::StrLiteral;
    bool r_lit = r->kind == Expr::Kind::IntLiteral || r->kind == Expr::Kind::StrLiteral;
    if (l->kind == Expr::Kind::Column && r_lit) return basic(l->column, op, *r);
    if (r->kind == Expr::Kind::Column && l_lit)
      return basic(r->column, mirror_op(op), *l);

    // Arithmetic linear in one INTEGER attribute folds to an exact bound.
    auto ll = linearize(*l);
    auto rr = linearize(*r);
    if (ll && rr && (ll->col != nullptr) != (rr->col != nullptr)) {
      const LinearTerm& with_col = ll->col ? *ll : *rr;
      const LinearTerm& pure = ll->col ? *rr : *ll;
      CompareOp o = ll->col ? op : mirror_op(op);
      int64_t bound = pure.constant - with_col.constant;
      if (with_col.sign == -1) {
        o = mirror_op(o);
        bound = -bound;
      }
      if (with_col.col->is_grid) {
        RegionResult out;
        out.region = int_term(size_t(with_col.col->grid_dim), o, bound);
        return out;
      }
      return full_with(make_compare(op, e.left->clone(), e.right->clone()));
    }

    // Inter-attribute or otherwise opaque term: conservative bounding box
    // (the full space) plus the term as a residual.
    return full_with(make_compare(op, e.left->clone(), e.right->clone()));
  }

  RegionResult apply_limit(RegionResult res, const Expr& e, bool negate) const {
    if (res.region.boxes.size() <= limit) return res;
    Box bb = res.region.boxes[0];
    for (size_t i = 1; i < res.region.boxes.size(); ++i) {
      const Box& b = res.region.boxes[i];
      for (size_t d = 0; d < bb.size(); ++d) {
        if (compare_padded(b[d].lo, bb[d].lo) < 0) bb[d].lo = b[d].lo;
        if (cmp_hi(b[d].hi, bb[d].hi) > 0) bb[d].hi = b[d].hi;
      }
    }
    RegionResult out;
    out.region.boxes = {std::move(bb)};
    out.residual = to_nnf(e, negate);
    return out;
  }

  RegionResult compile(const Expr& e, bool negate) const {
    switch (e.kind) {
      case Expr::Kind::Not:
        return compile(*e.left, !negate);
      case Expr::Kind::And:
      case Expr::Kind::Or: {
        bool is_and = (e.kind == Expr::Kind::And) != negate;
        RegionResult a = compile(*e.left, negate);
        RegionResult b = compile(*e.right, negate);
        RegionResult out;
        if (is_and) {
          out.region = region_intersect(a.region, b.region);
          if (a.residual && b.residual)
            out.residual = make_logical(Expr::Kind::And, std::move(a.residual),
                                        std::move(b.residual));
          else
            out.residual = a.residual ? std::move(a.residual) : std::move(b.residual);
        } else {
          out.region = region_union(a.region, b.region);
          if (a.residual || b.residual) out.residual = to_nnf(e, negate);
        }
        return apply_limit(std::move(out), e, negate);
      }
      case Expr::Kind::Compare:
        return leaf(e, negate);
      default:
        throw EngineError("expression is not boolean");
    }
  }
};

}  // namespace

RegionResult region_from_expr(const Expr& e, const RelationSchema& schema,
                              size_t box_limit) {
  Compiler c{schema, box_limit};
  return c.compile(e, false);
}

}  // namespace gridrel
