#ifndef GRIDREL_REGION_HPP_
#define GRIDREL_REGION_HPP_

#include <optional>
#include <vector>

#include "gridrel/ast.hpp"
#include "gridrel/bytes.hpp"
#include "gridrel/schema.hpp"

namespace gridrel {

// Half-open interval [lo, hi) in comparable-value space. Bounds are exactly
// the attribute's comparable width; hi = nullopt means unbounded above (the
// domain maximum point is inside). Empty intervals are never stored.
struct Interval {
  Bytes lo;
  std::optional<Bytes> hi;

  bool contains(const Bytes& v) const {
    return compare_padded(lo, v) <= 0 && (!hi || compare_padded(v, *hi) < 0);
  }
  bool operator==(const Interval&) const = default;
};

// Axis-aligned box over a relation's grid attributes, one interval per dim.
using Box = std::vector<Interval>;

bool box_contains(const Box& b, const std::vector<Bytes>& coords);
bool box_equal(const Box& a, const Box& b);
std::optional<Box> box_intersect(const Box& a, const Box& b);

// A query region: pairwise disjoint boxes.
struct RegionSet {
  std::vector<Box> boxes;

  bool empty() const { return boxes.empty(); }
  bool contains(const std::vector<Bytes>& coords) const;
};

Box full_box(const RelationSchema& schema);

// Carves `outer` around `hole` (hole = some box's intersection with outer,
// a proper non-empty subset): disjoint boxes covering outer minus hole.
// Peels one dim per round, preferring dims where only one side protrudes;
// the piece count is checked against the 2^k - 1 worst case.
std::vector<Box> carve(Box outer, const Box& hole);

// Disjoint cover of the union of two boxes.
RegionSet split_boxes(const Box& c1, const Box& c2);

RegionSet region_intersect(const RegionSet& a, const RegionSet& b);
RegionSet region_union(const RegionSet& a, const RegionSet& b);

struct RegionResult {
  RegionSet region;
  ExprPtr residual;  // may be null; conjunct re-checked per tuple
};

// Compiles a single-relation boolean expression (analyzed column refs) into
// a disjoint region over the relation's grid space plus a residual
// predicate. NOT is removed up front; predicates the region cannot capture
// exactly (non-grid attributes, inter-attribute terms, foldable arithmetic
// that stays inexact) are kept in the residual. If a combination exceeds
// box_limit boxes the set collapses to its bounding box and the whole
// subexpression moves to the residual.
RegionResult region_from_expr(const Expr& e, const RelationSchema& schema,
                              size_t box_limit = 256);

// Region of a single comparison attr-op-constant; constant already coerced.
RegionSet region_from_basic_term(const RelationSchema& schema, size_t grid_dim,
                                 CompareOp op, const Bytes& value);

}  // namespace gridrel

#endif  // GRIDREL_REGION_HPP_
