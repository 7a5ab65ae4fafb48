#ifndef GRIDREL_PLANNER_HPP_
#define GRIDREL_PLANNER_HPP_

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "gridrel/analyzer.hpp"
#include "gridrel/ast.hpp"
#include "gridrel/region.hpp"

namespace gridrel {

struct PlannedRelation {
  std::string name;
  RelationSchema schema;
  RegionSet region;
  ExprPtr residual;           // single-relation predicate re-checked per tuple
  uint64_t bucket_estimate = 1;
};

struct PlanGroup {
  std::vector<size_t> members;  // FROM indices
  std::vector<int> join_attrs;  // designated join attribute per member
  uint64_t size_estimate = 1;

  bool is_merge() const { return members.size() > 1; }
};

struct CrossResidual {
  ExprPtr expr;
  std::vector<int> rels;
};

// Relations partitioned into merge-join groups (joined pairwise on their
// designated attributes) plus singleton scan groups; groups are joined by
// nested loops, outer first. Cross-group and inexact predicates survive as
// residuals applied once every referenced relation is bound.
struct JoinPlan {
  std::vector<PlannedRelation> relations;
  std::vector<PlanGroup> groups;
  std::vector<CrossResidual> cross_residuals;
  std::optional<OrderBySpec> order_by;
};

using BucketCountFn = std::function<uint64_t(const std::string&)>;

JoinPlan plan_select(const SelectStmt& q, const std::vector<BoundRelation>& rels,
                     const BucketCountFn& bucket_count, size_t box_limit,
                     bool force_nested = false);

std::string explain_plan(const JoinPlan& plan);

// Structural check of the grouping conditions against the query's WHERE
// clause; used by tests and assertable before execution.
bool plan_groups_valid(const JoinPlan& plan, const Expr* where);

std::string region_to_string(const RelationSchema& schema, const RegionSet& r);

}  // namespace gridrel

#endif  // GRIDREL_PLANNER_HPP_
