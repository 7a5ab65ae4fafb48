#ifndef GRIDREL_ANALYZER_HPP_
#define GRIDREL_ANALYZER_HPP_

#include <string>
#include <vector>

#include "gridrel/ast.hpp"
#include "gridrel/schema.hpp"

namespace gridrel {

struct BoundRelation {
  std::string name;  // uppercase
  RelationSchema schema;
};

// Resolves column references against the FROM relations (rel_index,
// attr_index, type, grid placement) and type-checks the tree: comparisons
// need matching types, arithmetic is INTEGER-only, CHAR literals must fit
// the column they are compared to.
void resolve_expr(Expr& e, const std::vector<BoundRelation>& rels);

void analyze_select(SelectStmt& q, const std::vector<BoundRelation>& rels);

// Coerces INSERT/UPDATE literals against the schema; throws on mismatch.
Tuple analyze_row(const RelationSchema& schema, const std::vector<Value>& values);

}  // namespace gridrel

#endif  // GRIDREL_ANALYZER_HPP_
