#ifndef GRIDREL_EXECUTOR_HPP_
#define GRIDREL_EXECUTOR_HPP_

#include <string>
#include <vector>

#include "gridrel/ast.hpp"
#include "gridrel/planner.hpp"

namespace gridrel {

class Database;

struct ExecResult {
  enum class Kind { Rows, Count, Ok };
  Kind kind = Kind::Ok;
  std::vector<std::string> columns;
  std::vector<std::vector<Value>> rows;
  size_t count = 0;
};

// Resolves the query against the catalog and builds its plan; q's column
// references are resolved in place.
JoinPlan make_plan(Database& db, SelectStmt& q, bool force_nested = false);

ExecResult run_select(Database& db, SelectStmt q, bool force_nested = false);

std::string explain_select(Database& db, SelectStmt q);

}  // namespace gridrel

#endif  // GRIDREL_EXECUTOR_HPP_
