#ifndef GRIDREL_AST_HPP_
#define GRIDREL_AST_HPP_

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "gridrel/schema.hpp"

namespace gridrel {

enum class CompareOp { Eq, Ne, Lt, Gt, Le, Ge };
enum class ArithOp { Add, Sub };

CompareOp negate_op(CompareOp op);
const char* compare_op_text(CompareOp op);

struct ColumnRef {
  std::string rel;  // qualifier as written; empty when unqualified
  std::string column;
  // Filled in by semantic analysis:
  int rel_index = -1;
  int attr_index = -1;
  AttrType type = AttrType::Integer;
  uint32_t width = 4;
  bool is_grid = false;
  int grid_dim = -1;
};

// Binary expression tree. NOT uses only `left`; leaves are Column,
// IntLiteral and StrLiteral.
struct Expr {
  enum class Kind { And, Or, Not, Compare, Arith, Column, IntLiteral, StrLiteral };

  Kind kind = Kind::IntLiteral;
  CompareOp cmp = CompareOp::Eq;
  ArithOp arith = ArithOp::Add;
  std::unique_ptr<Expr> left, right;
  ColumnRef column;
  int64_t int_value = 0;
  std::string str_value;
  size_t pos = 0;  // byte offset in the statement text

  std::unique_ptr<Expr> clone() const;
};

using ExprPtr = std::unique_ptr<Expr>;

ExprPtr make_compare(CompareOp op, ExprPtr l, ExprPtr r);
ExprPtr make_logical(Expr::Kind kind, ExprPtr l, ExprPtr r);
ExprPtr make_not(ExprPtr e);
ExprPtr make_column(std::string rel, std::string col);
ExprPtr make_int(int64_t v);
ExprPtr make_str(std::string v);

std::string expr_to_string(const Expr& e);

// Evaluation over bound tuples. The getter resolves (rel_index, attr_index)
// to the current row's value.
using ValueGetter = std::function<Value(int rel_index, int attr_index)>;
bool eval_predicate(const Expr& e, const ValueGetter& get);

// Clone with NOT pushed to the leaves (De Morgan plus comparison negation).
ExprPtr to_nnf(const Expr& e, bool negate = false);

struct OrderBySpec {
  ColumnRef column;
  bool descending = false;
};

struct SelectStmt {
  bool star = false;
  std::vector<ColumnRef> columns;
  std::vector<std::string> from;
  ExprPtr where;
  std::optional<OrderBySpec> order_by;
};

struct InsertStmt {
  std::string rel;
  std::vector<Value> values;
};

struct DeleteStmt {
  std::string rel;
  ExprPtr where;
};

struct UpdateStmt {
  std::string rel;
  std::vector<std::pair<std::string, Value>> assignments;
  ExprPtr where;
};

struct CreateStmt {
  std::string rel;
  std::vector<AttrDef> attrs;
  std::vector<std::string> grid_cols;  // empty = all columns span the grid
};

struct DropStmt {
  std::string rel;
};

using Statement =
    std::variant<SelectStmt, InsertStmt, DeleteStmt, UpdateStmt, CreateStmt, DropStmt>;

std::string statement_to_string(const Statement& s);

}  // namespace gridrel

#endif  // GRIDREL_AST_HPP_
