#include "gridrel/analyzer.hpp"

namespace gridrel {

namespace {

void resolve_column(ColumnRef& c, const std::vector<BoundRelation>& rels) {
  int found_rel = -1, found_attr = -1;
  for (size_t r = 0; r < rels.size(); ++r) {
    if (!c.rel.empty() && rels[r].name != c.rel) continue;
    int idx = rels[r].schema.attr_index(c.column);
    if (idx < 0) continue;
    if (found_rel >= 0)
      throw EngineError("ambiguous column " + c.column);
    found_rel = int(r);
    found_attr = idx;
  }
  if (found_rel < 0) {
    if (!c.rel.empty()) throw EngineError("unknown column " + c.rel + "." + c.column);
    throw EngineError("unknown column " + c.column);
  }
  c.rel_index = found_rel;
  c.attr_index = found_attr;
  const RelationSchema& s = rels[found_rel].schema;
  const AttrDef& a = s.attrs[found_attr];
  c.type = a.type;
  c.width = a.width;
  c.is_grid = false;
  c.grid_dim = -1;
  for (size_t g = 0; g < s.grid_attrs.size(); ++g) {
    if (s.grid_attrs[g] == uint32_t(found_attr)) {
      c.is_grid = true;
      c.grid_dim = int(g);
    }
  }
}

enum class ExprType { Int, Str };

ExprType check_scalar(Expr& e, const std::vector<BoundRelation>& rels) {
  switch (e.kind) {
    case Expr::Kind::IntLiteral:
      return ExprType::Int;
    case Expr::Kind::StrLiteral:
      return ExprType::Str;
    case Expr::Kind::Column:
      resolve_column(e.column, rels);
      return e.column.type == AttrType::Integer ? ExprType::Int : ExprType::Str;
    case Expr::Kind::Arith: {
      if (check_scalar(*e.left, rels) != ExprType::Int ||
          check_scalar(*e.right, rels) != ExprType::Int)
        throw EngineError("arithmetic requires INTEGER operands");
      return ExprType::Int;
    }
    default:
      throw EngineError("predicate used where a value is required");
  }
}

// Widest CHAR column mentioned under a scalar expression (for literal fit).
uint32_t char_width_of(const Expr& e) {
  if (e.kind == Expr::Kind::Column && e.column.type == AttrType::Char)
    return e.column.width;
  uint32_t w = 0;
  if (e.left) w = std::max(w, char_width_of(*e.left));
  if (e.right) w = std::max(w, char_width_of(*e.right));
  return w;
}

uint32_t str_literal_len(const Expr& e) {
  if (e.kind == Expr::Kind::StrLiteral) return uint32_t(e.str_value.size());
  uint32_t n = 0;
  if (e.left) n = std::max(n, str_literal_len(*e.left));
  if (e.right) n = std::max(n, str_literal_len(*e.right));
  return n;
}

}  // namespace

void resolve_expr(Expr& e, const std::vector<BoundRelation>& rels) {
  switch (e.kind) {
    case Expr::Kind::And:
    case Expr::Kind::Or:
      resolve_expr(*e.left, rels);
      resolve_expr(*e.right, rels);
      return;
    case Expr::Kind::Not:
      resolve_expr(*e.left, rels);
      return;
    case Expr::Kind::Compare: {
      ExprType lt = check_scalar(*e.left, rels);
      ExprType rt = check_scalar(*e.right, rels);
      if (lt != rt)
        throw EngineError("type mismatch in comparison");
      if (lt == ExprType::Str) {
        uint32_t width = std::max(char_width_of(*e.left), char_width_of(*e.right));
        uint32_t lit = std::max(str_literal_len(*e.left), str_literal_len(*e.right));
        if (width > 0 && lit > width)
          throw EngineError("string literal wider than compared CHAR column");
      }
      return;
    }
    default:
      throw EngineError("value expression used as a predicate");
  }
}

void analyze_select(SelectStmt& q, const std::vector<BoundRelation>& rels) {
  for (size_t i = 0; i < rels.size(); ++i)
    for (size_t j = i + 1; j < rels.size(); ++j)
      if (rels[i].name == rels[j].name)
        throw EngineError("relation listed twice: " + rels[i].name);
  if (!q.star)
    for (ColumnRef& c : q.columns) resolve_column(c, rels);
  if (q.where) resolve_expr(*q.where, rels);
  if (q.order_by) resolve_column(q.order_by->column, rels);
}

Tuple analyze_row(const RelationSchema& schema, const std::vector<Value>& values) {
  if (values.size() != schema.attrs.size())
    throw EngineError("expected " + std::to_string(schema.attrs.size()) +
                      " values for " + schema.name + ", got " +
                      std::to_string(values.size()));
  Tuple t;
  t.reserve(values.size());
  for (size_t i = 0; i < values.size(); ++i)
    t.push_back(coerce_value(schema.attrs[i], values[i]));
  return t;
}

}  // namespace gridrel
