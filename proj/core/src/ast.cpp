#include <algorithm>
#include <cstring>

#include "gridrel/ast.hpp"

namespace gridrel {

CompareOp negate_op(CompareOp op) {
  switch (op) {
    case CompareOp::Eq: return CompareOp::Ne;
    case CompareOp::Ne: return CompareOp::Eq;
    case CompareOp::Lt: return CompareOp::Ge;
    case CompareOp::Gt: return CompareOp::Le;
    case CompareOp::Le: return CompareOp::Gt;
    case CompareOp::Ge: return CompareOp::Lt;
  }
  return op;
}

const char* compare_op_text(CompareOp op) {
  switch (op) {
    case CompareOp::Eq: return "=";
    case CompareOp::Ne: return "<>";
    case CompareOp::Lt: return "<";
    case CompareOp::Gt: return ">";
    case CompareOp::Le: return "<=";
    case CompareOp::Ge: return ">=";
  }
  return "?";
}

ExprPtr Expr::clone() const {
  auto out = std::make_unique<Expr>();
  out->kind = kind;
  out->cmp = cmp;
  out->arith = arith;
  out->column = column;
  out->int_value = int_value;
  out->str_value = str_value;
  out->pos = pos;
  if (left) out->left = left->clone();
  if (right) out->right = right->clone();
  return out;
}

ExprPtr make_compare(CompareOp op, ExprPtr l, ExprPtr r) {
  auto e = std::make_unique<Expr>();
  e->kind = Expr::Kind::Compare;
  e->cmp = op;
  e->left = std::move(l);
  e->right = std::move(r);
  return e;
}

ExprPtr make_logical(Expr::Kind kind, ExprPtr l, ExprPtr r) {
  auto e = std::make_unique<Expr>();
  e->kind = kind;
  e->left = std::move(l);
  e->right = std::move(r);
  return e;
}

ExprPtr make_not(ExprPtr inner) {
  auto e = std::make_unique<Expr>();
  e->kind = Expr::Kind::Not;
  e->left = std::move(inner);
  return e;
}

ExprPtr make_column(std::string rel, std::string col) {
  auto e = std::make_unique<Expr>();
  e->kind = Expr::Kind::Column;
  e->column.rel = std::move(rel);
  e->column.column = std::move(col);
  return e;
}

ExprPtr make_int(int64_t v) {
  auto e = std::make_unique<Expr>();
  e->kind = Expr::Kind::IntLiteral;
  e->int_value = v;
  return e;
}

ExprPtr make_str(std::string v) {
  auto e = std::make_unique<Expr>();
  e->kind = Expr::Kind::StrLiteral;
  e->str_value = std::move(v);
  return e;
}

namespace {

std::string column_text(const ColumnRef& c) {
  return c.rel.empty() ? c.column : c.rel + "." + c.column;
}

}  // namespace

std::string expr_to_string(const Expr& e) {
  switch (e.kind) {
    case Expr::Kind::And:
      return "(and " + expr_to_string(*e.left) + " " + expr_to_string(*e.right) + ")";
    case Expr::Kind::Or:
      return "(or " + expr_to_string(*e.left) + " " + expr_to_string(*e.right) + ")";
    case Expr::Kind::Not:
      return "(not " + expr_to_string(*e.left) + ")";
    case Expr::Kind::Compare:
      return std::string("(") + compare_op_text(e.cmp) + " " +
             expr_to_string(*e.left) + " " + expr_to_string(*e.right) + ")";
    case Expr::Kind::Arith:
      return std::string("(") + (e.arith == ArithOp::Add ? "+" : "-") + " " +
             expr_to_string(*e.left) + " " + expr_to_string(*e.right) + ")";
    case Expr::Kind::Column:
      return "(col " + column_text(e.column) + ")";
    case Expr::Kind::IntLiteral:
      return "(int " + std::to_string(e.int_value) + ")";
    case Expr::Kind::StrLiteral:
      return "(str '" + e.str_value + "')";
  }
  return "?";
}

std::string statement_to_string(const Statement& s) {
  struct Visitor {
    std::string operator()(const SelectStmt& q) const {
      std::string out = "(select (columns";
      if (q.star) {
        out += " *";
      } else {
        for (const auto& c : q.columns) out += " " + column_text(c);
      }
      out += ") (from";
      for (const auto& r : q.from) out += " " + r;
      out += ")";
      if (q.where) out += " (where " + expr_to_string(*q.where) + ")";
      if (q.order_by)
        out += " (order-by " + column_text(q.order_by->column) +
               (q.order_by->descending ? " desc" : " asc") + ")";
      return out + ")";
    }
    std::string operator()(const InsertStmt& q) const {
      std::string out = "(insert " + q.rel + " (values";
      for (const auto& v : q.values) {
        if (std::holds_alternative<int32_t>(v))
          out += " " + std::to_string(std::get<int32_t>(v));
        else
          out += " '" + std::get<std::string>(v) + "'";
      }
      return out + "))";
    }
    std::string operator()(const DeleteStmt& q) const {
      std::string out = "(delete " + q.rel;
      if (q.where) out += " (where " + expr_to_string(*q.where) + ")";
      return out + ")";
    }
    std::string operator()(const UpdateStmt& q) const {
      std::string out = "(update " + q.rel + " (set";
      for (const auto& [c, v] : q.assignments) {
        out += " (" + c + " ";
        if (std::holds_alternative<int32_t>(v))
          out += std::to_string(std::get<int32_t>(v));
        else
          out += "'" + std::get<std::string>(v) + "'";
        out += ")";
      }
      out += ")";
      if (q.where) out += " (where " + expr_to_string(*q.where) + ")";
      return out + ")";
    }
    std::string operator()(const CreateStmt& q) const {
      std::string out = "(create " + q.rel + " (cols";
      for (const auto& a : q.attrs) {
        out += " (" + a.name + " ";
        out += a.type == AttrType::Integer
                   ? "integer"
                   : "char " + std::to_string(a.width);
        out += ")";
      }
      out += ")";
      if (!q.grid_cols.empty()) {
        out += " (grid";
        for (const auto& g : q.grid_cols) out += " " + g;
        out += ")";
      }
      return out + ")";
    }
    std::string operator()(const DropStmt& q) const {
      return "(drop " + q.rel + ")";
    }
  };
  return std::visit(Visitor{}, s);
}

namespace {

using EvalValue = std::variant<int64_t, std::string>;

EvalValue eval_scalar(const Expr& e, const ValueGetter& get) {
  switch (e.kind) {
    case Expr::Kind::IntLiteral:
      return e.int_value;
    case Expr::Kind::StrLiteral:
      return e.str_value;
    case Expr::Kind::Column: {
      Value v = get(e.column.rel_index, e.column.attr_index);
      if (std::holds_alternative<int32_t>(v))
        return int64_t(std::get<int32_t>(v));
      return std::get<std::string>(v);
    }
    case Expr::Kind::Arith: {
      EvalValue l = eval_scalar(*e.left, get);
      EvalValue r = eval_scalar(*e.right, get);
      if (!std::holds_alternative<int64_t>(l) ||
          !std::holds_alternative<int64_t>(r))
        throw EngineError("arithmetic on non-integer values");
      int64_t a = std::get<int64_t>(l), b = std::get<int64_t>(r);
      return e.arith == ArithOp::Add ? a + b : a - b;
    }
    default:
      throw EngineError("boolean expression used as a value");
  }
}

// CHAR comparison pads the shorter operand with spaces, matching the stored
// space-padded representation.
int compare_values(const EvalValue& l, const EvalValue& r) {
  if (std::holds_alternative<int64_t>(l) && std::holds_alternative<int64_t>(r)) {
    int64_t a = std::get<int64_t>(l), b = std::get<int64_t>(r);
    return a < b ? -1 : a > b ? 1 : 0;
  }
  if (std::holds_alternative<std::string>(l) &&
      std::holds_alternative<std::string>(r)) {
    std::string a = std::get<std::string>(l), b = std::get<std::string>(r);
    size_t n = std::max(a.size(), b.size());
    a.resize(n, ' ');
    b.resize(n, ' ');
    int c = std::memcmp(a.data(), b.data(), n);
    return c < 0 ? -1 : c > 0 ? 1 : 0;
  }
  throw EngineError("type mismatch in comparison");
}

}  // namespace

ExprPtr to_nnf(const Expr& e, bool negate) {
  switch (e.kind) {
    case Expr::Kind::Not:
      return to_nnf(*e.left, !negate);
    case Expr::Kind::And:
    case Expr::Kind::Or: {
      bool is_and = (e.kind == Expr::Kind::And) != negate;
      auto out = make_logical(is_and ? Expr::Kind::And : Expr::Kind::Or,
                              to_nnf(*e.left, negate), to_nnf(*e.right, negate));
      out->pos = e.pos;
      return out;
    }
    case Expr::Kind::Compare: {
      auto out = make_compare(negate ? negate_op(e.cmp) : e.cmp,
                              e.left->clone(), e.right->clone());
      out->pos = e.pos;
      return out;
    }
    default:
      return e.clone();
  }
}

bool eval_predicate(const Expr& e, const ValueGetter& get) {
  switch (e.kind) {
    case Expr::Kind::And:
      return eval_predicate(*e.left, get) && eval_predicate(*e.right, get);
    case Expr::Kind::Or:
      return eval_predicate(*e.left, get) || eval_predicate(*e.right, get);
    case Expr::Kind::Not:
      return !eval_predicate(*e.left, get);
    case Expr::Kind::Compare: {
      int c = compare_values(eval_scalar(*e.left, get), eval_scalar(*e.right, get));
      switch (e.cmp) {
        case CompareOp::Eq: return c == 0;
        case CompareOp::Ne: return c != 0;
        case CompareOp::Lt: return c < 0;
        case CompareOp::Gt: return c > 0;
        case CompareOp::Le: return c <= 0;
        case CompareOp::Ge: return c >= 0;
      }
      return false;
    }
    default:
      throw EngineError("value expression used as a predicate");
  }
}

}  // namespace gridrel
