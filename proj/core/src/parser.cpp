#include "gridrel/parser.hpp"

#include <cctype>
#include <optional>
#include <vector>

namespace gridrel {

namespace {

enum class Tok {
  Ident,
  Int,
  Str,
  Comma,
  Dot,
  LParen,
  RParen,
  Star,
  Plus,
  Minus,
  Eq,
  Ne,
  Lt,
  Gt,
  Le,
  Ge,
  Semi,
  End,
};

struct Token {
  Tok kind = Tok::End;
  std::string text;   // identifiers uppercased; strings unescaped
  int64_t number = 0;
  size_t pos = 0;
};

const char* token_name(Tok t) {
  switch (t) {
    case Tok::Ident: return "identifier";
    case Tok::Int: return "integer";
    case Tok::Str: return "string";
    case Tok::Comma: return "','";
    case Tok::Dot: return "'.'";
    case Tok::LParen: return "'('";
    case Tok::RParen: return "')'";
    case Tok::Star: return "'*'";
    case Tok::Plus: return "'+'";
    case Tok::Minus: return "'-'";
    case Tok::Eq: return "'='";
    case Tok::Ne: return "'<>'";
    case Tok::Lt: return "'<'";
    case Tok::Gt: return "'>'";
    case Tok::Le: return "'<='";
    case Tok::Ge: return "'>='";
    case Tok::Semi: return "';'";
    case Tok::End: return "end of statement";
  }
  return "?";
}

std::vector<Token> tokenize(const std::string& s) {
  std::vector<Token> out;
  size_t i = 0;
  while (i < s.size()) {
    char c = s[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
      continue;
    }
    Token t;
    t.pos = i;
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      size_t b = i;
      while (i < s.size() && (std::isalnum(static_cast<unsigned char>(s[i])) ||
                              s[i] == '_'))
        ++i;
      t.kind = Tok::Ident;
      t.text = s.substr(b, i - b);
      for (char& ch : t.text) ch = char(std::toupper(static_cast<unsigned char>(ch)));
    } else if (std::isdigit(static_cast<unsigned char>(c))) {
      size_t b = i;
      while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) ++i;
      t.kind = Tok::Int;
      t.text = s.substr(b, i - b);
      try {
        t.number = std::stoll(t.text);
      } catch (const std::out_of_range&) {
        throw ParseError(b, "integer literal in range", t.text);
      }
    } else if (c == '\'') {
      ++i;
      std::string v;
      for (;;) {
        if (i >= s.size()) throw ParseError(t.pos, "closing quote", "end of input");
        if (s[i] == '\'') {
          if (i + 1 < s.size() && s[i + 1] == '\'') {
            v.push_back('\'');
            i += 2;
            continue;
          }
          ++i;
          break;
        }
        v.push_back(s[i++]);
      }
      t.kind = Tok::Str;
      t.text = std::move(v);
    } else {
      switch (c) {
        case ',': t.kind = Tok::Comma; ++i; break;
        case '.': t.kind = Tok::Dot; ++i; break;
        case '(': t.kind = Tok::LParen; ++i; break;
        case ')': t.kind = Tok::RParen; ++i; break;
        case '*': t.kind = Tok::Star; ++i; break;
        case '+': t.kind = Tok::Plus; ++i; break;
        case '-': t.kind = Tok::Minus; ++i; break;
        case ';': t.kind = Tok::Semi; ++i; break;
        case '=': t.kind = Tok::Eq; ++i; break;
        case '!':
          if (i + 1 < s.size() && s[i + 1] == '=') {
            t.kind = Tok::Ne;
            i += 2;
          } else {
            throw ParseError(i, "'='", "'!'");
          }
          break;
        case '<':
          if (i + 1 < s.size() && s[i + 1] == '>') {
            t.kind = Tok::Ne;
            i += 2;
          } else if (i + 1 < s.size() && s[i + 1] == '=') {
            t.kind = Tok::Le;
            i += 2;
          } else {
            t.kind = Tok::Lt;
            ++i;
          }
          break;
        case '>':
          if (i + 1 < s.size() && s[i + 1] == '=') {
            t.kind = Tok::Ge;
            i += 2;
          } else {
            t.kind = Tok::Gt;
            ++i;
          }
          break;
        default:
          throw ParseError(i, "a token", std::string("'") + c + "'");
      }
    }
    out.push_back(std::move(t));
  }
  Token end;
  end.kind = Tok::End;
  end.pos = s.size();
  out.push_back(end);
  return out;
}

class Parser {
 public:
  explicit Parser(const std::string& text) : toks_(tokenize(text)) {}

  Statement parse() {
    Statement s = statement();
    if (cur().kind == Tok::Semi) advance();
    expect(Tok::End, "end of statement");
    return s;
  }

 private:
  const Token& cur() const { return toks_[i_]; }
  const Token& advance() { return toks_[i_++]; }

  [[noreturn]] void fail(const std::string& expected) const {
    const Token& t = cur();
    std::string got = t.kind == Tok::Ident ? "'" + t.text + "'"
                      : t.kind == Tok::Int ? "'" + t.text + "'"
                      : t.kind == Tok::Str ? "string literal"
                                           : token_name(t.kind);
    throw ParseError(t.pos, expected, got);
  }

  Token expect(Tok kind, const std::string& what) {
    if (cur().kind != kind) fail(what);
    return advance();
  }

  static bool is_reserved(const std::string& word) {
    static const char* kw[] = {"SELECT", "FROM",   "WHERE",  "ORDER", "BY",
                               "ASC",    "DESC",   "INSERT", "INTO",  "VALUES",
                               "DELETE", "UPDATE", "SET",    "CREATE", "TABLE",
                               "DROP",   "GRID",   "INTEGER", "CHAR",  "AND",
                               "OR",     "NOT"};
    for (const char* k : kw)
      if (word == k) return true;
    return false;
  }

  bool at_keyword(const char* kw) const {
    return cur().kind == Tok::Ident && cur().text == kw;
  }

  bool accept_keyword(const char* kw) {
    if (!at_keyword(kw)) return false;
    advance();
    return true;
  }

  Token expect_keyword(const char* kw) {
    if (!at_keyword(kw)) fail(std::string("'") + kw + "'");
    return advance();
  }

  std::string name(const char* what) {
    if (cur().kind != Tok::Ident || is_reserved(cur().text)) fail(what);
    return advance().text;
  }

  Statement statement() {
    if (at_keyword("SELECT")) return select_stmt();
    if (at_keyword("INSERT")) return insert_stmt();
    if (at_keyword("DELETE")) return delete_stmt();
    if (at_keyword("UPDATE")) return update_stmt();
    if (at_keyword("CREATE")) return create_stmt();
    if (at_keyword("DROP")) return drop_stmt();
    fail("SELECT, INSERT, DELETE, UPDATE, CREATE or DROP");
  }

  ColumnRef column_ref() {
    ColumnRef c;
    c.column = name("column name");
    if (cur().kind == Tok::Dot) {
      advance();
      c.rel = c.column;
      c.column = name("column name");
    }
    return c;
  }

  Statement select_stmt() {
    advance();
    SelectStmt q;
    if (cur().kind == Tok::Star) {
      advance();
      q.star = true;
    } else {
      q.columns.push_back(column_ref());
      while (cur().kind == Tok::Comma) {
        advance();
        q.columns.push_back(column_ref());
      }
    }
    expect_keyword("FROM");
    q.from.push_back(name("relation name"));
    while (cur().kind == Tok::Comma) {
      advance();
      q.from.push_back(name("relation name"));
    }
    if (accept_keyword("WHERE")) q.where = expression();
    if (accept_keyword("ORDER")) {
      expect_keyword("BY");
      OrderBySpec ob;
      ob.column = column_ref();
      if (accept_keyword("DESC"))
        ob.descending = true;
      else
        accept_keyword("ASC");
      q.order_by = std::move(ob);
    }
    return q;
  }

  Value literal() {
    if (cur().kind == Tok::Minus) {
      size_t p = cur().pos;
      advance();
      Token t = expect(Tok::Int, "integer literal");
      int64_t v = -t.number;
      if (v < INT32_MIN) throw ParseError(p, "integer literal in range", t.text);
      return Value{int32_t(v)};
    }
    if (cur().kind == Tok::Int) {
      Token t = advance();
      if (t.number > INT32_MAX)
        throw ParseError(t.pos, "integer literal in range", t.text);
      return Value{int32_t(t.number)};
    }
    if (cur().kind == Tok::Str) return Value{advance().text};
    fail("a literal");
  }

  Statement insert_stmt() {
    advance();
    expect_keyword("INTO");
    InsertStmt q;
    q.rel = name("relation name");
    expect_keyword("VALUES");
    expect(Tok::LParen, "'('");
    q.values.push_back(literal());
    while (cur().kind == Tok::Comma) {
      advance();
      q.values.push_back(literal());
    }
    expect(Tok::RParen, "')'");
    return q;
  }

  Statement delete_stmt() {
    advance();
    expect_keyword("FROM");
    DeleteStmt q;
    q.rel = name("relation name");
    if (accept_keyword("WHERE")) q.where = expression();
    return q;
  }

  Statement update_stmt() {
    advance();
    UpdateStmt q;
    q.rel = name("relation name");
    expect_keyword("SET");
    for (;;) {
      std::string col = name("column name");
      expect(Tok::Eq, "'='");
      q.assignments.emplace_back(std::move(col), literal());
      if (cur().kind != Tok::Comma) break;
      advance();
    }
    if (accept_keyword("WHERE")) q.where = expression();
    return q;
  }

  Statement create_stmt() {
    advance();
    expect_keyword("TABLE");
    CreateStmt q;
    q.rel = name("relation name");
    expect(Tok::LParen, "'('");
    for (;;) {
      AttrDef a;
      a.name = name("column name");
      if (accept_keyword("INTEGER")) {
        a.type = AttrType::Integer;
        a.width = 4;
      } else if (accept_keyword("CHAR")) {
        a.type = AttrType::Char;
        expect(Tok::LParen, "'('");
        Token w = expect(Tok::Int, "CHAR width");
        if (w.number < 1 || w.number > 255)
          throw ParseError(w.pos, "CHAR width between 1 and 255", w.text);
        a.width = uint32_t(w.number);
        expect(Tok::RParen, "')'");
      } else {
        fail("INTEGER or CHAR");
      }
      q.attrs.push_back(std::move(a));
      if (cur().kind != Tok::Comma) break;
      advance();
    }
    expect(Tok::RParen, "')'");
    if (accept_keyword("GRID")) {
      expect(Tok::LParen, "'('");
      q.grid_cols.push_back(name("column name"));
      while (cur().kind == Tok::Comma) {
        advance();
        q.grid_cols.push_back(name("column name"));
      }
      expect(Tok::RParen, "')'");
    }
    return q;
  }

  Statement drop_stmt() {
    advance();
    expect_keyword("TABLE");
    DropStmt q;
    q.rel = name("relation name");
    return q;
  }

  ExprPtr expression() { return or_expr(); }

  ExprPtr or_expr() {
    ExprPtr e = and_expr();
    while (at_keyword("OR")) {
      size_t p = cur().pos;
      advance();
      auto n = make_logical(Expr::Kind::Or, std::move(e), and_expr());
      n->pos = p;
      e = std::move(n);
    }
    return e;
  }

  ExprPtr and_expr() {
    ExprPtr e = not_expr();
    while (at_keyword("AND")) {
      size_t p = cur().pos;
      advance();
      auto n = make_logical(Expr::Kind::And, std::move(e), not_expr());
      n->pos = p;
      e = std::move(n);
    }
    return e;
  }

  ExprPtr not_expr() {
    if (at_keyword("NOT")) {
      size_t p = cur().pos;
      advance();
      auto n = make_not(not_expr());
      n->pos = p;
      return n;
    }
    return comparison();
  }

  std::optional<CompareOp> compare_op() {
    switch (cur().kind) {
      case Tok::Eq: return CompareOp::Eq;
      case Tok::Ne: return CompareOp::Ne;
      case Tok::Lt: return CompareOp::Lt;
      case Tok::Gt: return CompareOp::Gt;
      case Tok::Le: return CompareOp::Le;
      case Tok::Ge: return CompareOp::Ge;
      default: return std::nullopt;
    }
  }

  ExprPtr comparison() {
    ExprPtr e = additive();
    if (auto op = compare_op()) {
      size_t p = cur().pos;
      advance();
      auto n = make_compare(*op, std::move(e), additive());
      n->pos = p;
      return n;
    }
    return e;
  }

  ExprPtr additive() {
    ExprPtr e = primary();
    while (cur().kind == Tok::Plus || cur().kind == Tok::Minus) {
      ArithOp op = cur().kind == Tok::Plus ? ArithOp::Add : ArithOp::Sub;
      size_t p = cur().pos;
      advance();
      auto n = std::make_unique<Expr>();
      n->kind = Expr::Kind::Arith;
      n->arith = op;
      n->left = std::move(e);
      n->right = primary();
      n->pos = p;
      e = std::move(n);
    }
    return e;
  }

  ExprPtr primary() {
    const Token& t = cur();
    switch (t.kind) {
      case Tok::Int: {
        advance();
        auto e = make_int(t.number);
        e->pos = t.pos;
        return e;
      }
      case Tok::Minus: {
        advance();
        Token n = expect(Tok::Int, "integer literal");
        auto e = make_int(-n.number);
        e->pos = t.pos;
        return e;
      }
      case Tok::Str: {
        advance();
        auto e = make_str(t.text);
        e->pos = t.pos;
        return e;
      }
      case Tok::Ident: {
        if (is_reserved(t.text)) fail("a value expression");
        advance();
        auto e = std::make_unique<Expr>();
        e->kind = Expr::Kind::Column;
        e->column.column = t.text;
        e->pos = t.pos;
        if (cur().kind == Tok::Dot) {
          advance();
          e->column.rel = e->column.column;
          e->column.column = name("column name");
        }
        return e;
      }
      case Tok::LParen: {
        advance();
        ExprPtr e = expression();
        expect(Tok::RParen, "')'");
        return e;
      }
      default:
        fail("a value expression");
    }
  }

  std::vector<Token> toks_;
  size_t i_ = 0;
};

}  // namespace

Statement parse_statement(const std::string& text) {
  Parser p(text);
  return p.parse();
}

}  // namespace gridrel
