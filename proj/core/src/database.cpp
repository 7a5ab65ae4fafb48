#include "gridrel/database.hpp"

#include <filesystem>

#include "gridrel/analyzer.hpp"
#include "gridrel/parser.hpp"

namespace gridrel {

Database::Database(Config cfg) : cfg_(std::move(cfg)) {
  std::filesystem::create_directories(cfg_.dir);
  catalog_ = Catalog::open(cfg_.dir, gf_options());
}

Database::~Database() { close(); }

void Database::close() {
  for (auto& [name, gf] : open_) gf.close();
  open_.clear();
  catalog_.close();
}

GridFile::Options Database::gf_options() const {
  GridFile::Options o;
  o.page_size = cfg_.page_size;
  o.use_cache = cfg_.use_cache;
  o.cache_pages = cfg_.cache_pages;
  o.policy = cfg_.policy;
  return o;
}

GridFile& Database::relation(const std::string& name) {
  auto it = open_.find(name);
  if (it != open_.end()) return it->second;
  if (name == Catalog::kRelcatName) return catalog_.relcat();
  if (name == Catalog::kAttrcatName) return catalog_.attrcat();
  RelationSchema schema = catalog_.lookup(name);
  auto [pos, ok] = open_.emplace(
      name, GridFile::open(cfg_.dir, schema, cfg_.use_cache, cfg_.cache_pages));
  return pos->second;
}

AccessStats Database::access_stats() {
  AccessStats sum;
  auto add = [&sum](const AccessStats& s) {
    sum.data_reads += s.data_reads;
    sum.data_writes += s.data_writes;
    sum.dir_reads += s.dir_reads;
    sum.dir_writes += s.dir_writes;
    sum.scale_reads += s.scale_reads;
    sum.scale_writes += s.scale_writes;
  };
  add(catalog_.relcat().access_stats());
  add(catalog_.attrcat().access_stats());
  for (auto& [name, gf] : open_) add(gf.access_stats());
  return sum;
}

void Database::reset_access_stats() {
  catalog_.relcat().reset_access_stats();
  catalog_.attrcat().reset_access_stats();
  for (auto& [name, gf] : open_) gf.reset_access_stats();
}

GridStats Database::relation_stats(const std::string& name) {
  return relation(name).grid_stats();
}

ExecResult Database::execute(const std::string& sql) {
  return execute_statement(parse_statement(sql));
}

std::string Database::explain(const std::string& select_sql) {
  Statement stmt = parse_statement(select_sql);
  if (!std::holds_alternative<SelectStmt>(stmt))
    throw EngineError("EXPLAIN expects a SELECT statement");
  return explain_select(*this, std::move(std::get<SelectStmt>(stmt)));
}

namespace {

// Builds region + residual for a single-relation WHERE clause.
struct SinglePredicate {
  RegionSet region;
  GridFile::Predicate pred;
  ExprPtr residual_keepalive;
};

SinglePredicate compile_where(const RelationSchema& schema, Expr* where,
                              size_t box_limit) {
  SinglePredicate out;
  if (!where) {
    out.region.boxes.push_back(full_box(schema));
    return out;
  }
  RegionResult rr = region_from_expr(*where, schema, box_limit);
  out.region = std::move(rr.region);
  out.residual_keepalive = std::move(rr.residual);
  if (out.residual_keepalive) {
    const Expr* e = out.residual_keepalive.get();
    out.pred = [e](const Tuple& t) {
      return eval_predicate(*e, [&t](int, int attr) { return t[size_t(attr)]; });
    };
  }
  return out;
}

}  // namespace

ExecResult Database::execute_statement(Statement stmt) {
  ExecResult result;
  if (std::holds_alternative<SelectStmt>(stmt))
    return run_select(*this, std::move(std::get<SelectStmt>(stmt)));

  if (std::holds_alternative<InsertStmt>(stmt)) {
    InsertStmt& q = std::get<InsertStmt>(stmt);
    const RelationSchema& schema = relation(q.rel).schema();
    Tuple t = analyze_row(schema, q.values);
    relation(q.rel).insert(t);
    result.kind = ExecResult::Kind::Count;
    result.count = 1;
    return result;
  }

  if (std::holds_alternative<DeleteStmt>(stmt)) {
    DeleteStmt& q = std::get<DeleteStmt>(stmt);
    const RelationSchema& schema = relation(q.rel).schema();
    if (q.where) resolve_expr(*q.where, {BoundRelation{q.rel, schema}});
    SinglePredicate sp =
        compile_where(schema, q.where.get(), cfg_.region_box_limit);
    result.kind = ExecResult::Kind::Count;
    result.count = relation(q.rel).delete_where(sp.region, sp.pred);
    return result;
  }

  if (std::holds_alternative<UpdateStmt>(stmt)) {
    UpdateStmt& q = std::get<UpdateStmt>(stmt);
    const RelationSchema& schema = relation(q.rel).schema();
    std::vector<std::pair<size_t, Value>> sets;
    for (auto& [col, value] : q.assignments) {
      int idx = schema.attr_index(col);
      if (idx < 0) throw EngineError("unknown column " + col);
      sets.emplace_back(size_t(idx), coerce_value(schema.attrs[idx], value));
    }
    if (q.where) resolve_expr(*q.where, {BoundRelation{q.rel, schema}});
    SinglePredicate sp =
        compile_where(schema, q.where.get(), cfg_.region_box_limit);
    GridFile& gf = relation(q.rel);
    // Delete + reinsert keeps grid placement right when a grid attribute
    // changes.
    std::vector<Tuple> matches = gf.scan_region(sp.region, sp.pred);
    gf.delete_where(sp.region, sp.pred);
    for (Tuple& t : matches) {
      for (auto& [idx, value] : sets) t[idx] = value;
      gf.insert(t);
    }
    result.kind = ExecResult::Kind::Count;
    result.count = matches.size();
    return result;
  }

  if (std::holds_alternative<CreateStmt>(stmt)) {
    CreateStmt& q = std::get<CreateStmt>(stmt);
    RelationSchema schema;
    schema.name = q.rel;
    schema.attrs = q.attrs;
    if (q.grid_cols.empty()) {
      for (size_t i = 0; i < schema.attrs.size(); ++i)
        schema.grid_attrs.push_back(uint32_t(i));
    } else {
      for (const std::string& g : q.grid_cols) {
        int idx = schema.attr_index(g);
        if (idx < 0) throw EngineError("unknown grid column " + g);
        schema.grid_attrs.push_back(uint32_t(idx));
      }
    }
    schema.validate();
    if (Catalog::is_reserved(schema.name))
      throw EngineError("relation name is reserved: " + schema.name);
    catalog_.create(schema);
    open_.emplace(schema.name, GridFile::create(cfg_.dir, schema, gf_options()));
    result.kind = ExecResult::Kind::Ok;
    return result;
  }

  DropStmt& q = std::get<DropStmt>(stmt);
  catalog_.drop(q.rel);
  auto it = open_.find(q.rel);
  if (it != open_.end()) {
    it->second.close();
    open_.erase(it);
  }
  GridFile::destroy(cfg_.dir, q.rel);
  result.kind = ExecResult::Kind::Ok;
  return result;
}

}  // namespace gridrel
