#include "gridrel/executor.hpp"

#include <algorithm>
#include <cstring>
#include <functional>
#include <set>

#include "gridrel/analyzer.hpp"
#include "gridrel/database.hpp"

namespace gridrel {

namespace {

using Row = std::vector<Tuple>;  // one slot per FROM relation; empty = unbound

ValueGetter row_getter(const Row& r) {
  return [&r](int rel, int attr) { return r[size_t(rel)][size_t(attr)]; };
}

GridFile::Predicate single_pred(const Expr* residual) {
  if (!residual) return {};
  return [residual](const Tuple& t) {
    return eval_predicate(*residual, [&t](int, int attr) { return t[size_t(attr)]; });
  };
}

int compare_order_values(const Value& a, const Value& b) {
  if (std::holds_alternative<int32_t>(a)) {
    int32_t x = std::get<int32_t>(a), y = std::get<int32_t>(b);
    return x < y ? -1 : x > y ? 1 : 0;
  }
  std::string x = std::get<std::string>(a), y = std::get<std::string>(b);
  size_t n = std::max(x.size(), y.size());
  x.resize(n, ' ');
  y.resize(n, ' ');
  int c = std::memcmp(x.data(), y.data(), n);
  return c < 0 ? -1 : c > 0 ? 1 : 0;
}

// Evaluates one group as row chunks: singleton groups stream one chunk per
// fetched bucket (the rescan unit of the nested-join cost model); merge
// groups deliver their whole join once, ordered by the join key.
void eval_group(Database& db, const JoinPlan& plan, const PlanGroup& g,
                const std::function<void(std::vector<Row>&&)>& sink) {
  const size_t n = plan.relations.size();
  if (!g.is_merge()) {
    size_t m = g.members[0];
    const PlannedRelation& pr = plan.relations[m];
    GridFile& gf = db.relation(pr.name);
    gf.scan_region_chunked(pr.region, single_pred(pr.residual.get()),
                           [&](std::vector<Tuple>&& chunk) {
                             std::vector<Row> rows;
                             rows.reserve(chunk.size());
                             for (auto& t : chunk) {
                               Row r(n);
                               r[m] = std::move(t);
                               rows.push_back(std::move(r));
                             }
                             sink(std::move(rows));
                           });
    return;
  }

  struct Stream {
    std::vector<std::pair<Bytes, Tuple>> rows;
    size_t pos = 0;
  };
  std::vector<Stream> streams(g.members.size());
  for (size_t s = 0; s < g.members.size(); ++s) {
    size_t m = g.members[s];
    const PlannedRelation& pr = plan.relations[m];
    GridFile& gf = db.relation(pr.name);
    auto pred = single_pred(pr.residual.get());
    int attr = g.join_attrs[s];
    const AttrDef& ad = pr.schema.attrs[size_t(attr)];
    int grid_dim = -1;
    for (size_t d = 0; d < pr.schema.grid_attrs.size(); ++d)
      if (pr.schema.grid_attrs[d] == uint32_t(attr)) grid_dim = int(d);
    auto& rows = streams[s].rows;
    if (grid_dim >= 0) {
      gf.ordered_scan(size_t(grid_dim), pr.region, false,
                      [&](const Tuple& t) {
                        rows.emplace_back(encode_value(ad, t[size_t(attr)]), t);
                      },
                      pred);
    } else {
      // Join attribute outside the grid: plain scan plus a full sort.
      for (auto& t : gf.scan_region(pr.region, pred)) {
        Bytes key = encode_value(ad, t[size_t(attr)]);
        rows.emplace_back(std::move(key), std::move(t));
      }
      std::sort(rows.begin(), rows.end(),
                [](const auto& a, const auto& b) {
                  return compare_padded(a.first, b.first) < 0;
                });
    }
  }

  std::vector<Row> out;
  for (;;) {
    bool exhausted = false;
    for (auto& s : streams)
      if (s.pos >= s.rows.size()) exhausted = true;
    if (exhausted) break;

    const Bytes* mx = &streams[0].rows[streams[0].pos].first;
    for (auto& s : streams)
      if (compare_padded(s.rows[s.pos].first, *mx) > 0)
        mx = &s.rows[s.pos].first;
    Bytes key = *mx;
    bool aligned = true;
    for (auto& s : streams) {
      while (s.pos < s.rows.size() &&
             compare_padded(s.rows[s.pos].first, key) < 0)
        ++s.pos;
      if (s.pos >= s.rows.size() ||
          compare_padded(s.rows[s.pos].first, key) != 0)
        aligned = false;
    }
    if (!aligned) continue;

    // Cross product of the equal-key runs.
    std::vector<std::pair<size_t, size_t>> runs(streams.size());
    for (size_t s = 0; s < streams.size(); ++s) {
      size_t b = streams[s].pos, e = b;
      while (e < streams[s].rows.size() &&
             compare_padded(streams[s].rows[e].first, key) == 0)
        ++e;
      runs[s] = {b, e};
    }
    std::vector<size_t> idx(streams.size());
    for (size_t s = 0; s < streams.size(); ++s) idx[s] = runs[s].first;
    for (;;) {
      Row r(n);
      for (size_t s = 0; s < streams.size(); ++s)
        r[g.members[s]] = streams[s].rows[idx[s]].second;
      out.push_back(std::move(r));
      size_t lvl = streams.size();
      bool advanced = false;
      while (lvl-- > 0) {
        if (++idx[lvl] < runs[lvl].second) {
          advanced = true;
          break;
        }
        idx[lvl] = runs[lvl].first;
        if (lvl == 0) break;
      }
      if (!advanced) break;
    }
    for (size_t s = 0; s < streams.size(); ++s) streams[s].pos = runs[s].second;
  }
  sink(std::move(out));
}

}  // namespace

JoinPlan make_plan(Database& db, SelectStmt& q, bool force_nested) {
  std::vector<BoundRelation> rels;
  rels.reserve(q.from.size());
  for (const auto& name : q.from)
    rels.push_back(BoundRelation{name, db.relation(name).schema()});
  analyze_select(q, rels);
  return plan_select(
      q, rels,
      [&db](const std::string& name) {
        return uint64_t(db.relation(name).store().page_count(FileRole::Data));
      },
      db.config().region_box_limit, force_nested);
}

ExecResult run_select(Database& db, SelectStmt q, bool force_nested) {
  JoinPlan plan = make_plan(db, q, force_nested);
  const size_t n = plan.relations.size();

  // Each cross residual runs at the first level where all its relations
  // are bound.
  std::vector<std::vector<const Expr*>> residuals_at(plan.groups.size());
  {
    std::set<int> bound;
    for (size_t gi = 0; gi < plan.groups.size(); ++gi) {
      for (size_t m : plan.groups[gi].members) bound.insert(int(m));
      for (const CrossResidual& cr : plan.cross_residuals) {
        bool already = false;
        for (size_t gj = 0; gj < gi; ++gj)
          for (const Expr* e : residuals_at[gj])
            if (e == cr.expr.get()) already = true;
        if (already) continue;
        bool ok = true;
        for (int r : cr.rels)
          if (!bound.count(r)) ok = false;
        if (ok) residuals_at[gi].push_back(cr.expr.get());
      }
    }
  }

  std::vector<Row> results;
  auto filter_chunk = [&](std::vector<Row>&& rows, size_t level) {
    std::vector<Row> kept;
    kept.reserve(rows.size());
    for (auto& r : rows) {
      bool ok = true;
      for (const Expr* e : residuals_at[level])
        if (!eval_predicate(*e, row_getter(r))) {
          ok = false;
          break;
        }
      if (ok) kept.push_back(std::move(r));
    }
    return kept;
  };

  bool ordered_by_scan = false;
  if (n == 1 && plan.order_by && plan.order_by->column.is_grid &&
      plan.groups.size() == 1 && !plan.groups[0].is_merge()) {
    // Single-relation ORDER BY on a grid attribute: slab-ordered scan.
    const PlannedRelation& pr = plan.relations[0];
    GridFile& gf = db.relation(pr.name);
    auto pred = single_pred(pr.residual.get());
    gf.ordered_scan(size_t(plan.order_by->column.grid_dim), pr.region,
                    plan.order_by->descending,
                    [&](const Tuple& t) {
                      Row r(1);
                      r[0] = t;
                      bool ok = true;
                      for (const Expr* e : residuals_at[0])
                        if (!eval_predicate(*e, row_getter(r))) ok = false;
                      if (ok) results.push_back(std::move(r));
                    },
                    pred);
    ordered_by_scan = true;
  } else {
    std::function<void(size_t, std::vector<Row>&&)> recurse =
        [&](size_t gi, std::vector<Row>&& outer) {
          if (outer.empty()) return;
          if (gi == plan.groups.size()) {
            for (auto& r : outer) results.push_back(std::move(r));
            return;
          }
          eval_group(db, plan, plan.groups[gi], [&](std::vector<Row>&& inner) {
            std::vector<Row> combined;
            combined.reserve(outer.size() * inner.size());
            for (const Row& o : outer) {
              for (const Row& i : inner) {
                Row r = o;
                for (size_t m : plan.groups[gi].members) r[m] = i[m];
                bool ok = true;
                for (const Expr* e : residuals_at[gi])
                  if (!eval_predicate(*e, row_getter(r))) {
                    ok = false;
                    break;
                  }
                if (ok) combined.push_back(std::move(r));
              }
            }
            recurse(gi + 1, std::move(combined));
          });
        };
    eval_group(db, plan, plan.groups[0], [&](std::vector<Row>&& chunk) {
      recurse(1, filter_chunk(std::move(chunk), 0));
    });
  }

  if (plan.order_by && !ordered_by_scan) {
    const ColumnRef& oc = plan.order_by->column;
    bool desc = plan.order_by->descending;
    std::stable_sort(results.begin(), results.end(),
                     [&](const Row& a, const Row& b) {
                       int c = compare_order_values(
                           a[size_t(oc.rel_index)][size_t(oc.attr_index)],
                           b[size_t(oc.rel_index)][size_t(oc.attr_index)]);
                       return desc ? c > 0 : c < 0;
                     });
  }

  ExecResult out;
  out.kind = ExecResult::Kind::Rows;
  bool qualify = n > 1;
  if (q.star) {
    for (size_t r = 0; r < n; ++r)
      for (const AttrDef& a : plan.relations[r].schema.attrs)
        out.columns.push_back(qualify ? plan.relations[r].name + "." + a.name
                                      : a.name);
    for (const Row& row : results) {
      std::vector<Value> vals;
      for (size_t r = 0; r < n; ++r)
        for (const Value& v : row[r]) vals.push_back(v);
      out.rows.push_back(std::move(vals));
    }
  } else {
    for (const ColumnRef& c : q.columns)
      out.columns.push_back(c.rel.empty() ? c.column : c.rel + "." + c.column);
    for (const Row& row : results) {
      std::vector<Value> vals;
      vals.reserve(q.columns.size());
      for (const ColumnRef& c : q.columns)
        vals.push_back(row[size_t(c.rel_index)][size_t(c.attr_index)]);
      out.rows.push_back(std::move(vals));
    }
  }
  return out;
}

std::string explain_select(Database& db, SelectStmt q) {
  JoinPlan plan = make_plan(db, q, false);
  return explain_plan(plan);
}

}  // namespace gridrel
