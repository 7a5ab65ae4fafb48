#include "gridrel/planner.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

namespace gridrel {

namespace {

void flatten_and(ExprPtr e, std::vector<ExprPtr>& out) {
  if (e->kind == Expr::Kind::And) {
    flatten_and(std::move(e->left), out);
    flatten_and(std::move(e->right), out);
    return;
  }
  out.push_back(std::move(e));
}

void rels_of(const Expr& e, std::set<int>& out) {
  if (e.kind == Expr::Kind::Column) out.insert(e.column.rel_index);
  if (e.left) rels_of(*e.left, out);
  if (e.right) rels_of(*e.right, out);
}

bool has_arith(const Expr& e) {
  if (e.kind == Expr::Kind::Arith) return true;
  if (e.left && has_arith(*e.left)) return true;
  if (e.right && has_arith(*e.right)) return true;
  return false;
}

struct Leaf {
  const Expr* e;
  std::set<int> rels;
  bool pure_equijoin = false;  // column = column across two relations
  int rel_a = -1, attr_a = -1;
  int rel_b = -1, attr_b = -1;
  bool arith = false;
};

void collect_leaves(const Expr& e, std::vector<Leaf>& out) {
  switch (e.kind) {
    case Expr::Kind::And:
    case Expr::Kind::Or:
      collect_leaves(*e.left, out);
      collect_leaves(*e.right, out);
      return;
    case Expr::Kind::Not:
      collect_leaves(*e.left, out);
      return;
    case Expr::Kind::Compare: {
      Leaf l;
      l.e = &e;
      rels_of(e, l.rels);
      l.arith = has_arith(e);
      if (e.cmp == CompareOp::Eq && e.left->kind == Expr::Kind::Column &&
          e.right->kind == Expr::Kind::Column &&
          e.left->column.rel_index != e.right->column.rel_index) {
        l.pure_equijoin = true;
        l.rel_a = e.left->column.rel_index;
        l.attr_a = e.left->column.attr_index;
        l.rel_b = e.right->column.rel_index;
        l.attr_b = e.right->column.attr_index;
      }
      out.push_back(std::move(l));
      return;
    }
    default:
      return;
  }
}

// Conditions (iii) and (v) for a candidate pair with designated attributes:
// every term touching both relations must be exactly the designated
// equijoin, and no arithmetic term may span them.
bool pair_compatible(const std::vector<Leaf>& leaves, int ri, int ai, int rj,
                     int aj) {
  for (const Leaf& l : leaves) {
    if (!l.rels.count(ri) || !l.rels.count(rj)) continue;
    if (l.rels.size() > 2) return false;  // arithmetic across relations
    if (!l.pure_equijoin) return false;
    bool straight = l.rel_a == ri && l.attr_a == ai && l.rel_b == rj && l.attr_b == aj;
    bool flipped = l.rel_a == rj && l.attr_a == aj && l.rel_b == ri && l.attr_b == ai;
    if (!straight && !flipped) return false;
  }
  return true;
}

// Condition (ii): some conjunct joins the pair on exactly these attributes.
bool edge_exists(const std::vector<Leaf>& conjunct_edges, int ri, int ai,
                 int rj, int aj) {
  for (const Leaf& l : conjunct_edges) {
    if (!l.pure_equijoin) continue;
    bool straight = l.rel_a == ri && l.attr_a == ai && l.rel_b == rj && l.attr_b == aj;
    bool flipped = l.rel_a == rj && l.attr_a == aj && l.rel_b == ri && l.attr_b == ai;
    if (straight || flipped) return true;
  }
  return false;
}

}  // namespace

JoinPlan plan_select(const SelectStmt& q, const std::vector<BoundRelation>& rels,
                     const BucketCountFn& bucket_count, size_t box_limit,
                     bool force_nested) {
  const size_t n = rels.size();
  JoinPlan plan;
  plan.order_by = q.order_by ? std::optional<OrderBySpec>(*q.order_by)
                             : std::nullopt;

  ExprPtr nnf = q.where ? to_nnf(*q.where) : nullptr;
  std::vector<ExprPtr> conjuncts;
  if (nnf) flatten_and(std::move(nnf), conjuncts);

  std::vector<ExprPtr> single(n);
  std::vector<Leaf> all_leaves;
  std::vector<Leaf> conjunct_edges;  // pure equijoin conjuncts, query order
  for (auto& c : conjuncts) {
    collect_leaves(*c, all_leaves);
    std::set<int> rs;
    rels_of(*c, rs);
    if (rs.size() == 1) {
      int r = *rs.begin();
      single[r] = single[r]
                      ? make_logical(Expr::Kind::And, std::move(single[r]), std::move(c))
                      : std::move(c);
      continue;
    }
    std::vector<Leaf> tmp;
    collect_leaves(*c, tmp);
    if (tmp.size() == 1 && tmp.front().pure_equijoin &&
        c->kind == Expr::Kind::Compare)
      conjunct_edges.push_back(tmp.front());
    CrossResidual cr;
    cr.expr = std::move(c);
    cr.rels.assign(rs.begin(), rs.end());
    plan.cross_residuals.push_back(std::move(cr));
  }

  for (size_t r = 0; r < n; ++r) {
    PlannedRelation pr;
    pr.name = rels[r].name;
    pr.schema = rels[r].schema;
    if (single[r]) {
      RegionResult res = region_from_expr(*single[r], pr.schema, box_limit);
      pr.region = std::move(res.region);
      pr.residual = std::move(res.residual);
    } else {
      pr.region.boxes.push_back(full_box(pr.schema));
    }
    pr.bucket_estimate = std::max<uint64_t>(1, bucket_count(pr.name));
    plan.relations.push_back(std::move(pr));
  }

  // Greedy grouping in query term order; admission requires a designated
  // equijoin with every current member plus pair compatibility.
  std::vector<int> group_of(n, -1);
  std::vector<PlanGroup> groups;
  if (!force_nested) {
    for (const Leaf& edge : conjunct_edges) {
      int i = edge.rel_a, j = edge.rel_b;
      int ai = edge.attr_a, aj = edge.attr_b;
      int gi = group_of[i], gj = group_of[j];
      if (gi < 0 && gj < 0) {
        if (!pair_compatible(all_leaves, i, ai, j, aj)) continue;
        PlanGroup g;
        g.members = {size_t(i), size_t(j)};
        g.join_attrs = {ai, aj};
        group_of[i] = group_of[j] = int(groups.size());
        groups.push_back(std::move(g));
        continue;
      }
      if (gi >= 0 && gj >= 0) continue;
      int grp = gi >= 0 ? gi : gj;
      int member = gi >= 0 ? i : j;
      int member_attr = gi >= 0 ? ai : aj;
      int joiner = gi >= 0 ? j : i;
      int joiner_attr = gi >= 0 ? aj : ai;
      PlanGroup& g = groups[grp];
      size_t mi = 0;
      while (mi < g.members.size() && g.members[mi] != size_t(member)) ++mi;
      if (g.join_attrs[mi] != member_attr) continue;  // condition (iv)
      bool ok = true;
      for (size_t m = 0; m < g.members.size() && ok; ++m) {
        ok = pair_compatible(all_leaves, int(g.members[m]), g.join_attrs[m],
                             joiner, joiner_attr) &&
             edge_exists(conjunct_edges, int(g.members[m]), g.join_attrs[m],
                         joiner, joiner_attr);
      }
      if (!ok) continue;
      g.members.push_back(size_t(joiner));
      g.join_attrs.push_back(joiner_attr);
      group_of[joiner] = grp;
    }
  }
  for (size_t r = 0; r < n; ++r) {
    if (group_of[r] >= 0) continue;
    PlanGroup g;
    g.members = {r};
    g.join_attrs = {-1};
    groups.push_back(std::move(g));
  }

  for (PlanGroup& g : groups) {
    g.size_estimate = 1;
    for (size_t m : g.members) g.size_estimate *= plan.relations[m].bucket_estimate;
  }
  std::stable_sort(groups.begin(), groups.end(),
                   [](const PlanGroup& a, const PlanGroup& b) {
                     return a.size_estimate < b.size_estimate;
                   });
  plan.groups = std::move(groups);
  return plan;
}

bool plan_groups_valid(const JoinPlan& plan, const Expr* where) {
  std::vector<Leaf> leaves;
  if (where) {
    ExprPtr nnf = to_nnf(*where);
    collect_leaves(*nnf, leaves);
  }
  std::vector<int> seen(plan.relations.size(), 0);
  for (const PlanGroup& g : plan.groups) {
    if (g.members.size() != g.join_attrs.size()) return false;
    for (size_t m : g.members) {
      if (m >= plan.relations.size()) return false;
      ++seen[m];
    }
    if (!g.is_merge()) continue;
    for (size_t a = 0; a < g.members.size(); ++a) {
      for (size_t b = a + 1; b < g.members.size(); ++b) {
        int ri = int(g.members[a]), rj = int(g.members[b]);
        int ai = g.join_attrs[a], aj = g.join_attrs[b];
        // (ii): a designated equijoin term exists for the pair.
        bool found = false;
        for (const Leaf& l : leaves) {
          if (!l.pure_equijoin) continue;
          bool straight =
              l.rel_a == ri && l.attr_a == ai && l.rel_b == rj && l.attr_b == aj;
          bool flipped =
              l.rel_a == rj && l.attr_a == aj && l.rel_b == ri && l.attr_b == ai;
          if (straight || flipped) found = true;
        }
        if (!found) return false;
        // (iii)-(v): nothing else ties the pair together.
        if (!pair_compatible(leaves, ri, ai, rj, aj)) return false;
      }
    }
  }
  for (int s : seen)
    if (s != 1) return false;  // condition (i)
  return true;
}

std::string region_to_string(const RelationSchema& schema, const RegionSet& r) {
  std::ostringstream os;
  if (r.boxes.empty()) {
    os << "empty";
    return os.str();
  }
  for (size_t b = 0; b < r.boxes.size(); ++b) {
    if (b) os << " + ";
    os << "<";
    for (size_t d = 0; d < r.boxes[b].size(); ++d) {
      const AttrDef& a = schema.grid_attr(d);
      const Interval& iv = r.boxes[b][d];
      if (d) os << ", ";
      os << a.name << ":[";
      if (all_zero(iv.lo))
        os << "min";
      else
        os << value_to_string(decode_value(a, iv.lo.data()));
      os << ", ";
      if (!iv.hi)
        os << "max]";
      else
        os << value_to_string(decode_value(a, iv.hi->data())) << ")";
    }
    os << ">";
  }
  return os.str();
}

std::string explain_plan(const JoinPlan& plan) {
  std::ostringstream os;
  double nested_cost = 0, running = 1;
  os << "groups (outer to inner):\n";
  for (size_t gi = 0; gi < plan.groups.size(); ++gi) {
    const PlanGroup& g = plan.groups[gi];
    os << "  " << (gi + 1) << ". " << (g.is_merge() ? "merge join: " : "scan: ");
    double merge_cost = 0;
    for (size_t m = 0; m < g.members.size(); ++m) {
      const PlannedRelation& r = plan.relations[g.members[m]];
      if (m) os << " * ";
      os << r.name;
      if (g.join_attrs[m] >= 0)
        os << "(" << r.schema.attrs[g.join_attrs[m]].name << ")";
      double b = double(r.bucket_estimate);
      merge_cost += b + b * std::ceil(std::log2(std::max<double>(b, 2)));
    }
    os << "  est=" << g.size_estimate;
    if (g.is_merge()) os << " merge_cost=" << merge_cost;
    os << "\n";
    running *= double(g.size_estimate);
    nested_cost += running;
  }
  os << "nested cost estimate: " << nested_cost << "\n";
  os << "relation access:\n";
  for (const PlannedRelation& r : plan.relations) {
    os << "  " << r.name << ": buckets=" << r.bucket_estimate
       << " region=" << region_to_string(r.schema, r.region);
    if (r.residual) os << " residual=" << expr_to_string(*r.residual);
    os << "\n";
  }
  if (!plan.cross_residuals.empty()) {
    os << "cross residuals:\n";
    for (const CrossResidual& c : plan.cross_residuals)
      os << "  " << expr_to_string(*c.expr) << "\n";
  }
  if (plan.order_by) {
    os << "order by: " << plan.order_by->column.column
       << (plan.order_by->descending ? " desc" : " asc") << "\n";
  }
  return os.str();
}

}  // namespace gridrel
