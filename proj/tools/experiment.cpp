#include "experiment.hpp"

#include <cmath>
#include <filesystem>
#include <iomanip>
#include <ostream>
#include <random>

namespace gridrel {

namespace {

RelationSchema books_schema(bool small_grid) {
  RelationSchema s;
  s.name = small_grid ? "SMALLBOOKS" : "BOOKS";
  s.attrs = {
      {"ACNO", AttrType::Char, 5},      {"TITLE", AttrType::Char, 50},
      {"AUTHOR", AttrType::Char, 25},   {"CLASSNO", AttrType::Char, 5},
      {"PUBLISHER", AttrType::Char, 25}, {"YEAR", AttrType::Integer, 4},
  };
  if (small_grid)
    s.grid_attrs = {1, 2, 5};  // TITLE, AUTHOR, YEAR
  else
    s.grid_attrs = {0, 1, 2, 3, 4, 5};
  return s;
}

std::string rand_word(std::mt19937& rng, size_t len) {
  std::string s;
  for (size_t i = 0; i < len; ++i) s.push_back(char('A' + rng() % 26));
  return s;
}

// Rank-skewed pick in [0, n): small ranks dominate.
size_t zipf_pick(std::mt19937& rng, size_t n) {
  double u = (double(rng()) + 1.0) / (double(std::mt19937::max()) + 2.0);
  double r = std::exp(u * std::log(double(n)));
  size_t k = size_t(r) - 1;
  return std::min(k, n - 1);
}

struct Generator {
  std::mt19937 rng;
  std::map<std::string, std::string> dist;
  std::vector<std::string> zipf_pool;

  explicit Generator(const ExperimentSpec& spec) : rng(uint32_t(spec.seed)) {
    dist = spec.dist;
    auto def = [&](const char* attr, const char* kind) {
      if (!dist.count(attr)) dist[attr] = kind;
    };
    def("ACNO", "constprefix");
    def("TITLE", "uniform");
    def("AUTHOR", "constprefix");
    def("CLASSNO", "constprefix");
    def("PUBLISHER", "constprefix");
    def("YEAR", "zipf");
    for (int i = 0; i < 64; ++i) zipf_pool.push_back(rand_word(rng, 10));
  }

  Value value_for(const AttrDef& attr) {
    const std::string& kind = dist[attr.name];
    if (attr.type == AttrType::Integer) {
      if (kind == "uniform") return Value{int32_t(rng() % 1000000)};
      if (kind == "constprefix") return Value{int32_t(rng() % 16)};
      return Value{int32_t(60 + int32_t(zipf_pick(rng, 30)))};
    }
    size_t len = std::min<size_t>(attr.width, 12);
    if (kind == "uniform") return Value{rand_word(rng, len)};
    if (kind == "zipf") {
      std::string v = zipf_pool[zipf_pick(rng, zipf_pool.size())];
      return Value{v.substr(0, std::min(v.size(), size_t(attr.width)))};
    }
    // constprefix: the whole first word is fixed, suffixes vary.
    std::string v = "AAAA" + rand_word(rng, len > 4 ? len - 4 : 1);
    return Value{v.substr(0, std::min(v.size(), size_t(attr.width)))};
  }
};

uint64_t accesses_for_region(GridFile& gf, const RegionSet& region) {
  gf.reset_access_stats();
  gf.scan_region(region, {});
  AccessStats st = gf.access_stats();
  return st.reads();
}

ExperimentEntry measure(GridFile& gf, const std::string& policy,
                        const std::vector<Tuple>& data) {
  ExperimentEntry e;
  e.policy = policy;
  e.relation = gf.schema().name;
  e.stats = gf.grid_stats();
  for (size_t d = 0; d < gf.schema().grid_dims(); ++d)
    e.grid_attr_names.push_back(gf.schema().grid_attr(d).name);

  if (data.empty()) return e;
  // Table-2 shaped probes against values that exist in the data.
  const RelationSchema& s = gf.schema();
  const Tuple& probe = data[data.size() / 2];
  auto term = [&](const char* name, CompareOp op) {
    int attr = s.attr_index(name);
    int dim = -1;
    for (size_t g = 0; g < s.grid_attrs.size(); ++g)
      if (s.grid_attrs[g] == uint32_t(attr)) dim = int(g);
    RegionSet r;
    if (dim < 0) {
      r.boxes.push_back(full_box(s));
      return r;
    }
    return region_from_basic_term(s, size_t(dim), op,
                                  encode_value(s.attrs[attr], probe[attr]));
  };
  RegionSet title_eq = term("TITLE", CompareOp::Eq);
  RegionSet author_eq = term("AUTHOR", CompareOp::Eq);
  RegionSet year_eq = term("YEAR", CompareOp::Eq);
  e.query_accesses.emplace_back("TITLE=", accesses_for_region(gf, title_eq));
  e.query_accesses.emplace_back("AUTHOR=", accesses_for_region(gf, author_eq));
  e.query_accesses.emplace_back("YEAR=", accesses_for_region(gf, year_eq));
  e.query_accesses.emplace_back(
      "YEAR=&TITLE=", accesses_for_region(gf, region_intersect(year_eq, title_eq)));
  return e;
}

}  // namespace

const ExperimentEntry& ExperimentReport::find(const std::string& policy,
                                              const std::string& relation) const {
  for (const ExperimentEntry& e : entries)
    if (e.policy == policy && e.relation == relation) return e;
  throw EngineError("no experiment entry for " + policy + "/" + relation);
}

ExperimentReport run_split_policy_experiment(const ExperimentSpec& spec,
                                             const std::string& work_dir) {
  // Identical data inserted under every configuration.
  Generator gen(spec);
  RelationSchema books = books_schema(false);
  std::vector<Tuple> data;
  data.reserve(spec.tuples);
  for (size_t i = 0; i < spec.tuples; ++i) {
    Tuple t;
    for (const AttrDef& a : books.attrs) t.push_back(gen.value_for(a));
    data.push_back(std::move(t));
  }

  ExperimentReport report;
  for (SplitPolicy policy : {SplitPolicy::RoundRobin, SplitPolicy::MidpointFirst}) {
    std::string pname =
        policy == SplitPolicy::RoundRobin ? "roundrobin" : "midpoint";
    for (bool small_grid : {false, true}) {
      RelationSchema schema = books_schema(small_grid);
      schema.bucket_capacity = spec.bucket_capacity;
      std::string dir =
          (std::filesystem::path(work_dir) / pname).string();
      std::filesystem::create_directories(dir);
      GridFile::Options opts;
      opts.page_size = spec.page_size;
      opts.use_cache = false;
      opts.policy = policy;
      if (GridFile::exists(dir, schema.name)) GridFile::destroy(dir, schema.name);
      GridFile gf = GridFile::create(dir, schema, opts);
      for (const Tuple& t : data) gf.insert(t);
      report.entries.push_back(measure(gf, pname, data));
      gf.close();
    }
  }
  return report;
}

void render_report(const ExperimentReport& report, std::ostream& out, bool csv) {
  for (const ExperimentEntry& e : report.entries) {
    if (csv) {
      out << "stats," << e.policy << "," << e.relation << ",occupancy,"
          << std::fixed << std::setprecision(3) << e.stats.occupancy << "\n";
      out << "stats," << e.policy << "," << e.relation << ",redundancy,"
          << std::fixed << std::setprecision(3) << e.stats.redundancy << "\n";
      out << "stats," << e.policy << "," << e.relation << ",buckets,"
          << e.stats.bucket_count << "\n";
      for (size_t d = 0; d < e.stats.partitions.size(); ++d)
        out << "partitions," << e.policy << "," << e.relation << ","
            << e.grid_attr_names[d] << "," << e.stats.partitions[d] << "\n";
      for (const auto& [q, n] : e.query_accesses)
        out << "query," << e.policy << "," << e.relation << "," << q << ","
            << n << "\n";
    } else {
      out << e.policy << " / " << e.relation << ": occupancy=" << std::fixed
          << std::setprecision(1) << e.stats.occupancy * 100
          << "% redundancy=" << std::setprecision(2) << e.stats.redundancy
          << " buckets=" << e.stats.bucket_count << "\n  partitions:";
      for (size_t d = 0; d < e.stats.partitions.size(); ++d)
        out << " " << e.grid_attr_names[d] << "=" << e.stats.partitions[d];
      out << "\n  disk accesses:";
      for (const auto& [q, n] : e.query_accesses) out << " " << q << n;
      out << "\n";
    }
  }
}

}  // namespace gridrel
