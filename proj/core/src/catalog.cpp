#include "gridrel/catalog.hpp"

#include <algorithm>

namespace gridrel {

const char* Catalog::kRelcatName = "RELCAT";
const char* Catalog::kAttrcatName = "ATTRCAT";

bool Catalog::is_reserved(const std::string& name) {
  return name == kRelcatName || name == kAttrcatName;
}

RelationSchema Catalog::relcat_schema() {
  RelationSchema s;
  s.name = kRelcatName;
  s.attrs = {
      {"RELNAME", AttrType::Char, 32},
      {"NATTRS", AttrType::Integer, 4},
      {"BUCKETCAP", AttrType::Integer, 4},
  };
  s.grid_attrs = {0};
  return s;
}

RelationSchema Catalog::attrcat_schema() {
  RelationSchema s;
  s.name = kAttrcatName;
  s.attrs = {
      {"RELNAME", AttrType::Char, 32},
      {"POS", AttrType::Integer, 4},
      {"ATTRNAME", AttrType::Char, 32},
      {"ATTRTYPE", AttrType::Integer, 4},
      {"WIDTH", AttrType::Integer, 4},
      {"GRIDPOS", AttrType::Integer, 4},  // -1 = not a grid attribute
  };
  s.grid_attrs = {0, 1};
  return s;
}

Catalog Catalog::open(const std::string& dir, const GridFile::Options& opts) {
  Catalog c;
  if (GridFile::exists(dir, kRelcatName)) {
    c.relcat_ = std::make_unique<GridFile>(
        GridFile::open(dir, relcat_schema(), opts.use_cache, opts.cache_pages));
    c.attrcat_ = std::make_unique<GridFile>(
        GridFile::open(dir, attrcat_schema(), opts.use_cache, opts.cache_pages));
    return c;
  }
  c.relcat_ = std::make_unique<GridFile>(GridFile::create(dir, relcat_schema(), opts));
  c.attrcat_ = std::make_unique<GridFile>(GridFile::create(dir, attrcat_schema(), opts));
  // The catalogs describe themselves like any other relation.
  c.create(relcat_schema());
  c.create(attrcat_schema());
  return c;
}

void Catalog::close() {
  if (relcat_) relcat_->close();
  if (attrcat_) attrcat_->close();
}

bool Catalog::exists(const std::string& name) {
  return !relcat_->point_query({Value{name}}).empty();
}

void Catalog::create(const RelationSchema& schema) {
  schema.validate();
  if (schema.name.size() > 32) throw EngineError("relation name too long");
  if (exists(schema.name))
    throw EngineError("relation already exists: " + schema.name);
  relcat_->insert(Tuple{Value{schema.name}, Value{int32_t(schema.attrs.size())},
                        Value{int32_t(schema.bucket_capacity)}});
  for (size_t i = 0; i < schema.attrs.size(); ++i) {
    const AttrDef& a = schema.attrs[i];
    int32_t grid_pos = -1;
    for (size_t g = 0; g < schema.grid_attrs.size(); ++g)
      if (schema.grid_attrs[g] == i) grid_pos = int32_t(g);
    attrcat_->insert(Tuple{Value{schema.name}, Value{int32_t(i)},
                           Value{a.name}, Value{int32_t(a.type)},
                           Value{int32_t(a.width)}, Value{grid_pos}});
  }
}

RelationSchema Catalog::lookup(const std::string& name) {
  auto rel_rows = relcat_->point_query({Value{name}});
  if (rel_rows.empty()) throw EngineError("relation not found: " + name);
  const Tuple& rel = rel_rows.front();

  RelationSchema s;
  s.name = name;
  s.bucket_capacity = uint32_t(std::get<int32_t>(rel[2]));
  size_t nattrs = size_t(std::get<int32_t>(rel[1]));

  RegionSet by_name = region_from_basic_term(
      attrcat_->schema(), 0, CompareOp::Eq,
      encode_value(attrcat_->schema().attrs[0], Value{name}));
  std::vector<Tuple> rows = attrcat_->scan_region(by_name);
  std::sort(rows.begin(), rows.end(), [](const Tuple& a, const Tuple& b) {
    return std::get<int32_t>(a[1]) < std::get<int32_t>(b[1]);
  });
  if (rows.size() != nattrs)
    throw EngineError("catalog corrupt for relation " + name);

  std::vector<std::pair<int32_t, uint32_t>> grid;  // (grid_pos, attr index)
  for (const Tuple& r : rows) {
    AttrDef a;
    a.name = std::get<std::string>(r[2]);
    a.type = AttrType(std::get<int32_t>(r[3]));
    a.width = uint32_t(std::get<int32_t>(r[4]));
    int32_t gp = std::get<int32_t>(r[5]);
    if (gp >= 0) grid.emplace_back(gp, uint32_t(s.attrs.size()));
    s.attrs.push_back(std::move(a));
  }
  std::sort(grid.begin(), grid.end());
  for (auto& [gp, idx] : grid) s.grid_attrs.push_back(idx);
  s.validate();
  return s;
}

void Catalog::drop(const std::string& name) {
  if (is_reserved(name))
    throw EngineError("cannot drop catalog relation " + name);
  if (!exists(name)) throw EngineError("relation not found: " + name);
  RegionSet rel_region = region_from_basic_term(
      relcat_->schema(), 0, CompareOp::Eq,
      encode_value(relcat_->schema().attrs[0], Value{name}));
  relcat_->delete_where(rel_region);
  RegionSet attr_region = region_from_basic_term(
      attrcat_->schema(), 0, CompareOp::Eq,
      encode_value(attrcat_->schema().attrs[0], Value{name}));
  attrcat_->delete_where(attr_region);
}

std::vector<std::string> Catalog::list() {
  std::vector<std::string> names;
  for (const Tuple& t : relcat_->full_scan())
    names.push_back(std::get<std::string>(t[0]));
  std::sort(names.begin(), names.end());
  return names;
}

}  // namespace gridrel
