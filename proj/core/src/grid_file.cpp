#include "gridrel/grid_file.hpp"

#include <algorithm>
#include <cstring>
#include <filesystem>
#include <set>

namespace gridrel {

namespace {

constexpr size_t kBucketHeader = 8;  // u16 count, u16 pad, u32 chain+1

void put_u16(uint8_t* p, uint16_t v) {
  p[0] = uint8_t(v);
  p[1] = uint8_t(v >> 8);
}
uint16_t get_u16(const uint8_t* p) {
  return uint16_t(p[0]) | (uint16_t(p[1]) << 8);
}
void put_u32(uint8_t* p, uint32_t v) {
  p[0] = uint8_t(v);
  p[1] = uint8_t(v >> 8);
  p[2] = uint8_t(v >> 16);
  p[3] = uint8_t(v >> 24);
}
uint32_t get_u32(const uint8_t* p) {
  return uint32_t(p[0]) | (uint32_t(p[1]) << 8) | (uint32_t(p[2]) << 16) |
         (uint32_t(p[3]) << 24);
}

bool bounds_equal(const std::optional<Bytes>& a, const std::optional<Bytes>& b) {
  if (!a || !b) return !a && !b;
  return compare_padded(*a, *b) == 0;
}

}  // namespace

static std::string base_path_for(const std::string& dir, const std::string& name) {
  return (std::filesystem::path(dir) / name).string();
}

GridFile GridFile::create(const std::string& dir, const RelationSchema& schema,
                          const Options& opts) {
  schema.validate();
  GridFile g;
  g.schema_ = schema;
  g.base_path_ = base_path_for(dir, schema.name);

  uint32_t width = schema.tuple_width();
  uint32_t fit = (opts.page_size - kBucketHeader) / width;
  uint32_t cap = schema.bucket_capacity ? std::min(schema.bucket_capacity, fit) : fit;
  if (cap < 2)
    throw EngineError("page size too small for two tuples of " + schema.name);
  g.capacity_ = cap;

  RelationHeader hdr;
  hdr.schema_hash = schema_hash(schema);
  hdr.tuple_width = width;
  hdr.bucket_capacity = cap;
  hdr.grid_dims = uint32_t(schema.grid_dims());
  hdr.policy = opts.policy;
  hdr.word_size = 4;

  PageStore::Options so{opts.page_size, opts.use_cache, opts.cache_pages};
  g.store_ = std::make_unique<PageStore>(PageStore::create(g.base_path_, so, hdr));
  g.partlist_ = std::make_unique<Partlist>(schema.grid_dims(), hdr.word_size);
  g.directory_ = Directory(g.store_.get(), g.partlist_.get(),
                           uint32_t(schema.grid_dims()));
  PageId first = g.store_->alloc(FileRole::Data);
  g.directory_.init_root(first.index);
  return g;
}

GridFile GridFile::open(const std::string& dir, const RelationSchema& schema,
                        bool use_cache, size_t cache_pages) {
  schema.validate();
  GridFile g;
  g.schema_ = schema;
  g.base_path_ = base_path_for(dir, schema.name);
  g.store_ = std::make_unique<PageStore>(
      PageStore::open(g.base_path_, use_cache, cache_pages));
  if (g.store_->header().schema_hash != schema_hash(schema))
    throw EngineError("stored schema does not match catalog for " + schema.name);
  g.capacity_ = g.store_->header().bucket_capacity;
  g.partlist_ = std::make_unique<Partlist>(schema.grid_dims(),
                                           g.store_->header().word_size);
  g.partlist_->load(*g.store_);
  g.directory_ = Directory(g.store_.get(), g.partlist_.get(),
                           uint32_t(schema.grid_dims()));
  g.directory_.load();
  return g;
}

bool GridFile::exists(const std::string& dir, const std::string& name) {
  return PageStore::exists(base_path_for(dir, name));
}

void GridFile::destroy(const std::string& dir, const std::string& name) {
  PageStore::remove_files(base_path_for(dir, name));
}

void GridFile::flush() { store_->flush_header(); }

void GridFile::close() {
  if (store_) store_->close();
}

Bytes GridFile::grid_value_of(const Bytes& encoded, size_t dim) const {
  size_t off = 0;
  uint32_t attr = schema_.grid_attrs[dim];
  for (uint32_t i = 0; i < attr; ++i) off += schema_.attrs[i].width;
  return Bytes(encoded.begin() + off,
               encoded.begin() + off + schema_.attrs[attr].width);
}

std::vector<Bytes> GridFile::coords_of_encoded(const Bytes& encoded) const {
  std::vector<Bytes> coords;
  coords.reserve(schema_.grid_dims());
  for (size_t d = 0; d < schema_.grid_dims(); ++d)
    coords.push_back(grid_value_of(encoded, d));
  return coords;
}

std::vector<Bytes> GridFile::grid_coords(const Tuple& t) const {
  std::vector<Bytes> coords;
  coords.reserve(schema_.grid_dims());
  for (size_t d = 0; d < schema_.grid_dims(); ++d) {
    const AttrDef& a = schema_.grid_attr(d);
    coords.push_back(encode_value(a, t[schema_.grid_attrs[d]]));
  }
  return coords;
}

GridFile::BucketContents GridFile::read_bucket(uint32_t page) {
  BucketContents out;
  uint32_t width = schema_.tuple_width();
  uint32_t cur = page;
  bool first = true;
  for (;;) {
    Bytes pg = store_->read_page(PageId{FileRole::Data, cur});
    uint16_t count = get_u16(pg.data());
    uint32_t chain = get_u32(pg.data() + 4);
    for (uint16_t i = 0; i < count; ++i) {
      const uint8_t* t = pg.data() + kBucketHeader + size_t(i) * width;
      out.tuples.emplace_back(t, t + width);
    }
    if (!first) out.chain_pages.push_back(cur);
    first = false;
    if (chain == 0) break;
    cur = chain - 1;
  }
  return out;
}

void GridFile::store_bucket(uint32_t page, const std::vector<Bytes>& tuples,
                            std::vector<uint32_t> reusable_chain) {
  uint32_t width = schema_.tuple_width();
  size_t total = tuples.size();
  size_t chain_needed = total > capacity_
                            ? (total - capacity_ + capacity_ - 1) / capacity_
                            : 0;
  std::vector<uint32_t> chain;
  for (size_t i = 0; i < chain_needed; ++i) {
    if (i < reusable_chain.size()) {
      chain.push_back(reusable_chain[i]);
    } else {
      chain.push_back(store_->alloc(FileRole::Data).index);
    }
  }
  for (size_t i = chain_needed; i < reusable_chain.size(); ++i)
    store_->free_data_page(reusable_chain[i]);

  size_t emitted = 0;
  uint32_t cur = page;
  for (size_t link = 0; link <= chain_needed; ++link) {
    size_t n = std::min<size_t>(capacity_, total - emitted);
    Bytes pg(store_->page_size(), 0);
    put_u16(pg.data(), uint16_t(n));
    put_u32(pg.data() + 4, link < chain_needed ? chain[link] + 1 : 0);
    for (size_t i = 0; i < n; ++i)
      std::memcpy(pg.data() + kBucketHeader + i * width,
                  tuples[emitted + i].data(), width);
    emitted += n;
    store_->write_page(PageId{FileRole::Data, cur}, pg);
    if (link < chain_needed) cur = chain[link];
  }
}

std::vector<Bytes> GridFile::sorted_values(size_t dim) const {
  auto pairs = partlist_->values_before(dim, uint32_t(partlist_->size()));
  std::vector<Bytes> out;
  out.reserve(pairs.size());
  for (auto& [v, pos] : pairs) out.push_back(*v);
  return out;
}

std::vector<Bytes> GridFile::block_rep_coords(
    const std::vector<uint32_t>& idx,
    const std::vector<std::vector<Bytes>>& values) const {
  std::vector<Bytes> coords(schema_.grid_dims());
  for (size_t d = 0; d < coords.size(); ++d) {
    coords[d] = idx[d] == 0 ? Bytes(schema_.grid_attr(d).width, 0)
                            : values[d][idx[d] - 1];
  }
  return coords;
}

// Expands from one block to the full hyperparallelepiped of blocks sharing
// its bucket, walking the SHARED flags one axis at a time.
GridFile::BlockRegion GridFile::region_of(
    const std::vector<uint32_t>& start_idx,
    const std::vector<std::vector<Bytes>>& values,
    const std::vector<uint32_t>& extents) {
  BlockRegion r{start_idx, start_idx};
  for (size_t d = 0; d < start_idx.size(); ++d) {
    std::vector<uint32_t> probe = r.lo;
    for (;;) {
      DirectoryElement el =
          directory_.locate_element(block_rep_coords(probe, values)).element;
      if (el.shared(d) && probe[d] > 0) {
        --probe[d];
      } else {
        break;
      }
    }
    r.lo[d] = probe[d];
    probe = r.hi;
    while (probe[d] + 1 < extents[d]) {
      std::vector<uint32_t> up = probe;
      ++up[d];
      DirectoryElement el =
          directory_.locate_element(block_rep_coords(up, values)).element;
      if (!el.shared(d)) break;
      probe = up;
    }
    r.hi[d] = probe[d];
  }
  return r;
}

ValueBox GridFile::region_value_box(
    const BlockRegion& r, const std::vector<std::vector<Bytes>>& values) const {
  ValueBox box(r.lo.size());
  for (size_t d = 0; d < r.lo.size(); ++d) {
    box[d].lo = r.lo[d] == 0 ? Bytes(schema_.grid_attr(d).width, 0)
                             : values[d][r.lo[d] - 1];
    if (r.hi[d] < values[d].size()) box[d].hi = values[d][r.hi[d]];
  }
  return box;
}

ValueBox GridFile::box_to_value_box(const Box& b) const {
  ValueBox out(b.size());
  for (size_t d = 0; d < b.size(); ++d) {
    out[d].lo = b[d].lo;
    out[d].hi = b[d].hi;
  }
  return out;
}

void GridFile::insert(const Tuple& t) {
  if (t.size() != schema_.attrs.size())
    throw EngineError("tuple arity mismatch for " + schema_.name);
  Bytes enc(schema_.tuple_width());
  Tuple coerced;
  coerced.reserve(t.size());
  for (size_t i = 0; i < schema_.attrs.size(); ++i)
    coerced.push_back(coerce_value(schema_.attrs[i], t[i]));
  encode_tuple(schema_, coerced, enc.data());
  std::vector<Bytes> coords = coords_of_encoded(enc);

  for (;;) {
    auto hit = directory_.locate_element(coords);
    uint32_t bucket = hit.element.bucket_page;
    Bytes pg = store_->read_page(PageId{FileRole::Data, bucket});
    uint16_t count = get_u16(pg.data());
    if (count < capacity_) {
      std::memcpy(pg.data() + kBucketHeader + size_t(count) * schema_.tuple_width(),
                  enc.data(), schema_.tuple_width());
      put_u16(pg.data(), uint16_t(count + 1));
      store_->write_page(PageId{FileRole::Data, bucket}, pg);
      ++store_->header().tuple_count;
      return;
    }

    const size_t k = schema_.grid_dims();
    std::vector<std::vector<Bytes>> values(k);
    std::vector<uint32_t> extents(k), idx(k);
    for (size_t d = 0; d < k; ++d) {
      values[d] = sorted_values(d);
      extents[d] = uint32_t(values[d].size() + 1);
      idx[d] = partlist_->rank_at(d, coords[d], uint32_t(partlist_->size()));
    }
    BlockRegion region = region_of(idx, values, extents);
    bool multi_block = false;
    for (size_t d = 0; d < k; ++d)
      if (region.hi[d] > region.lo[d]) multi_block = true;

    if (multi_block) {
      split_shared_region(bucket, region, values);
      continue;
    }

    BucketContents all = read_bucket(bucket);
    std::vector<Bytes> residents = all.tuples;
    residents.push_back(enc);
    if (refine_partition(coords, bucket, residents)) continue;

    // Inseparable on every grid attribute: chain an overflow page.
    append_to_chain(bucket, enc);
    ++store_->header().tuple_count;
    return;
  }
}

void GridFile::append_to_chain(uint32_t primary, const Bytes& enc) {
  uint32_t width = schema_.tuple_width();
  Bytes first = store_->read_page(PageId{FileRole::Data, primary});
  uint32_t cur = primary;
  Bytes pg = first;
  for (;;) {
    uint32_t chain = get_u32(pg.data() + 4);
    if (chain == 0) break;
    cur = chain - 1;
    pg = store_->read_page(PageId{FileRole::Data, cur});
    uint16_t count = get_u16(pg.data());
    if (count < capacity_) {
      std::memcpy(pg.data() + kBucketHeader + size_t(count) * width, enc.data(),
                  width);
      put_u16(pg.data(), uint16_t(count + 1));
      store_->write_page(PageId{FileRole::Data, cur}, pg);
      return;
    }
  }
  uint32_t fresh = store_->alloc(FileRole::Data).index;
  Bytes np(store_->page_size(), 0);
  put_u16(np.data(), 1);
  put_u32(np.data() + 4, get_u32(first.data() + 4));
  std::memcpy(np.data() + kBucketHeader, enc.data(), width);
  store_->write_page(PageId{FileRole::Data, fresh}, np);
  put_u32(first.data() + 4, fresh + 1);
  store_->write_page(PageId{FileRole::Data, primary}, first);
}

void GridFile::split_shared_region(
    uint32_t bucket, const BlockRegion& region,
    const std::vector<std::vector<Bytes>>& values) {
  const size_t k = schema_.grid_dims();
  size_t split = 0;
  uint32_t best_span = 0;
  for (size_t d = 0; d < k; ++d) {
    uint32_t span = region.hi[d] - region.lo[d] + 1;
    if (span > best_span) {
      best_span = span;
      split = d;
    }
  }
  uint32_t cut = region.lo[split] + best_span / 2;
  const Bytes& cut_value = values[split][cut - 1];

  BlockRegion upper = region;
  upper.lo[split] = cut;
  ValueBox upper_box = region_value_box(upper, values);

  uint32_t fresh = store_->alloc(FileRole::Data).index;
  std::vector<std::pair<ElementRef, DirectoryElement>> updates;
  directory_.enumerate_region(upper_box, [&](const Directory::Hit& hit) {
    DirectoryElement el = hit.element;
    el.bucket_page = fresh;
    if (hit.lower_bounds[split] &&
        compare_padded(*hit.lower_bounds[split], cut_value) == 0)
      el.set_shared(split, false);
    updates.emplace_back(hit.ref, el);
  });
  directory_.update_elements(std::move(updates));

  BucketContents all = read_bucket(bucket);
  std::vector<Bytes> low, high;
  for (auto& row : all.tuples) {
    if (compare_padded(cut_value, grid_value_of(row, split)) <= 0)
      high.push_back(std::move(row));
    else
      low.push_back(std::move(row));
  }
  store_bucket(bucket, low, all.chain_pages);
  store_bucket(fresh, high, {});
}

bool GridFile::refine_partition(const std::vector<Bytes>& coords,
                                uint32_t bucket,
                                const std::vector<Bytes>& resident_rows) {
  const size_t k = schema_.grid_dims();
  std::vector<std::optional<Bytes>> lower(k), upper(k);
  for (size_t d = 0; d < k; ++d) {
    auto br = partlist_->locate_brackets(d, coords[d]);
    if (br.lower) lower[d] = partlist_->entry(*br.lower).value;
    if (br.upper) upper[d] = partlist_->entry(*br.upper).value;
  }
  auto residents_of = [&](size_t d) {
    std::vector<Bytes> vs;
    vs.reserve(resident_rows.size());
    for (const Bytes& row : resident_rows) vs.push_back(grid_value_of(row, d));
    return vs;
  };

  std::optional<size_t> split;
  Bytes split_value;
  SplitPolicy policy = store_->header().policy;
  if (policy == SplitPolicy::RoundRobin) {
    uint32_t start = store_->header().next_split_dim % k;
    for (size_t i = 0; i < k && !split; ++i) {
      size_t d = (start + i) % k;
      auto v = choose_split_value(lower[d], upper[d], residents_of(d),
                                  schema_.grid_attr(d).width,
                                  partlist_->word_size());
      if (v) {
        split = d;
        split_value = std::move(*v);
        store_->header().next_split_dim = uint32_t((d + 1) % k);
      }
    }
  } else {
    for (size_t d = 0; d < k && !split; ++d) {
      auto v = midpoint_split_value(lower[d], upper[d], residents_of(d),
                                    schema_.grid_attr(d).width,
                                    partlist_->word_size());
      if (v) {
        split = d;
        split_value = std::move(*v);
      }
    }
    for (size_t d = 0; d < k && !split; ++d) {
      auto v = choose_split_value(lower[d], upper[d], residents_of(d),
                                  schema_.grid_attr(d).width,
                                  partlist_->word_size());
      if (v) {
        split = d;
        split_value = std::move(*v);
      }
    }
  }
  if (!split) return false;

  const size_t sd = *split;
  uint32_t p = uint32_t(partlist_->size());
  std::vector<uint32_t> extents(k, 1);
  uint64_t count = 1;
  for (size_t d = 0; d < k; ++d) {
    if (d == sd) continue;
    extents[d] = partlist_->extent_at(d, p);
    count *= extents[d];
  }

  // The slab of blocks whose projection on sd is the split interval; the
  // new piece copies each of their elements, one per cross position.
  ValueBox slab(k);
  for (size_t d = 0; d < k; ++d) {
    if (d == sd) {
      slab[d].lo = lower[d] ? *lower[d] : Bytes(schema_.grid_attr(d).width, 0);
      slab[d].hi = upper[d];
    } else {
      slab[d].lo = Bytes(schema_.grid_attr(d).width, 0);
    }
  }

  uint32_t fresh = store_->alloc(FileRole::Data).index;
  std::vector<DirectoryElement> elems(count,
                                      DirectoryElement{UINT32_MAX, 0});
  directory_.enumerate_region(slab, [&](const Directory::Hit& hit) {
    uint64_t flat = 0;
    for (size_t d = 0; d < k; ++d) {
      if (d == sd) continue;
      uint32_t i = hit.lower_bounds[d]
                       ? partlist_->rank_at(d, *hit.lower_bounds[d], p)
                       : 0;
      flat = flat * extents[d] + i;
    }
    DirectoryElement el = hit.element;
    el.set_shared(sd, true);
    elems[flat] = el;
  });
  uint64_t overflow_flat = 0;
  for (size_t d = 0; d < k; ++d) {
    if (d == sd) continue;
    overflow_flat = overflow_flat * extents[d] + partlist_->rank_at(d, coords[d], p);
  }
  elems[overflow_flat] = DirectoryElement{fresh, 0};
  for (const auto& el : elems)
    if (el.bucket_page == UINT32_MAX)
      throw EngineError("refinement slab did not cover the new piece");

  uint32_t piece_page = directory_.append_piece(uint8_t(sd), p, elems);
  partlist_->append(*store_, uint8_t(sd), split_value, piece_page,
                    schema_.grid_attr(sd).width);

  BucketContents all = read_bucket(bucket);
  std::vector<Bytes> low, high;
  for (auto& row : all.tuples) {
    if (compare_padded(split_value, grid_value_of(row, sd)) <= 0)
      high.push_back(std::move(row));
    else
      low.push_back(std::move(row));
  }
  store_bucket(bucket, low, all.chain_pages);
  store_bucket(fresh, high, {});
  return true;
}

std::vector<Tuple> GridFile::point_query(const std::vector<Value>& grid_values) {
  if (grid_values.size() != schema_.grid_dims())
    throw EngineError("point query arity mismatch");
  std::vector<Bytes> coords(schema_.grid_dims());
  for (size_t d = 0; d < coords.size(); ++d)
    coords[d] = encode_value(schema_.grid_attr(d),
                             coerce_value(schema_.grid_attr(d), grid_values[d]));

  auto hit = directory_.locate_element(coords);
  BucketContents all = read_bucket(hit.element.bucket_page);
  std::vector<Tuple> out;
  for (const Bytes& row : all.tuples) {
    bool match = true;
    for (size_t d = 0; d < coords.size() && match; ++d)
      match = grid_value_of(row, d) == coords[d];
    if (match) out.push_back(decode_tuple(schema_, row.data()));
  }
  return out;
}

void GridFile::scan_region_chunked(const RegionSet& region,
                                   const Predicate& residual,
                                   const ChunkSink& sink) {
  const size_t k = schema_.grid_dims();
  for (const Box& box : region.boxes) {
    if (box.size() != k) throw EngineError("region arity mismatch");
    // Lower brackets of the box per dim, for the shared-bucket test.
    std::vector<std::optional<Bytes>> p1(k);
    for (size_t d = 0; d < k; ++d) {
      auto br = partlist_->locate_brackets(d, box[d].lo);
      if (br.lower) p1[d] = partlist_->entry(*br.lower).value;
    }
    directory_.enumerate_region(box_to_value_box(box), [&](const Directory::Hit& hit) {
      // Fetch a shared bucket only from the region's lowest block of its
      // shared hyperparallelepiped, so it is touched once per box.
      for (size_t d = 0; d < k; ++d)
        if (hit.element.shared(d) && !bounds_equal(hit.lower_bounds[d], p1[d]))
          return;
      BucketContents all = read_bucket(hit.element.bucket_page);
      std::vector<Tuple> chunk;
      for (const Bytes& row : all.tuples) {
        bool inside = true;
        for (size_t d = 0; d < k && inside; ++d)
          inside = box[d].contains(grid_value_of(row, d));
        if (!inside) continue;
        Tuple t = decode_tuple(schema_, row.data());
        if (!residual || residual(t)) chunk.push_back(std::move(t));
      }
      if (!chunk.empty()) sink(std::move(chunk));
    });
  }
}

void GridFile::scan_region(const RegionSet& region, const Predicate& residual,
                           const TupleSink& sink) {
  scan_region_chunked(region, residual, [&](std::vector<Tuple>&& chunk) {
    for (auto& t : chunk) sink(t);
  });
}

std::vector<Tuple> GridFile::scan_region(const RegionSet& region,
                                         const Predicate& residual) {
  std::vector<Tuple> out;
  scan_region(region, residual, [&](const Tuple& t) { out.push_back(t); });
  return out;
}

std::vector<Tuple> GridFile::full_scan() {
  RegionSet all;
  all.boxes.push_back(full_box(schema_));
  return scan_region(all);
}

size_t GridFile::delete_where(const RegionSet& region, const Predicate& residual) {
  const size_t k = schema_.grid_dims();
  size_t removed = 0;
  for (const Box& box : region.boxes) {
    std::vector<std::optional<Bytes>> p1(k);
    for (size_t d = 0; d < k; ++d) {
      auto br = partlist_->locate_brackets(d, box[d].lo);
      if (br.lower) p1[d] = partlist_->entry(*br.lower).value;
    }
    struct Item {
      ElementRef ref;
      std::vector<std::optional<Bytes>> bounds;
    };
    std::vector<Item> items;
    directory_.enumerate_region(box_to_value_box(box), [&](const Directory::Hit& hit) {
      for (size_t d = 0; d < k; ++d)
        if (hit.element.shared(d) && !bounds_equal(hit.lower_bounds[d], p1[d]))
          return;
      items.push_back(Item{hit.ref, hit.lower_bounds});
    });

    for (const Item& item : items) {
      // Merges during this loop may have redirected the element.
      uint32_t bucket = directory_.read_element(item.ref).bucket_page;
      BucketContents all = read_bucket(bucket);
      std::vector<Bytes> keep;
      size_t dropped = 0;
      for (auto& row : all.tuples) {
        bool inside = true;
        for (size_t d = 0; d < k && inside; ++d)
          inside = box[d].contains(grid_value_of(row, d));
        if (inside && (!residual || residual(decode_tuple(schema_, row.data())))) {
          ++dropped;
        } else {
          keep.push_back(std::move(row));
        }
      }
      if (dropped == 0) continue;
      store_bucket(bucket, keep, all.chain_pages);
      removed += dropped;
      store_->header().tuple_count -= dropped;
      if (keep.empty()) try_merge_empty(bucket);
    }
  }
  if (removed > 0) merge_sweep();
  return removed;
}

// Merges an empty bucket's region into one adjacent bucket region when the
// union is itself a hyperparallelepiped. Returns true when a merge happened.
bool GridFile::try_merge_empty(uint32_t bucket) {
  const size_t k = schema_.grid_dims();
  std::vector<std::vector<Bytes>> values(k);
  std::vector<uint32_t> extents(k);
  for (size_t d = 0; d < k; ++d) {
    values[d] = sorted_values(d);
    extents[d] = uint32_t(values[d].size() + 1);
  }
  // Find one block of this bucket by scanning the whole directory.
  std::optional<std::vector<uint32_t>> start;
  ValueBox whole(k);
  for (size_t d = 0; d < k; ++d)
    whole[d].lo = Bytes(schema_.grid_attr(d).width, 0);
  directory_.enumerate_region(whole, [&](const Directory::Hit& hit) {
    if (start || hit.element.bucket_page != bucket) return;
    std::vector<uint32_t> idx(k);
    for (size_t d = 0; d < k; ++d)
      idx[d] = hit.lower_bounds[d]
                   ? partlist_->rank_at(d, *hit.lower_bounds[d],
                                        uint32_t(partlist_->size()))
                   : 0;
    start = idx;
  });
  if (!start) return false;

  BlockRegion mine = region_of(*start, values, extents);
  std::optional<BlockRegion> merged;
  uint32_t neighbor_bucket = 0;
  for (size_t d = 0; d < k && !merged; ++d) {
    for (int side = 0; side < 2 && !merged; ++side) {
      std::vector<uint32_t> probe = mine.lo;
      if (side == 0) {
        if (mine.lo[d] == 0) continue;
        probe[d] = mine.lo[d] - 1;
      } else {
        if (mine.hi[d] + 1 >= extents[d]) continue;
        probe[d] = mine.hi[d] + 1;
      }
      DirectoryElement el =
          directory_.locate_element(block_rep_coords(probe, values)).element;
      if (el.bucket_page == bucket) continue;
      BlockRegion theirs = region_of(probe, values, extents);
      bool box_union = true;
      for (size_t j = 0; j < k; ++j) {
        if (j == d) continue;
        if (theirs.lo[j] != mine.lo[j] || theirs.hi[j] != mine.hi[j])
          box_union = false;
      }
      if (side == 0 && theirs.hi[d] + 1 != mine.lo[d]) box_union = false;
      if (side == 1 && mine.hi[d] + 1 != theirs.lo[d]) box_union = false;
      if (!box_union) continue;
      BlockRegion u = mine;
      u.lo[d] = std::min(mine.lo[d], theirs.lo[d]);
      u.hi[d] = std::max(mine.hi[d], theirs.hi[d]);
      merged = u;
      neighbor_bucket = el.bucket_page;
    }
  }
  if (!merged) return false;

  ValueBox union_box = region_value_box(*merged, values);
  std::vector<std::optional<Bytes>> union_lo(k);
  for (size_t d = 0; d < k; ++d)
    if (!all_zero(union_box[d].lo)) union_lo[d] = union_box[d].lo;
  std::vector<std::pair<ElementRef, DirectoryElement>> updates;
  directory_.enumerate_region(union_box, [&](const Directory::Hit& hit) {
    DirectoryElement el = hit.element;
    el.bucket_page = neighbor_bucket;
    for (size_t d = 0; d < k; ++d)
      el.set_shared(d, !bounds_equal(hit.lower_bounds[d], union_lo[d]));
    updates.emplace_back(hit.ref, el);
  });
  directory_.update_elements(std::move(updates));
  store_->free_data_page(bucket);
  return true;
}

// Fixpoint pass after a delete: keep merging any empty bucket that has a
// box-compatible neighbor, since one merge can unlock another. Pairwise
// merging can wedge on tilings where no two boxes union to a box; once the
// relation is completely empty the whole space is a single region, so the
// directory collapses to one bucket outright.
void GridFile::merge_sweep() {
  const size_t k = schema_.grid_dims();
  ValueBox whole(k);
  for (size_t d = 0; d < k; ++d)
    whole[d].lo = Bytes(schema_.grid_attr(d).width, 0);
  for (;;) {
    std::set<uint32_t> buckets;
    directory_.enumerate_region(whole, [&](const Directory::Hit& hit) {
      buckets.insert(hit.element.bucket_page);
    });
    if (buckets.size() <= 1) return;
    bool merged = false;
    for (uint32_t b : buckets) {
      Bytes pg = store_->read_page(PageId{FileRole::Data, b});
      if (get_u16(pg.data()) != 0) continue;
      if (try_merge_empty(b)) {
        merged = true;
        break;
      }
    }
    if (merged) continue;

    if (store_->header().tuple_count == 0) {
      uint32_t survivor = *buckets.begin();
      std::vector<std::pair<ElementRef, DirectoryElement>> updates;
      directory_.enumerate_region(whole, [&](const Directory::Hit& hit) {
        DirectoryElement el = hit.element;
        el.bucket_page = survivor;
        for (size_t d = 0; d < k; ++d)
          el.set_shared(d, hit.lower_bounds[d].has_value());
        updates.emplace_back(hit.ref, el);
      });
      directory_.update_elements(std::move(updates));
      for (uint32_t b : buckets)
        if (b != survivor) store_->free_data_page(b);
    }
    return;
  }
}

void GridFile::ordered_scan(size_t grid_dim, const RegionSet& region,
                            bool descending, const TupleSink& sink,
                            const Predicate& residual) {
  if (grid_dim >= schema_.grid_dims())
    throw EngineError("ordered_scan dim out of range");
  const AttrDef& attr = schema_.grid_attr(grid_dim);
  std::vector<Bytes> values = sorted_values(grid_dim);
  size_t slabs = values.size() + 1;

  for (size_t step = 0; step < slabs; ++step) {
    size_t i = descending ? slabs - 1 - step : step;
    Interval slab;
    slab.lo = i == 0 ? Bytes(attr.width, 0) : values[i - 1];
    if (i < values.size()) slab.hi = values[i];

    RegionSet restricted;
    for (const Box& b : region.boxes) {
      Interval lo_hi = b[grid_dim];
      Box nb = b;
      Interval merged;
      merged.lo = compare_padded(lo_hi.lo, slab.lo) >= 0 ? lo_hi.lo : slab.lo;
      if (lo_hi.hi && slab.hi)
        merged.hi = compare_padded(*lo_hi.hi, *slab.hi) <= 0 ? lo_hi.hi : slab.hi;
      else
        merged.hi = lo_hi.hi ? lo_hi.hi : slab.hi;
      if (merged.hi && compare_padded(merged.lo, *merged.hi) >= 0) continue;
      nb[grid_dim] = merged;
      restricted.boxes.push_back(std::move(nb));
    }
    if (restricted.boxes.empty()) continue;

    std::vector<Tuple> rows = scan_region(restricted, residual);
    uint32_t attr_idx = schema_.grid_attrs[grid_dim];
    std::sort(rows.begin(), rows.end(), [&](const Tuple& a, const Tuple& b) {
      Bytes ka = encode_value(attr, a[attr_idx]);
      Bytes kb = encode_value(attr, b[attr_idx]);
      int c = compare_padded(ka, kb);
      return descending ? c > 0 : c < 0;
    });
    for (const Tuple& t : rows) sink(t);
  }
}

GridStats GridFile::grid_stats() {
  GridStats s;
  s.tuple_count = store_->header().tuple_count;
  const size_t k = schema_.grid_dims();
  for (size_t d = 0; d < k; ++d)
    s.partitions.push_back(partlist_->extent_at(d, uint32_t(partlist_->size())));

  ValueBox whole(k);
  for (size_t d = 0; d < k; ++d)
    whole[d].lo = Bytes(schema_.grid_attr(d).width, 0);
  std::set<uint32_t> buckets;
  uint64_t elements = 0;
  directory_.enumerate_region(whole, [&](const Directory::Hit& hit) {
    ++elements;
    buckets.insert(hit.element.bucket_page);
  });
  s.directory_elements = elements;
  s.bucket_count = buckets.size();
  for (uint32_t b : buckets) {
    BucketContents c = read_bucket(b);
    s.overflow_pages += c.chain_pages.size();
  }
  uint64_t pages = s.bucket_count + s.overflow_pages;
  s.occupancy = pages == 0 ? 0.0
                           : double(s.tuple_count) / (double(pages) * capacity_);
  s.redundancy = s.bucket_count == 0
                     ? 1.0
                     : double(s.directory_elements) / double(s.bucket_count);
  return s;
}

}  // namespace gridrel
