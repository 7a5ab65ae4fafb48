#include "gridrel/directory.hpp"

#include <algorithm>
#include <cstring>

namespace gridrel {

namespace {

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
void put_u16(uint8_t* p, uint16_t v) {
  p[0] = uint8_t(v);
  p[1] = uint8_t(v >> 8);
}
uint16_t get_u16(const uint8_t* p) {
  return uint16_t(p[0]) | (uint16_t(p[1]) << 8);
}

// Piece-table page: u32 next-page+1, u16 entry count, 2 pad bytes, then
// 6-byte entries (u32 page, u16 offset). Table pages are updated in place;
// piece pages are written once and then touched only by element updates.
constexpr size_t kTableHeader = 8;
constexpr size_t kTableEntry = 6;

}  // namespace

void Directory::init_root(uint32_t bucket_page) {
  if (initialized()) throw EngineError("directory already initialized");
  if (store_->page_count(FileRole::Directory) != 0)
    throw EngineError("directory file not empty");
  PageId table = store_->alloc(FileRole::Directory);
  PageId root = store_->alloc(FileRole::Directory);

  size_t ew = element_width();
  Bytes page(store_->page_size(), 0);
  DirectoryElement el{bucket_page, 0};
  put_u32(page.data(), el.bucket_page);
  store_->write_page(root, page);

  PieceInfo info;
  info.created_at = -1;
  info.split_dim = -1;
  info.start_page = root.index;
  info.start_offset = 0;
  info.extents.assign(dims_, 1);
  info.element_count = 1;
  pieces_.push_back(std::move(info));
  tail_page_ = root.index;
  tail_offset_ = uint32_t(ew);
  table_tail_page_ = table.index;
  append_table_entry(root.index, 0);
}

void Directory::append_table_entry(uint32_t page, uint32_t offset) {
  uint32_t ps = store_->page_size();
  size_t capacity = (ps - kTableHeader) / kTableEntry;
  Bytes tp = store_->read_page(PageId{FileRole::Directory, table_tail_page_});
  uint16_t count = get_u16(tp.data() + 4);
  if (count == capacity) {
    PageId next = store_->alloc(FileRole::Directory);
    put_u32(tp.data(), next.index + 1);
    store_->write_page(PageId{FileRole::Directory, table_tail_page_}, tp);
    table_tail_page_ = next.index;
    tp = store_->read_page(next);
    count = 0;
  }
  uint8_t* slot = tp.data() + kTableHeader + size_t(count) * kTableEntry;
  put_u32(slot, page);
  put_u16(slot + 4, uint16_t(offset));
  put_u16(tp.data() + 4, uint16_t(count + 1));
  store_->write_page(PageId{FileRole::Directory, table_tail_page_}, tp);
}

PieceInfo Directory::make_piece_info(uint32_t ordinal) const {
  PieceInfo info;
  info.extents.assign(dims_, 1);
  if (ordinal == 0) {
    info.element_count = 1;
    return info;
  }
  uint32_t pos = ordinal - 1;
  const PartEntry& e = partlist_->entry(pos);
  info.created_at = int32_t(pos);
  info.split_dim = e.dim;
  info.element_count = 1;
  for (size_t d = 0; d < dims_; ++d) {
    if (d == e.dim) continue;
    info.extents[d] = partlist_->extent_at(d, pos);
    info.element_count *= info.extents[d];
  }
  return info;
}

void Directory::set_tail_after(const PieceInfo& info) {
  uint32_t ps = store_->page_size();
  size_t ew = element_width();
  uint64_t bytes = info.element_count * ew;
  if (info.start_offset + bytes <= ps) {
    tail_page_ = info.start_page;
    tail_offset_ = info.start_offset + uint32_t(bytes);
    return;
  }
  uint64_t per_page = ps / ew;
  uint64_t pages = (info.element_count + per_page - 1) / per_page;
  uint64_t last_count = info.element_count - (pages - 1) * per_page;
  tail_page_ = info.start_page + uint32_t(pages - 1);
  tail_offset_ = uint32_t(last_count * ew);
}

void Directory::load() {
  pieces_.clear();
  if (store_->page_count(FileRole::Directory) == 0) return;

  std::vector<std::pair<uint32_t, uint32_t>> table;
  uint32_t pg = 0;
  for (;;) {
    Bytes tp = store_->read_page(PageId{FileRole::Directory, pg});
    uint32_t next = get_u32(tp.data());
    uint16_t count = get_u16(tp.data() + 4);
    for (uint16_t i = 0; i < count; ++i) {
      const uint8_t* slot = tp.data() + kTableHeader + size_t(i) * kTableEntry;
      table.emplace_back(get_u32(slot), get_u16(slot + 4));
    }
    table_tail_page_ = pg;
    if (next == 0) break;
    pg = next - 1;
  }
  if (table.size() != partlist_->size() + 1)
    throw EngineError("piece table does not match scales");

  pieces_.reserve(table.size());
  for (uint32_t ord = 0; ord < table.size(); ++ord) {
    PieceInfo info = make_piece_info(ord);
    info.start_page = table[ord].first;
    info.start_offset = table[ord].second;
    if (ord > 0 && partlist_->entry(ord - 1).piece_page != info.start_page)
      throw EngineError("scales record disagrees with piece table");
    pieces_.push_back(std::move(info));
  }
  set_tail_after(pieces_.back());
}

uint32_t Directory::append_piece(uint8_t split_dim, uint32_t created_at,
                                 const std::vector<DirectoryElement>& elements) {
  if (!initialized()) throw EngineError("directory not initialized");
  if (split_dim >= dims_) throw EngineError("split dim out of range");
  if (created_at + 1 != pieces_.size())
    throw EngineError("pieces must be appended in refinement order");

  PieceInfo info;
  info.created_at = int32_t(created_at);
  info.split_dim = split_dim;
  info.extents.assign(dims_, 1);
  info.element_count = 1;
  for (size_t d = 0; d < dims_; ++d) {
    if (d == split_dim) continue;
    info.extents[d] = partlist_->extent_at(d, created_at);
    info.element_count *= info.extents[d];
  }
  if (elements.size() != info.element_count)
    throw EngineError("piece size mismatch: expected " +
                      std::to_string(info.element_count));

  uint32_t ps = store_->page_size();
  size_t ew = element_width();
  uint64_t bytes = info.element_count * ew;

  auto encode_into = [&](uint8_t* dst, const DirectoryElement& el) {
    put_u32(dst, el.bucket_page);
    size_t fb = (dims_ + 7) / 8;
    for (size_t b = 0; b < fb; ++b)
      dst[4 + b] = uint8_t(el.shared_mask >> (8 * b));
  };

  if (tail_offset_ > 0 && tail_offset_ + bytes <= ps) {
    // Pack after the previous piece; its bytes are left untouched.
    PageId id{FileRole::Directory, tail_page_};
    Bytes page = store_->read_page(id);
    for (size_t i = 0; i < elements.size(); ++i)
      encode_into(page.data() + tail_offset_ + i * ew, elements[i]);
    store_->write_page(id, page);
    info.start_page = tail_page_;
    info.start_offset = tail_offset_;
    tail_offset_ += uint32_t(bytes);
  } else if (bytes <= ps) {
    PageId id = store_->alloc(FileRole::Directory);
    Bytes page(ps, 0);
    for (size_t i = 0; i < elements.size(); ++i)
      encode_into(page.data() + i * ew, elements[i]);
    store_->write_page(id, page);
    info.start_page = id.index;
    info.start_offset = 0;
    tail_page_ = id.index;
    tail_offset_ = uint32_t(bytes);
  } else {
    // Spanning piece: contiguous pages, whole elements per page.
    uint64_t per_page = ps / ew;
    uint64_t pages = (info.element_count + per_page - 1) / per_page;
    uint32_t first = 0;
    for (uint64_t pgi = 0; pgi < pages; ++pgi) {
      PageId id = store_->alloc(FileRole::Directory);
      if (pgi == 0)
        first = id.index;
      else if (id.index != first + pgi)
        throw EngineError("directory pages not contiguous");
      Bytes page(ps, 0);
      uint64_t begin = pgi * per_page;
      uint64_t end = std::min<uint64_t>(begin + per_page, info.element_count);
      for (uint64_t i = begin; i < end; ++i)
        encode_into(page.data() + (i - begin) * ew, elements[i]);
      store_->write_page(id, page);
      if (pgi + 1 == pages) {
        tail_page_ = id.index;
        tail_offset_ = uint32_t((end - begin) * ew);
      }
    }
    info.start_page = first;
    info.start_offset = 0;
  }

  append_table_entry(info.start_page, info.start_offset);
  uint32_t start = info.start_page;
  pieces_.push_back(std::move(info));
  return start;
}

std::pair<uint32_t, uint32_t> Directory::element_addr(ElementRef ref) const {
  const PieceInfo& info = pieces_[ref.piece];
  uint32_t ps = store_->page_size();
  size_t ew = element_width();
  uint64_t bytes = info.element_count * ew;
  if (info.start_offset + bytes <= ps)
    return {info.start_page, info.start_offset + uint32_t(ref.index * ew)};
  uint64_t per_page = ps / ew;
  return {info.start_page + uint32_t(ref.index / per_page),
          uint32_t((ref.index % per_page) * ew)};
}

DirectoryElement Directory::read_element(ElementRef ref) {
  if (ref.piece >= pieces_.size() ||
      ref.index >= pieces_[ref.piece].element_count)
    throw EngineError("directory element out of range");
  auto [pg, off] = element_addr(ref);
  Bytes page = store_->read_page(PageId{FileRole::Directory, pg});
  DirectoryElement el;
  el.bucket_page = get_u32(page.data() + off);
  size_t fb = (dims_ + 7) / 8;
  for (size_t b = 0; b < fb; ++b)
    el.shared_mask |= uint64_t(page[off + 4 + b]) << (8 * b);
  return el;
}

void Directory::update_element(ElementRef ref, const DirectoryElement& el) {
  update_elements({{ref, el}});
}

void Directory::update_elements(
    std::vector<std::pair<ElementRef, DirectoryElement>> updates) {
  for (const auto& [ref, el] : updates)
    if (ref.piece >= pieces_.size() ||
        ref.index >= pieces_[ref.piece].element_count)
      throw EngineError("directory element out of range");
  std::sort(updates.begin(), updates.end(), [this](const auto& a, const auto& b) {
    return element_addr(a.first) < element_addr(b.first);
  });
  size_t fb = (dims_ + 7) / 8;
  size_t i = 0;
  while (i < updates.size()) {
    auto [pg, off0] = element_addr(updates[i].first);
    PageId id{FileRole::Directory, pg};
    Bytes page = store_->read_page(id);
    while (i < updates.size()) {
      auto [pg2, off] = element_addr(updates[i].first);
      if (pg2 != pg) break;
      const DirectoryElement& el = updates[i].second;
      put_u32(page.data() + off, el.bucket_page);
      for (size_t b = 0; b < fb; ++b)
        page[off + 4 + b] = uint8_t(el.shared_mask >> (8 * b));
      ++i;
    }
    store_->write_page(id, page);
  }
}

Directory::Hit Directory::locate_element(const std::vector<Bytes>& coords) {
  if (!initialized()) throw EngineError("directory not initialized");
  if (coords.size() != dims_) throw EngineError("coordinate arity mismatch");

  std::vector<std::optional<uint32_t>> lower(dims_);
  int64_t latest = -1;
  for (size_t d = 0; d < dims_; ++d) {
    lower[d] = partlist_->locate_brackets(d, coords[d]).lower;
    if (lower[d] && int64_t(*lower[d]) > latest) latest = *lower[d];
  }

  Hit hit;
  hit.lower_bounds.resize(dims_);
  for (size_t d = 0; d < dims_; ++d)
    if (lower[d]) hit.lower_bounds[d] = partlist_->entry(*lower[d]).value;

  if (latest < 0) {
    hit.ref = ElementRef{0, 0};
    hit.element = read_element(hit.ref);
    return hit;
  }

  uint32_t m = uint32_t(latest);
  const PartEntry& e = partlist_->entry(m);
  const PieceInfo& info = pieces_[m + 1];
  uint64_t flat = 0;
  for (size_t d = 0; d < dims_; ++d) {
    if (d == size_t(e.dim)) continue;
    flat = flat * info.extents[d] + partlist_->rank_at(d, coords[d], m);
  }
  hit.ref = ElementRef{m + 1, flat};
  hit.element = read_element(hit.ref);
  return hit;
}

uint64_t Directory::total_elements() const {
  uint64_t n = 0;
  for (const auto& p : pieces_) n += p.element_count;
  return n;
}

std::vector<std::pair<uint32_t, uint32_t>> Directory::piece_table() const {
  std::vector<std::pair<uint32_t, uint32_t>> out;
  out.reserve(pieces_.size());
  for (const auto& p : pieces_) out.emplace_back(p.start_page, p.start_offset);
  return out;
}

void Directory::enumerate_region(const ValueBox& box,
                                 const std::function<void(const Hit&)>& fn) {
  if (!initialized()) return;
  if (box.size() != dims_) throw EngineError("box arity mismatch");
  const size_t k = dims_;

  // Current brackets of the region's lower corner, shared by all pieces.
  std::vector<std::optional<uint32_t>> lo_pos(k);
  std::vector<const Bytes*> lo_val(k, nullptr);
  for (size_t d = 0; d < k; ++d) {
    auto br = partlist_->locate_brackets(d, box[d].lo);
    lo_pos[d] = br.lower;
    if (br.lower) lo_val[d] = &partlist_->entry(*br.lower).value;
  }

  // Entry positions per dim filtered by the fixed box bounds, ascending, so
  // per-piece historical ranks become binary searches.
  std::vector<std::vector<uint32_t>> le_lo(k), lt_hi(k);
  for (uint32_t pos = 0; pos < partlist_->size(); ++pos) {
    const PartEntry& e = partlist_->entry(pos);
    size_t d = e.dim;
    if (lo_val[d] && compare_padded(e.value, *lo_val[d]) <= 0)
      le_lo[d].push_back(pos);
    if (box[d].hi && compare_padded(e.value, *box[d].hi) < 0)
      lt_hi[d].push_back(pos);
  }
  auto count_before = [](const std::vector<uint32_t>& v, uint32_t m) {
    return uint32_t(std::lower_bound(v.begin(), v.end(), m) - v.begin());
  };
  std::vector<std::vector<std::pair<const Bytes*, uint32_t>>> by_value(k);
  for (size_t d = 0; d < k; ++d)
    by_value[d] = partlist_->values_before(d, uint32_t(partlist_->size()));

  bool root_admitted = true;
  for (size_t d = 0; d < k; ++d)
    if (lo_pos[d]) root_admitted = false;
  if (root_admitted) {
    Hit hit;
    hit.ref = ElementRef{0, 0};
    hit.element = read_element(hit.ref);
    hit.lower_bounds.assign(k, std::nullopt);
    fn(hit);
  }

  size_t fb = (k + 7) / 8;
  for (uint32_t m = 0; m < partlist_->size(); ++m) {
    const PartEntry& e = partlist_->entry(m);
    size_t d = e.dim;
    // The piece's blocks start at e.value along its own dim.
    if (lo_val[d] && compare_padded(e.value, *lo_val[d]) < 0) continue;
    if (box[d].hi && compare_padded(e.value, *box[d].hi) >= 0) continue;

    const PieceInfo& info = pieces_[m + 1];
    std::vector<size_t> odims;
    std::vector<uint32_t> lo_idx, hi_idx;
    bool empty = false;
    for (size_t d2 = 0; d2 < k && !empty; ++d2) {
      if (d2 == d) continue;
      uint32_t lo = 0;
      if (lo_pos[d2]) {
        lo = count_before(le_lo[d2], m);
        if (*lo_pos[d2] >= m) ++lo;  // bracket not yet on the scale at m
      }
      uint32_t hi = box[d2].hi ? count_before(lt_hi[d2], m)
                               : info.extents[d2] - 1;
      if (lo > hi) {
        empty = true;
        break;
      }
      odims.push_back(d2);
      lo_idx.push_back(lo);
      hi_idx.push_back(hi);
    }
    if (empty) continue;

    // Lower-bound values per other dim, in value order at moment m.
    std::vector<std::vector<std::pair<const Bytes*, uint32_t>>> vals(k);
    for (size_t d2 : odims) {
      vals[d2].reserve(info.extents[d2]);
      for (const auto& vp : by_value[d2])
        if (vp.second < m) vals[d2].push_back(vp);
    }

    std::vector<uint32_t> idx = lo_idx;
    uint32_t cur_page = UINT32_MAX;
    Bytes page;
    bool done = false;
    while (!done) {
      uint64_t flat = 0;
      for (size_t i = 0; i < odims.size(); ++i)
        flat = flat * info.extents[odims[i]] + idx[i];

      Hit hit;
      hit.ref = ElementRef{m + 1, flat};
      auto [pg, off] = element_addr(hit.ref);
      if (pg != cur_page) {
        page = store_->read_page(PageId{FileRole::Directory, pg});
        cur_page = pg;
      }
      hit.element.bucket_page = get_u32(page.data() + off);
      hit.element.shared_mask = 0;
      for (size_t b = 0; b < fb; ++b)
        hit.element.shared_mask |= uint64_t(page[off + 4 + b]) << (8 * b);
      hit.lower_bounds.resize(k);
      hit.lower_bounds[d] = e.value;
      for (size_t i = 0; i < odims.size(); ++i) {
        size_t d2 = odims[i];
        if (idx[i] > 0) hit.lower_bounds[d2] = *vals[d2][idx[i] - 1].first;
      }
      fn(hit);

      // Odometer with the last dim fastest, so flat indices increase and
      // each piece page is read at most once.
      done = true;
      for (size_t level = odims.size(); level-- > 0;) {
        if (idx[level] < hi_idx[level]) {
          ++idx[level];
          for (size_t j = level + 1; j < odims.size(); ++j) idx[j] = lo_idx[j];
          done = false;
          break;
        }
      }
    }
  }
}

}  // namespace gridrel
