#include "gridrel/partlist.hpp"

#include <algorithm>
#include <cstring>
#include <map>

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

constexpr size_t kPageHeader = 4;  // u16 used payload bytes, u16 record count

}  // namespace

void Partlist::load(PageStore& store) {
  entries_.clear();
  word_size_ = store.header().word_size;
  dims_ = store.header().grid_dims;
  uint32_t pages = store.page_count(FileRole::Scales);
  tail_page_ = 0;
  tail_used_ = 0;
  tail_records_ = 0;
  tail_content_.assign(store.page_size(), 0);
  for (uint32_t pg = 0; pg < pages; ++pg) {
    Bytes page = store.read_page(PageId{FileRole::Scales, pg});
    uint16_t used = get_u16(page.data());
    uint16_t count = get_u16(page.data() + 2);
    size_t off = kPageHeader;
    for (uint16_t i = 0; i < count; ++i) {
      PartEntry e;
      e.dim = page[off];
      uint8_t words = page[off + 1];
      e.piece_page = get_u32(page.data() + off + 2);
      size_t vlen = size_t(words) * word_size_;
      e.value.assign(page.begin() + off + 6, page.begin() + off + 6 + vlen);
      off += 6 + vlen;
      entries_.push_back(std::move(e));
    }
    if (off - kPageHeader != used)
      throw EngineError("corrupt scales page " + std::to_string(pg));
    if (pg + 1 == pages) {
      tail_page_ = pg;
      tail_used_ = used;
      tail_records_ = count;
      tail_content_ = std::move(page);
    }
  }
}

void Partlist::check_record_fits(uint32_t page_size, size_t record_size) const {
  if (record_size > page_size - kPageHeader)
    throw EngineError("scale record larger than a page");
}

uint32_t Partlist::append(PageStore& store, uint8_t dim, const Bytes& value,
                          uint32_t piece_page, uint32_t attr_width) {
  if (dim >= dims_) throw EngineError("scale dim out of range");
  if (value.empty() || value.size() % word_size_ != 0)
    throw EngineError("coded value must be a positive number of words");
  size_t max_words = (attr_width + word_size_ - 1) / word_size_;
  if (value.size() > max_words * word_size_)
    throw EngineError("coded value longer than attribute width");
  if (compare_padded(value, Bytes{}) <= 0)
    throw EngineError("split value at domain minimum");
  if (compare_padded(value, Bytes(attr_width, 0xFF)) >= 0)
    throw EngineError("split value at domain maximum");
  for (const auto& e : entries_)
    if (e.dim == dim && compare_padded(e.value, value) == 0)
      throw EngineError("duplicate split value in dim " + std::to_string(dim));

  size_t rec = 6 + value.size();
  check_record_fits(store.page_size(), rec);
  if (store.page_count(FileRole::Scales) == 0 ||
      tail_used_ + rec > store.page_size() - kPageHeader) {
    PageId id = store.alloc(FileRole::Scales);
    tail_page_ = id.index;
    tail_used_ = 0;
    tail_records_ = 0;
    tail_content_.assign(store.page_size(), 0);
  }
  size_t off = kPageHeader + tail_used_;
  tail_content_[off] = dim;
  tail_content_[off + 1] = uint8_t(value.size() / word_size_);
  put_u32(tail_content_.data() + off + 2, piece_page);
  std::memcpy(tail_content_.data() + off + 6, value.data(), value.size());
  tail_used_ += uint32_t(rec);
  ++tail_records_;
  put_u16(tail_content_.data(), uint16_t(tail_used_));
  put_u16(tail_content_.data() + 2, tail_records_);
  store.write_page(PageId{FileRole::Scales, tail_page_}, tail_content_);

  entries_.push_back(PartEntry{dim, value, piece_page});
  return uint32_t(entries_.size() - 1);
}

Partlist::BracketPair Partlist::locate_brackets(size_t dim,
                                                const Bytes& v) const {
  BracketPair out;
  for (uint32_t pos = 0; pos < entries_.size(); ++pos) {
    const PartEntry& e = entries_[pos];
    if (e.dim != dim) continue;
    if (compare_padded(e.value, v) <= 0) {
      if (!out.lower ||
          compare_padded(e.value, entries_[*out.lower].value) > 0)
        out.lower = pos;
    } else {
      if (!out.upper ||
          compare_padded(e.value, entries_[*out.upper].value) < 0)
        out.upper = pos;
    }
  }
  return out;
}

uint32_t Partlist::rank_at(size_t dim, const Bytes& v, uint32_t cutoff) const {
  uint32_t n = 0;
  for (uint32_t pos = 0; pos < cutoff && pos < entries_.size(); ++pos) {
    const PartEntry& e = entries_[pos];
    if (e.dim == dim && compare_padded(e.value, v) <= 0) ++n;
  }
  return n;
}

uint32_t Partlist::rank_lt(size_t dim, const Bytes& v, uint32_t cutoff) const {
  uint32_t n = 0;
  for (uint32_t pos = 0; pos < cutoff && pos < entries_.size(); ++pos) {
    const PartEntry& e = entries_[pos];
    if (e.dim == dim && compare_padded(e.value, v) < 0) ++n;
  }
  return n;
}

uint32_t Partlist::extent_at(size_t dim, uint32_t cutoff) const {
  uint32_t n = 1;
  for (uint32_t pos = 0; pos < cutoff && pos < entries_.size(); ++pos)
    if (entries_[pos].dim == dim) ++n;
  return n;
}

std::vector<std::pair<const Bytes*, uint32_t>> Partlist::values_before(
    size_t dim, uint32_t cutoff) const {
  std::vector<std::pair<const Bytes*, uint32_t>> out;
  for (uint32_t pos = 0; pos < cutoff && pos < entries_.size(); ++pos)
    if (entries_[pos].dim == dim) out.emplace_back(&entries_[pos].value, pos);
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    return compare_padded(*a.first, *b.first) < 0;
  });
  return out;
}

namespace {

size_t words_of(const std::optional<Bytes>& b, uint8_t w) {
  return b ? b->size() / w : 1;
}

bool strictly_between(const Bytes& v, const std::optional<Bytes>& lower,
                      const std::optional<Bytes>& upper, uint32_t width) {
  if (lower ? compare_padded(v, *lower) <= 0 : compare_padded(v, Bytes{}) <= 0)
    return false;
  if (upper ? compare_padded(v, *upper) >= 0
            : compare_padded(v, Bytes(width, 0xFF)) >= 0)
    return false;
  return true;
}

std::vector<bool> split_sides(const Bytes& v, const std::vector<Bytes>& rs) {
  std::vector<bool> below(rs.size());
  for (size_t i = 0; i < rs.size(); ++i)
    below[i] = compare_padded(rs[i], v) < 0;
  return below;
}

bool separates(const std::vector<bool>& below) {
  bool any_lo = false, any_hi = false;
  for (bool b : below) (b ? any_lo : any_hi) = true;
  return any_lo && any_hi;
}

// Drops trailing words while the value stays strictly between the bounds and
// the residents fall on the same sides.
Bytes trim_words(Bytes v, const std::optional<Bytes>& lower,
                 const std::optional<Bytes>& upper,
                 const std::vector<Bytes>& residents, uint32_t width,
                 uint8_t word) {
  std::vector<bool> sides = split_sides(v, residents);
  while (v.size() > word) {
    Bytes shorter(v.begin(), v.end() - word);
    if (!strictly_between(shorter, lower, upper, width)) break;
    if (split_sides(shorter, residents) != sides) break;
    v = std::move(shorter);
  }
  return v;
}

Bytes bound_repr(const std::optional<Bytes>& b, bool is_upper, size_t len,
                 uint32_t width) {
  Bytes out(len, 0);
  if (b) {
    std::memcpy(out.data(), b->data(), std::min(b->size(), len));
  } else if (is_upper) {
    std::fill(out.begin(), out.begin() + std::min<size_t>(len, width), 0xFF);
  }
  return out;
}

std::optional<Bytes> midpoint_at(size_t len, const std::optional<Bytes>& lower,
                                 const std::optional<Bytes>& upper,
                                 const std::vector<Bytes>& residents,
                                 uint32_t width) {
  Bytes a = bound_repr(lower, false, len, width);
  Bytes b = bound_repr(upper, true, len, width);
  Bytes m(len);
  for (size_t i = 0; i < len; ++i) m[i] = uint8_t((a[i] + b[i]) / 2);
  if (!strictly_between(m, lower, upper, width)) return std::nullopt;
  if (!separates(split_sides(m, residents))) return std::nullopt;
  return m;
}

}  // namespace

std::optional<Bytes> midpoint_split_value(const std::optional<Bytes>& lower,
                                          const std::optional<Bytes>& upper,
                                          const std::vector<Bytes>& residents,
                                          uint32_t attr_width,
                                          uint8_t word_size) {
  size_t len =
      std::max(words_of(lower, word_size), words_of(upper, word_size)) *
      word_size;
  auto m = midpoint_at(len, lower, upper, residents, attr_width);
  if (!m) return std::nullopt;
  return trim_words(*m, lower, upper, residents, attr_width, word_size);
}

std::optional<Bytes> choose_split_value(const std::optional<Bytes>& lower,
                                        const std::optional<Bytes>& upper,
                                        const std::vector<Bytes>& residents,
                                        uint32_t attr_width,
                                        uint8_t word_size) {
  if (residents.size() < 2) return std::nullopt;
  size_t start_words =
      std::max(words_of(lower, word_size), words_of(upper, word_size));
  size_t max_words = (attr_width + word_size - 1) / word_size;
  for (size_t w = start_words; w <= max_words; ++w) {
    size_t len = w * word_size;
    if (auto m = midpoint_at(len, lower, upper, residents, attr_width))
      return trim_words(*m, lower, upper, residents, attr_width, word_size);

    // Candidate split points are the residents' distinct coded prefixes;
    // any prefix except the least separates. Pick the most balanced one.
    std::map<Bytes, uint32_t> prefix_count;
    for (const Bytes& r : residents) {
      Bytes p(len, 0);
      std::memcpy(p.data(), r.data(), std::min<size_t>(r.size(), len));
      ++prefix_count[p];
    }
    if (prefix_count.size() < 2) continue;
    uint32_t total = uint32_t(residents.size());
    uint32_t below = 0;
    std::optional<Bytes> best;
    uint64_t best_imbalance = 0;
    for (auto it = prefix_count.begin(); it != prefix_count.end(); ++it) {
      if (it != prefix_count.begin() &&
          strictly_between(it->first, lower, upper, attr_width)) {
        uint64_t imbalance =
            below * 2 >= total ? below * 2 - total : total - below * 2;
        if (!best || imbalance < best_imbalance) {
          best = it->first;
          best_imbalance = imbalance;
        }
      }
      below += it->second;
    }
    if (best)
      return trim_words(*best, lower, upper, residents, attr_width, word_size);
  }
  return std::nullopt;
}

}  // namespace gridrel
