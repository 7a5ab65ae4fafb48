#ifndef GRIDREL_PARTLIST_HPP_
#define GRIDREL_PARTLIST_HPP_

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "gridrel/bytes.hpp"
#include "gridrel/page_store.hpp"

namespace gridrel {

// One refinement of some linear scale: a prefix-coded split value on
// attribute `dim`, plus the start page of the directory piece appended with
// it. An entry's position in the list is its timestamp; entries are never
// removed or reordered.
struct PartEntry {
  uint8_t dim = 0;
  Bytes value;          // length is a multiple of the word size
  uint32_t piece_page = 0;
};

// The composite list of all linear scales, in refinement order. Fully
// memory-resident after load; every lookup below touches no pages. The
// domain minimum and maximum are implicit sentinels, never stored.
class Partlist {
 public:
  Partlist() = default;
  explicit Partlist(size_t dims, uint8_t word_size = 4)
      : dims_(dims), word_size_(word_size) {}

  void load(PageStore& store);

  // Appends (value, dim, piece_page) at the tail and persists the record.
  // Throws on a duplicate value within the dim or a value at/outside the
  // domain bounds. attr_width is the attribute's full byte width.
  uint32_t append(PageStore& store, uint8_t dim, const Bytes& value,
                  uint32_t piece_page, uint32_t attr_width);

  size_t size() const { return entries_.size(); }
  size_t dims() const { return dims_; }
  uint8_t word_size() const { return word_size_; }
  const PartEntry& entry(uint32_t pos) const { return entries_[pos]; }
  const std::vector<PartEntry>& entries() const { return entries_; }

  struct BracketPair {
    std::optional<uint32_t> lower;  // nullopt = domain minimum
    std::optional<uint32_t> upper;  // nullopt = domain maximum
  };
  // lower: entry of `dim` with the greatest value <= v; upper: the least
  // value > v. Single pass over the list.
  BracketPair locate_brackets(size_t dim, const Bytes& v) const;

  // Number of entries with this dim, position < cutoff and value <= v:
  // the zero-based interval index of point v along `dim` at the historical
  // moment `cutoff`.
  uint32_t rank_at(size_t dim, const Bytes& v, uint32_t cutoff) const;
  // Same with strict value < v.
  uint32_t rank_lt(size_t dim, const Bytes& v, uint32_t cutoff) const;
  // Number of intervals on `dim` at moment `cutoff`.
  uint32_t extent_at(size_t dim, uint32_t cutoff) const;

  // Entries of `dim` with position < cutoff, ordered by value.
  std::vector<std::pair<const Bytes*, uint32_t>> values_before(
      size_t dim, uint32_t cutoff) const;

 private:
  void check_record_fits(uint32_t page_size, size_t record_size) const;

  size_t dims_ = 0;
  uint8_t word_size_ = 4;
  std::vector<PartEntry> entries_;
  // Tail page of the .scales file mirrored in memory so appends never read.
  uint32_t tail_page_ = 0;
  uint32_t tail_used_ = 0;
  uint16_t tail_records_ = 0;
  Bytes tail_content_;
};

// Split-value selection for a bucket overflow on one attribute.
//
// lower/upper are the coded values of the interval's bracketing entries
// (nullopt = domain sentinel); residents are the full-width comparable
// values of the bucket's tuples, all inside [lower, upper). A result V* is
// strictly between the bounds and splits residents into two non-empty sets
// by value < V*; nullopt means no such value exists at any coded length.
std::optional<Bytes> choose_split_value(const std::optional<Bytes>& lower,
                                        const std::optional<Bytes>& upper,
                                        const std::vector<Bytes>& residents,
                                        uint32_t attr_width,
                                        uint8_t word_size = 4);

// The byte-wise midpoint of the interval, if it is a usable split value.
std::optional<Bytes> midpoint_split_value(const std::optional<Bytes>& lower,
                                          const std::optional<Bytes>& upper,
                                          const std::vector<Bytes>& residents,
                                          uint32_t attr_width,
                                          uint8_t word_size = 4);

}  // namespace gridrel

#endif  // GRIDREL_PARTLIST_HPP_
