#ifndef GRIDREL_DIRECTORY_HPP_
#define GRIDREL_DIRECTORY_HPP_

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "gridrel/bytes.hpp"
#include "gridrel/page_store.hpp"
#include "gridrel/partlist.hpp"

namespace gridrel {

// One grid-directory cell: the bucket holding the block's tuples, plus one
// flag per dimension. shared bit d set means the block's lower neighbor
// along d maps to the same bucket; the set of blocks sharing a bucket always
// forms a hyperparallelepiped.
struct DirectoryElement {
  uint32_t bucket_page = 0;
  uint64_t shared_mask = 0;

  bool shared(size_t dim) const { return (shared_mask >> dim) & 1; }
  void set_shared(size_t dim, bool v) {
    if (v)
      shared_mask |= uint64_t{1} << dim;
    else
      shared_mask &= ~(uint64_t{1} << dim);
  }
  bool operator==(const DirectoryElement&) const = default;
};

// Geometry of one appended slab. Pieces are never resized or relocated; a
// piece's extents are the per-dim interval counts at the moment it was
// created (the extent along its own split dim is unused).
struct PieceInfo {
  int32_t created_at = -1;  // Partlist position; -1 for the root piece
  int32_t split_dim = -1;   // -1 for the root piece
  uint32_t start_page = 0;
  uint32_t start_offset = 0;
  std::vector<uint32_t> extents;
  uint64_t element_count = 1;
};

struct ElementRef {
  uint32_t piece = 0;  // ordinal: 0 = root, i >= 1 maps to Partlist position i-1
  uint64_t index = 0;  // row-major over dims != split_dim, ascending dim order
  bool operator==(const ElementRef&) const = default;
};

// A query box in comparable-value space: per dim, half-open [lo, hi) with
// hi = nullopt meaning unbounded above. lo of all zeros is the domain
// minimum.
struct ValueRange {
  Bytes lo;
  std::optional<Bytes> hi;
};
using ValueBox = std::vector<ValueRange>;

// The grid directory: an append-only collection of (k-1)-dimensional pieces
// in refinement order, addressed through the Partlist. Piece geometry and
// the piece table are memory-resident; element payloads live on .dir pages.
class Directory {
 public:
  Directory() = default;
  Directory(PageStore* store, const Partlist* partlist, uint32_t dims)
      : store_(store), partlist_(partlist), dims_(dims) {}

  bool initialized() const { return !pieces_.empty(); }
  void init_root(uint32_t bucket_page);
  void load();

  // Appends the piece created by refining split_dim at Partlist position
  // created_at. elements.size() must equal the product of extent_at of
  // every other dim at that moment. No previously written piece page is
  // touched. Returns the piece's starting page.
  uint32_t append_piece(uint8_t split_dim, uint32_t created_at,
                        const std::vector<DirectoryElement>& elements);

  struct Hit {
    ElementRef ref;
    DirectoryElement element;
    // Per-dim lower bound of the element's grid block: a coded scale value,
    // or nullopt at the domain minimum.
    std::vector<std::optional<Bytes>> lower_bounds;
  };

  // Exactly one directory page read once scales are resident.
  Hit locate_element(const std::vector<Bytes>& coords);

  // Visits every directory element whose grid block intersects the box,
  // exactly once per element, in piece order (root first).
  void enumerate_region(const ValueBox& box,
                        const std::function<void(const Hit&)>& fn);

  DirectoryElement read_element(ElementRef ref);
  void update_element(ElementRef ref, const DirectoryElement& el);
  // Page-batched form of update_element.
  void update_elements(std::vector<std::pair<ElementRef, DirectoryElement>> updates);

  size_t piece_count() const { return pieces_.size(); }
  const PieceInfo& piece(uint32_t ordinal) const { return pieces_[ordinal]; }
  uint64_t total_elements() const;
  uint32_t dims() const { return dims_; }

  // (start_page, start_offset) per piece, for append-only audits.
  std::vector<std::pair<uint32_t, uint32_t>> piece_table() const;

 private:
  size_t element_width() const { return 4 + (dims_ + 7) / 8; }
  std::pair<uint32_t, uint32_t> element_addr(ElementRef ref) const;
  void append_table_entry(uint32_t page, uint32_t offset);
  PieceInfo make_piece_info(uint32_t ordinal) const;
  void set_tail_after(const PieceInfo& info);

  PageStore* store_ = nullptr;
  const Partlist* partlist_ = nullptr;
  uint32_t dims_ = 0;
  std::vector<PieceInfo> pieces_;
  uint32_t tail_page_ = 0;
  uint32_t tail_offset_ = 0;
  uint32_t table_tail_page_ = 0;  // last page of the piece-table chain
};

}  // namespace gridrel

#endif  // GRIDREL_DIRECTORY_HPP_
