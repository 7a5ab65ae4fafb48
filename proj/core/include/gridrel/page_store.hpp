#ifndef GRIDREL_PAGE_STORE_HPP_
#define GRIDREL_PAGE_STORE_HPP_

#include <cstdint>
#include <fstream>
#include <list>
#include <string>
#include <unordered_map>
#include <vector>

#include "gridrel/bytes.hpp"
#include "gridrel/schema.hpp"

namespace gridrel {

enum class FileRole : uint8_t { Data = 0, Directory = 1, Scales = 2 };

struct PageId {
  FileRole role = FileRole::Data;
  uint32_t index = 0;

  bool operator==(const PageId&) const = default;
};

// Disk-access counters, the engine's cost metric. Counters track physical
// page operations only: a cache hit increments nothing.
struct AccessStats {
  uint64_t data_reads = 0, data_writes = 0;
  uint64_t dir_reads = 0, dir_writes = 0;
  uint64_t scale_reads = 0, scale_writes = 0;

  uint64_t reads() const { return data_reads + dir_reads + scale_reads; }
  uint64_t writes() const { return data_writes + dir_writes + scale_writes; }
  uint64_t total() const { return reads() + writes(); }
};

enum class SplitPolicy : uint8_t { RoundRobin = 0, MidpointFirst = 1 };

// Relation header, kept on page 0 of the .dat file (see docs/file-formats.md
// for byte offsets). The storage layer owns page bookkeeping fields; the
// engine fields (schema hash, widths, policy, counters) are kept here too so
// one flush covers them all.
struct RelationHeader {
  uint32_t page_size = 4096;
  uint32_t free_list_head = 0;  // 1-based data page index, 0 = empty
  uint32_t page_count[3] = {0, 0, 0};
  uint64_t schema_hash = 0;
  uint32_t tuple_width = 0;
  uint32_t bucket_capacity = 0;
  uint32_t grid_dims = 0;
  SplitPolicy policy = SplitPolicy::RoundRobin;
  uint8_t word_size = 4;
  uint32_t next_split_dim = 0;
  uint64_t tuple_count = 0;
};

struct TraceEvent {
  bool is_write = false;
  PageId page;
  Bytes content;  // captured only for writes when capture_writes is set
};

// One relation's三 files: <base>.dat, <base>.dir, <base>.scales. Page 0 of
// .dat is the header page; data PageId indices are logical (index 0 lives at
// physical page 1). Directory and scales files have no hidden pages.
//
// Single-threaded by contract. The optional page cache is write-through, so
// disabling it only changes read counts, never on-disk state.
class PageStore {
 public:
  struct Options {
    uint32_t page_size = 4096;
    bool use_cache = true;
    size_t cache_pages = 1024;
  };

  PageStore() = default;
  PageStore(const PageStore&) = delete;
  PageStore& operator=(const PageStore&) = delete;
  PageStore(PageStore&& other) noexcept;
  PageStore& operator=(PageStore&& other) noexcept;
  ~PageStore();

  static PageStore create(const std::string& base, const Options& opts,
                          const RelationHeader& engine_fields);
  static PageStore open(const std::string& base, bool use_cache,
                        size_t cache_pages = 1024);
  static bool exists(const std::string& base);
  static void remove_files(const std::string& base);

  PageId alloc(FileRole role);
  // Pushes a data page onto the free list; a later alloc may reuse it.
  void free_data_page(uint32_t index);

  void read(PageId id, uint8_t* out);
  void write(PageId id, const uint8_t* data);
  Bytes read_page(PageId id);
  void write_page(PageId id, const Bytes& content);

  uint32_t page_size() const { return header_.page_size; }
  uint32_t page_count(FileRole role) const {
    return header_.page_count[static_cast<size_t>(role)];
  }
  bool is_open() const { return open_; }

  RelationHeader& header() { return header_; }
  const RelationHeader& header() const { return header_; }
  void flush_header();

  AccessStats stats() const { return stats_; }
  void reset_stats() { stats_ = AccessStats{}; }

  void set_trace(bool enabled, bool capture_writes = false);
  const std::vector<TraceEvent>& trace() const { return trace_; }
  void clear_trace() { trace_.clear(); }

  void close();

 private:
  struct CacheKey {
    uint64_t v;
    bool operator==(const CacheKey&) const = default;
  };
  struct CacheKeyHash {
    size_t operator()(const CacheKey& k) const {
      return std::hash<uint64_t>()(k.v);
    }
  };
  struct CacheEntry {
    Bytes content;
    std::list<CacheKey>::iterator lru_it;
  };

  static CacheKey key_of(PageId id) {
    return CacheKey{(uint64_t(static_cast<uint8_t>(id.role)) << 32) | id.index};
  }

  std::fstream& file_for(FileRole role);
  uint64_t physical_offset(PageId id) const;
  void raw_read(PageId id, uint8_t* out);
  void raw_write(PageId id, const uint8_t* data);
  void count_read(FileRole role);
  void count_write(FileRole role);
  void check_allocated(PageId id) const;
  void cache_put(PageId id, const uint8_t* data);
  bool cache_get(PageId id, uint8_t* out);
  void write_header_page();
  void read_header_page();

  std::string base_;
  std::fstream files_[3];
  RelationHeader header_;
  AccessStats stats_;
  bool open_ = false;
  bool use_cache_ = false;
  size_t cache_capacity_ = 0;
  std::unordered_map<CacheKey, CacheEntry, CacheKeyHash> cache_;
  std::list<CacheKey> lru_;
  bool trace_enabled_ = false;
  bool trace_capture_writes_ = false;
  std::vector<TraceEvent> trace_;
};

}  // namespace gridrel

#endif  // GRIDREL_PAGE_STORE_HPP_
