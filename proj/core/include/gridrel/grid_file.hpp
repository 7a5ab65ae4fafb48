#ifndef GRIDREL_GRID_FILE_HPP_
#define GRIDREL_GRID_FILE_HPP_

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "gridrel/directory.hpp"
#include "gridrel/page_store.hpp"
#include "gridrel/partlist.hpp"
#include "gridrel/region.hpp"
#include "gridrel/schema.hpp"

namespace gridrel {

struct GridStats {
  uint64_t tuple_count = 0;
  uint64_t bucket_count = 0;       // distinct primary buckets
  uint64_t overflow_pages = 0;     // chained pages, outside the 2-access path
  uint64_t directory_elements = 0;
  double occupancy = 0.0;          // mean bucket fill fraction
  double redundancy = 1.0;         // directory elements / buckets
  std::vector<uint32_t> partitions;  // interval count per grid dim
};

// One relation stored as a grid file. Point fetch costs one directory page
// read plus one data page read once the scales are resident; inserts split
// buckets (shared-region split first, partition refinement otherwise);
// deletes merge emptied buckets back into box-shaped neighbor regions.
class GridFile {
 public:
  struct Options {
    uint32_t page_size = 4096;
    bool use_cache = true;
    size_t cache_pages = 1024;
    SplitPolicy policy = SplitPolicy::RoundRobin;
  };

  using Predicate = std::function<bool(const Tuple&)>;
  using TupleSink = std::function<void(const Tuple&)>;
  using ChunkSink = std::function<void(std::vector<Tuple>&&)>;

  GridFile() = default;
  GridFile(GridFile&&) = default;
  GridFile& operator=(GridFile&&) = default;

  static GridFile create(const std::string& dir, const RelationSchema& schema,
                         const Options& opts);
  static GridFile open(const std::string& dir, const RelationSchema& schema,
                       bool use_cache, size_t cache_pages = 1024);
  static bool exists(const std::string& dir, const std::string& name);
  static void destroy(const std::string& dir, const std::string& name);

  void insert(const Tuple& t);

  // All stored tuples whose grid attributes equal grid_values exactly.
  std::vector<Tuple> point_query(const std::vector<Value>& grid_values);

  // Region-restricted scan; boxes must be pairwise disjoint. Fetches each
  // shared bucket once per box and emits every qualifying tuple exactly once
  // across the whole set. The chunked form delivers one call per fetched
  // bucket (the unit the join cost model counts).
  void scan_region(const RegionSet& region, const Predicate& residual,
                   const TupleSink& sink);
  std::vector<Tuple> scan_region(const RegionSet& region,
                                 const Predicate& residual = {});
  void scan_region_chunked(const RegionSet& region, const Predicate& residual,
                           const ChunkSink& sink);

  size_t delete_where(const RegionSet& region, const Predicate& residual = {});

  // Tuples in slab order along grid_dim, each slab sorted in memory, so the
  // concatenation is globally ordered by that attribute.
  void ordered_scan(size_t grid_dim, const RegionSet& region, bool descending,
                    const TupleSink& sink, const Predicate& residual = {});

  std::vector<Tuple> full_scan();

  GridStats grid_stats();
  AccessStats access_stats() const { return store_->stats(); }
  void reset_access_stats() { store_->reset_stats(); }

  const RelationSchema& schema() const { return schema_; }
  uint32_t bucket_capacity() const { return capacity_; }
  PageStore& store() { return *store_; }
  Partlist& partlist() { return *partlist_; }
  Directory& directory() { return directory_; }

  std::vector<Bytes> grid_coords(const Tuple& t) const;

  void flush();
  void close();

 private:
  struct BucketContents {
    std::vector<Bytes> tuples;  // encoded, tuple_width each
    std::vector<uint32_t> chain_pages;
  };
  struct BlockRegion {
    std::vector<uint32_t> lo, hi;  // inclusive block index ranges per dim
  };

  Bytes grid_value_of(const Bytes& encoded, size_t dim) const;
  std::vector<Bytes> coords_of_encoded(const Bytes& encoded) const;
  BucketContents read_bucket(uint32_t page);
  void store_bucket(uint32_t page, const std::vector<Bytes>& tuples,
                    std::vector<uint32_t> reusable_chain);
  std::vector<Bytes> sorted_values(size_t dim) const;
  std::vector<Bytes> block_rep_coords(const std::vector<uint32_t>& idx,
                                      const std::vector<std::vector<Bytes>>& values) const;
  BlockRegion region_of(const std::vector<uint32_t>& start_idx,
                        const std::vector<std::vector<Bytes>>& values,
                        const std::vector<uint32_t>& extents);
  ValueBox region_value_box(const BlockRegion& r,
                            const std::vector<std::vector<Bytes>>& values) const;
  void split_shared_region(uint32_t bucket, const BlockRegion& region,
                           const std::vector<std::vector<Bytes>>& values);
  bool refine_partition(const std::vector<Bytes>& coords, uint32_t bucket,
                        const std::vector<Bytes>& resident_rows);
  void append_to_chain(uint32_t primary, const Bytes& encoded);
  bool try_merge_empty(uint32_t bucket);
  void merge_sweep();
  ValueBox box_to_value_box(const Box& b) const;

  std::string base_path_;
  RelationSchema schema_;
  std::unique_ptr<PageStore> store_;
  std::unique_ptr<Partlist> partlist_;
  Directory directory_;
  uint32_t capacity_ = 0;
};

}  // namespace gridrel

#endif  // GRIDREL_GRID_FILE_HPP_
