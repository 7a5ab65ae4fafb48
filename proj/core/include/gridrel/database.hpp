#ifndef GRIDREL_DATABASE_HPP_
#define GRIDREL_DATABASE_HPP_

#include <map>
#include <string>
#include <vector>

#include "gridrel/catalog.hpp"
#include "gridrel/executor.hpp"
#include "gridrel/grid_file.hpp"

namespace gridrel {

// One database: a directory of grid-file relations plus the catalog pair.
// Strictly single-threaded; statements execute sequentially.
class Database {
 public:
  struct Config {
    std::string dir;
    uint32_t page_size = 4096;
    bool use_cache = true;
    size_t cache_pages = 1024;
    SplitPolicy policy = SplitPolicy::RoundRobin;
    size_t region_box_limit = 256;
  };

  explicit Database(Config cfg);
  ~Database();
  Database(const Database&) = delete;
  Database& operator=(const Database&) = delete;

  ExecResult execute(const std::string& sql);
  ExecResult execute_statement(Statement stmt);
  std::string explain(const std::string& select_sql);

  GridFile& relation(const std::string& name);
  Catalog& catalog() { return catalog_; }
  const Config& config() const { return cfg_; }

  // Physical page accesses since the last reset, summed over the catalog
  // and every open relation.
  AccessStats access_stats();
  void reset_access_stats();

  GridStats relation_stats(const std::string& name);
  std::vector<std::string> relation_names() { return catalog_.list(); }

  void close();

 private:
  GridFile::Options gf_options() const;

  Config cfg_;
  Catalog catalog_;
  std::map<std::string, GridFile> open_;
};

}  // namespace gridrel

#endif  // GRIDREL_DATABASE_HPP_
