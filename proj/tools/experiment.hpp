#ifndef GRIDREL_TOOLS_EXPERIMENT_HPP_
#define GRIDREL_TOOLS_EXPERIMENT_HPP_

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "gridrel/grid_file.hpp"

namespace gridrel {

// Seeded synthetic workload that builds a library-catalog-shaped dataset
// under both splitting policies (and under a full-attribute grid vs a
// three-attribute grid) and measures directory size, occupancy and
// per-query disk accesses.
struct ExperimentSpec {
  size_t tuples = 2000;
  uint64_t seed = 42;
  uint32_t page_size = 1024;
  uint32_t bucket_capacity = 4;
  // attribute name -> uniform | constprefix | zipf (defaults applied in run)
  std::map<std::string, std::string> dist;
};

struct ExperimentEntry {
  std::string policy;    // "roundrobin" | "midpoint"
  std::string relation;  // "BOOKS" | "SMALLBOOKS"
  GridStats stats;
  std::vector<std::string> grid_attr_names;
  std::vector<std::pair<std::string, uint64_t>> query_accesses;
};

struct ExperimentReport {
  std::vector<ExperimentEntry> entries;

  const ExperimentEntry& find(const std::string& policy,
                              const std::string& relation) const;
};

ExperimentReport run_split_policy_experiment(const ExperimentSpec& spec,
                                             const std::string& work_dir);

void render_report(const ExperimentReport& report, std::ostream& out, bool csv);

}  // namespace gridrel

#endif  // GRIDREL_TOOLS_EXPERIMENT_HPP_
