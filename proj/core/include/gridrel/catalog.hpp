#ifndef GRIDREL_CATALOG_HPP_
#define GRIDREL_CATALOG_HPP_

#include <memory>
#include <string>
#include <vector>

#include "gridrel/grid_file.hpp"
#include "gridrel/schema.hpp"

namespace gridrel {

// System catalog stored in two reserved grid-file relations: RELCAT keyed on
// relation name, ATTRCAT keyed on relation name plus attribute position.
// Both are ordinary grid files and describe themselves.
class Catalog {
 public:
  static const char* kRelcatName;   // "RELCAT"
  static const char* kAttrcatName;  // "ATTRCAT"

  Catalog() = default;

  // Opens the catalog relations, bootstrapping them on first use.
  static Catalog open(const std::string& dir, const GridFile::Options& opts);

  bool exists(const std::string& name);
  RelationSchema lookup(const std::string& name);
  void create(const RelationSchema& schema);
  void drop(const std::string& name);
  std::vector<std::string> list();

  static bool is_reserved(const std::string& name);

  GridFile& relcat() { return *relcat_; }
  GridFile& attrcat() { return *attrcat_; }

  void close();

 private:
  static RelationSchema relcat_schema();
  static RelationSchema attrcat_schema();

  std::unique_ptr<GridFile> relcat_;
  std::unique_ptr<GridFile> attrcat_;
};

}  // namespace gridrel

#endif  // GRIDREL_CATALOG_HPP_
