#ifndef GRIDREL_SCHEMA_HPP_
#define GRIDREL_SCHEMA_HPP_

#include <cstdint>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "gridrel/bytes.hpp"

namespace gridrel {

class EngineError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class AttrType : uint8_t { Integer = 0, Char = 1 };

struct AttrDef {
  std::string name;
  AttrType type = AttrType::Integer;
  uint32_t width = 4;  // bytes; 4 for INTEGER, n for CHAR(n)
};

// Fixed-width tuple layout. grid_attrs selects the subset of attributes that
// span the grid space; the rest are carried in tuples but never indexed.
struct RelationSchema {
  std::string name;
  std::vector<AttrDef> attrs;
  std::vector<uint32_t> grid_attrs;
  uint32_t bucket_capacity = 0;  // 0 = as many tuples as fit on a page

  uint32_t tuple_width() const;
  size_t grid_dims() const { return grid_attrs.size(); }
  const AttrDef& grid_attr(size_t dim) const { return attrs[grid_attrs[dim]]; }
  int attr_index(const std::string& name) const;  // -1 when absent
  void validate() const;
};

uint64_t schema_hash(const RelationSchema& s);

using Value = std::variant<int32_t, std::string>;
using Tuple = std::vector<Value>;

// Order-preserving byte encoding: INTEGER as offset-binary big-endian,
// CHAR(n) as raw bytes space-padded to n. Stored tuple bytes use the same
// encoding, so storage order and comparison order coincide.
Bytes encode_value(const AttrDef& attr, const Value& v);
Value decode_value(const AttrDef& attr, const uint8_t* data);

void encode_tuple(const RelationSchema& schema, const Tuple& t, uint8_t* out);
Tuple decode_tuple(const RelationSchema& schema, const uint8_t* data);

// Coerce a literal to the attribute's type; throws EngineError on mismatch
// (integer into CHAR, string into INTEGER, CHAR literal wider than n).
Value coerce_value(const AttrDef& attr, const Value& v);

std::string value_to_string(const Value& v);

}  // namespace gridrel

#endif  // GRIDREL_SCHEMA_HPP_
