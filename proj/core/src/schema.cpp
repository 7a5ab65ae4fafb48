#include "gridrel/schema.hpp"

#include <algorithm>
#include <cstring>

namespace gridrel {

uint32_t RelationSchema::tuple_width() const {
  uint32_t w = 0;
  for (const auto& a : attrs) w += a.width;
  return w;
}

int RelationSchema::attr_index(const std::string& name) const {
  for (size_t i = 0; i < attrs.size(); ++i)
    if (attrs[i].name == name) return static_cast<int>(i);
  return -1;
}

void RelationSchema::validate() const {
  if (name.empty()) throw EngineError("relation name empty");
  if (attrs.empty()) throw EngineError("relation has no attributes");
  if (grid_attrs.empty())
    throw EngineError("relation must have at least one grid attribute");
  for (const auto& a : attrs) {
    if (a.name.empty()) throw EngineError("attribute name empty");
    if (a.type == AttrType::Integer && a.width != 4)
      throw EngineError("INTEGER width must be 4");
    if (a.type == AttrType::Char && (a.width == 0 || a.width > 255))
      throw EngineError("CHAR width out of range");
  }
  for (size_t i = 0; i < attrs.size(); ++i)
    for (size_t j = i + 1; j < attrs.size(); ++j)
      if (attrs[i].name == attrs[j].name)
        throw EngineError("duplicate attribute name: " + attrs[i].name);
  for (uint32_t g : grid_attrs)
    if (g >= attrs.size()) throw EngineError("grid attribute index out of range");
  for (size_t i = 0; i < grid_attrs.size(); ++i)
    for (size_t j = i + 1; j < grid_attrs.size(); ++j)
      if (grid_attrs[i] == grid_attrs[j])
        throw EngineError("duplicate grid attribute");
}

uint64_t schema_hash(const RelationSchema& s) {
  // FNV-1a over the logical description.
  uint64_t h = 1469598103934665603ull;
  auto mix = [&h](const void* p, size_t n) {
    const uint8_t* b = static_cast<const uint8_t*>(p);
    for (size_t i = 0; i < n; ++i) {
      h ^= b[i];
      h *= 1099511628211ull;
    }
  };
  mix(s.name.data(), s.name.size());
  for (const auto& a : s.attrs) {
    mix(a.name.data(), a.name.size());
    uint8_t t = static_cast<uint8_t>(a.type);
    mix(&t, 1);
    mix(&a.width, sizeof a.width);
  }
  for (uint32_t g : s.grid_attrs) mix(&g, sizeof g);
  return h;
}

Bytes encode_value(const AttrDef& attr, const Value& v) {
  Bytes out(attr.width, 0);
  if (attr.type == AttrType::Integer) {
    uint32_t u = static_cast<uint32_t>(std::get<int32_t>(v)) ^ 0x80000000u;
    out[0] = static_cast<uint8_t>(u >> 24);
    out[1] = static_cast<uint8_t>(u >> 16);
    out[2] = static_cast<uint8_t>(u >> 8);
    out[3] = static_cast<uint8_t>(u);
  } else {
    const std::string& s = std::get<std::string>(v);
    size_t n = std::min<size_t>(s.size(), attr.width);
    std::memcpy(out.data(), s.data(), n);
    std::fill(out.begin() + n, out.end(), uint8_t{' '});
  }
  return out;
}

Value decode_value(const AttrDef& attr, const uint8_t* data) {
  if (attr.type == AttrType::Integer) {
    uint32_t u = (uint32_t(data[0]) << 24) | (uint32_t(data[1]) << 16) |
                 (uint32_t(data[2]) << 8) | uint32_t(data[3]);
    return static_cast<int32_t>(u ^ 0x80000000u);
  }
  std::string s(reinterpret_cast<const char*>(data), attr.width);
  while (!s.empty() && s.back() == ' ') s.pop_back();
  return s;
}

void encode_tuple(const RelationSchema& schema, const Tuple& t, uint8_t* out) {
  if (t.size() != schema.attrs.size())
    throw EngineError("tuple arity mismatch for " + schema.name);
  size_t off = 0;
  for (size_t i = 0; i < schema.attrs.size(); ++i) {
    Bytes b = encode_value(schema.attrs[i], t[i]);
    std::memcpy(out + off, b.data(), b.size());
    off += b.size();
  }
}

Tuple decode_tuple(const RelationSchema& schema, const uint8_t* data) {
  Tuple t;
  t.reserve(schema.attrs.size());
  size_t off = 0;
  for (const auto& a : schema.attrs) {
    t.push_back(decode_value(a, data + off));
    off += a.width;
  }
  return t;
}

Value coerce_value(const AttrDef& attr, const Value& v) {
  if (attr.type == AttrType::Integer) {
    if (!std::holds_alternative<int32_t>(v))
      throw EngineError("type mismatch: expected INTEGER for " + attr.name);
    return v;
  }
  if (!std::holds_alternative<std::string>(v))
    throw EngineError("type mismatch: expected CHAR for " + attr.name);
  if (std::get<std::string>(v).size() > attr.width)
    throw EngineError("string literal wider than CHAR(" +
                      std::to_string(attr.width) + ") column " + attr.name);
  return v;
}

std::string value_to_string(const Value& v) {
  if (std::holds_alternative<int32_t>(v))
    return std::to_string(std::get<int32_t>(v));
  return std::get<std::string>(v);
}

}  // namespace gridrel
