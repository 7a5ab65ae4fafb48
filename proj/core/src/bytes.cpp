#include "gridrel/bytes.hpp"

#include <algorithm>

namespace gridrel {

int compare_padded(const Bytes& a, const Bytes& b) {
  size_t n = std::max(a.size(), b.size());
  for (size_t i = 0; i < n; ++i) {
    uint8_t av = i < a.size() ? a[i] : 0;
    uint8_t bv = i < b.size() ? b[i] : 0;
    if (av != bv) return av < bv ? -1 : 1;
  }
  return 0;
}

std::optional<Bytes> first_point_at_or_above(const Bytes& bound, size_t width) {
  if (bound.size() <= width) {
    Bytes out = bound;
    out.resize(width, 0);
    return out;
  }
  // The dropped suffix is below the point iff it is all zero.
  bool suffix_zero = std::all_of(bound.begin() + width, bound.end(),
                                 [](uint8_t v) { return v == 0; });
  Bytes prefix(bound.begin(), bound.begin() + width);
  if (suffix_zero) return prefix;
  return increment(prefix);
}

std::optional<Bytes> increment(const Bytes& b) {
  Bytes out = b;
  for (size_t i = out.size(); i-- > 0;) {
    if (out[i] != 0xFF) {
      ++out[i];
      return out;
    }
    out[i] = 0;
  }
  return std::nullopt;
}

bool all_zero(const Bytes& b) {
  return std::all_of(b.begin(), b.end(), [](uint8_t v) { return v == 0; });
}

bool all_ones(const Bytes& b) {
  return std::all_of(b.begin(), b.end(), [](uint8_t v) { return v == 0xFF; });
}

std::string to_hex(const Bytes& b) {
  static const char* digits = "0123456789abcdef";
  std::string s;
  s.reserve(b.size() * 2);
  for (uint8_t v : b) {
    s.push_back(digits[v >> 4]);
    s.push_back(digits[v & 0xF]);
  }
  return s;
}

}  // namespace gridrel
