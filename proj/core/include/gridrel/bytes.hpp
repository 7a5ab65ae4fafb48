#ifndef GRIDREL_BYTES_HPP_
#define GRIDREL_BYTES_HPP_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace gridrel {

// All attribute values are compared in a byte-encoded form where unsigned
// lexicographic order equals domain order (offset-binary for integers, raw
// bytes for characters). vector<uint8_t>'s built-in operator< already is
// that order for equal-length strings.
using Bytes = std::vector<uint8_t>;

// Point order for coded values of unequal length: the shorter operand is
// conceptually extended with minimum (zero) bytes. A coded scale value V of
// w words denotes the point V followed by zeros, so compare_padded(V, t)<=0
// is exactly the "V brackets t" test on a full-width tuple value t.
int compare_padded(const Bytes& a, const Bytes& b);

// Smallest width-byte string >= bound under the padded point order, if one
// exists (carry overflow past the top value means none).
std::optional<Bytes> first_point_at_or_above(const Bytes& bound, size_t width);

// b + 1 in fixed width; nullopt when b is the all-0xFF top value.
std::optional<Bytes> increment(const Bytes& b);

bool all_zero(const Bytes& b);
bool all_ones(const Bytes& b);

std::string to_hex(const Bytes& b);

}  // namespace gridrel

#endif  // GRIDREL_BYTES_HPP_
