#include <doctest.h>

#include "gridrel/bytes.hpp"
#include "gridrel/schema.hpp"

using namespace gridrel;

TEST_CASE("padded comparison treats short operands as zero-extended") {
  Bytes a{0x41, 0x41, 0x41, 0x41};
  Bytes b{0x41, 0x41, 0x41, 0x41, 0x00, 0x00};
  CHECK(compare_padded(a, b) == 0);
  Bytes c{0x41, 0x41, 0x41, 0x41, 0x00, 0x01};
  CHECK(compare_padded(a, c) < 0);
  CHECK(compare_padded(c, a) > 0);
  CHECK(compare_padded(Bytes{}, a) < 0);
  CHECK(compare_padded(Bytes{}, Bytes{0, 0}) == 0);
}

TEST_CASE("integer encoding preserves order") {
  AttrDef a{"X", AttrType::Integer, 4};
  int32_t vals[] = {INT32_MIN, -1000, -1, 0, 1, 42, INT32_MAX};
  for (size_t i = 0; i + 1 < std::size(vals); ++i) {
    Bytes lo = encode_value(a, Value{vals[i]});
    Bytes hi = encode_value(a, Value{vals[i + 1]});
    CHECK(compare_padded(lo, hi) < 0);
    CHECK(std::get<int32_t>(decode_value(a, lo.data())) == vals[i]);
  }
}

TEST_CASE("char encoding pads with spaces and trims on decode") {
  AttrDef a{"S", AttrType::Char, 8};
  Bytes b = encode_value(a, Value{std::string("FOO")});
  CHECK(b.size() == 8);
  CHECK(b[3] == ' ');
  CHECK(std::get<std::string>(decode_value(a, b.data())) == "FOO");
}

TEST_CASE("first_point_at_or_above handles truncation and carry") {
  CHECK(*first_point_at_or_above(Bytes{0x41, 0x42}, 4) ==
        Bytes{0x41, 0x42, 0x00, 0x00});
  CHECK(*first_point_at_or_above(Bytes{0x41, 0x42, 0x00, 0x00, 0x00}, 4) ==
        Bytes{0x41, 0x42, 0x00, 0x00});
  CHECK(*first_point_at_or_above(Bytes{0x41, 0x42, 0x00, 0x00, 0x01}, 4) ==
        Bytes{0x41, 0x42, 0x00, 0x01});
  CHECK(!first_point_at_or_above(Bytes{0xFF, 0xFF, 0xFF, 0xFF, 0x01}, 4));
}

TEST_CASE("increment carries and tops out") {
  CHECK(*increment(Bytes{0x00, 0xFF}) == Bytes{0x01, 0x00});
  CHECK(!increment(Bytes{0xFF, 0xFF}));
}
