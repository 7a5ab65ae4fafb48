#include <doctest.h>

#include <algorithm>
#include <random>
#include <set>

#include "gridrel/directory.hpp"
#include "support/oracles.hpp"
#include "support/test_util.hpp"

using namespace gridrel;
using gridrel::testing::LogicalDirectory;
using gridrel::testing::TempDir;
using gridrel::testing::rnd_int;

namespace {

Bytes ival(int32_t v) {
  return encode_value(AttrDef{"X", AttrType::Integer, 4}, Value{v});
}

struct Fixture {
  TempDir dir;
  PageStore store;
  Partlist pl;
  Directory d;
  LogicalDirectory oracle;
  std::vector<std::vector<int32_t>> values;  // per dim, for probing

  explicit Fixture(size_t dims, uint32_t page_size = 256)
      : pl(dims, 4), oracle(dims), values(dims) {
    PageStore::Options opts;
    opts.page_size = page_size;
    opts.use_cache = false;
    RelationHeader hdr;
    hdr.grid_dims = uint32_t(dims);
    store = PageStore::create(dir.str() + "/T", opts, hdr);
    d = Directory(&store, &pl, uint32_t(dims));
    d.init_root(0);
  }

  // One partition refinement with unspecified element contents.
  void split(size_t dim, int32_t value) {
    uint32_t p = uint32_t(pl.size());
    uint64_t count = 1;
    for (size_t d2 = 0; d2 < pl.dims(); ++d2)
      if (d2 != dim) count *= pl.extent_at(d2, p);
    uint32_t page = d.append_piece(uint8_t(dim), p,
                                   std::vector<DirectoryElement>(count));
    pl.append(store, uint8_t(dim), ival(value), page, 4);
    oracle.apply_split(dim, ival(value), p + 1);
    values[dim].push_back(value);
  }

  // Probe coordinates that cover every block: below, at and above every
  // split value.
  std::vector<std::vector<Bytes>> probes() const {
    std::vector<std::vector<Bytes>> out(values.size());
    for (size_t dim = 0; dim < values.size(); ++dim) {
      std::vector<int32_t> vs = values[dim];
      std::sort(vs.begin(), vs.end());
      std::set<int32_t> pts;
      pts.insert(INT32_MIN);
      for (int32_t v : vs) {
        pts.insert(v);
        pts.insert(v - 1);
        pts.insert(v + 1);
      }
      pts.insert(INT32_MAX);
      for (int32_t v : pts) out[dim].push_back(ival(v));
    }
    return out;
  }
};

void check_locate_matches_oracle(Fixture& f) {
  auto probe_sets = f.probes();
  std::vector<size_t> pos(probe_sets.size(), 0);
  for (;;) {
    std::vector<Bytes> coords;
    std::vector<size_t> block;
    for (size_t dim = 0; dim < probe_sets.size(); ++dim) {
      coords.push_back(probe_sets[dim][pos[dim]]);
      block.push_back(f.oracle.block_of(dim, coords.back()));
    }
    auto hit = f.d.locate_element(coords);
    ElementRef expect = f.oracle.at(block);
    CHECK(hit.ref == expect);
    // Lower bounds are the per-dim bracket values.
    for (size_t dim = 0; dim < coords.size(); ++dim) {
      auto lb = f.oracle.block_lower(dim, block[dim]);
      CHECK(bool(hit.lower_bounds[dim]) == bool(lb));
      if (lb) CHECK(compare_padded(*hit.lower_bounds[dim], *lb) == 0);
    }
    size_t d2 = probe_sets.size();
    bool adv = false;
    while (d2-- > 0) {
      if (++pos[d2] < probe_sets[d2].size()) {
        adv = true;
        break;
      }
      pos[d2] = 0;
      if (d2 == 0) break;
    }
    if (!adv) break;
  }
}

}  // namespace

TEST_CASE("root directory locates every coordinate before any refinement") {
  Fixture f(2);
  auto hit = f.d.locate_element({ival(5), ival(-100)});
  CHECK(hit.ref == ElementRef{0, 0});
  CHECK(!hit.lower_bounds[0]);
  CHECK(!hit.lower_bounds[1]);
}

TEST_CASE("init_root twice is an error; reopen reproduces the root") {
  TempDir dir;
  PageStore::Options opts;
  opts.page_size = 256;
  opts.use_cache = false;
  RelationHeader hdr;
  hdr.grid_dims = 2;
  {
    PageStore store = PageStore::create(dir.str() + "/T", opts, hdr);
    Partlist pl(2, 4);
    Directory d(&store, &pl, 2);
    d.init_root(9);
    CHECK_THROWS_AS(d.init_root(9), EngineError);
    store.close();
  }
  PageStore store = PageStore::open(dir.str() + "/T", false);
  Partlist pl(2, 4);
  pl.load(store);
  Directory d(&store, &pl, 2);
  d.load();
  CHECK(d.initialized());
  auto hit = d.locate_element({ival(1), ival(2)});
  CHECK(hit.element.bucket_page == 9);
}

TEST_CASE("first split on a 2-d grid appends a one-element piece") {
  Fixture f(2);
  f.split(0, 50);
  CHECK(f.d.piece_count() == 2);
  CHECK(f.d.piece(1).element_count == 1);
}

TEST_CASE("piece size is the product of the other dims' extents") {
  Fixture f(3);
  f.split(0, 10);
  f.split(0, 20);  // extent on dim0 now 3
  f.split(2, 10);  // extent on dim2 now 2
  uint32_t p = uint32_t(f.pl.size());
  uint64_t expect = f.pl.extent_at(0, p) * f.pl.extent_at(2, p);
  CHECK(expect == 6);
  CHECK_THROWS_AS(
      f.d.append_piece(1, p, std::vector<DirectoryElement>(expect - 1)),
      EngineError);
  f.split(1, 99);
  CHECK(f.d.piece(f.d.piece_count() - 1).element_count == 6);
  // root + two dim-0 pieces (1 element each) + dim-2 piece (3) + dim-1 (6),
  // which is the full 3*2*2 block count.
  CHECK(f.d.total_elements() == 12);
}

TEST_CASE("two-split worked example locates through the latest bracket") {
  Fixture f(2);
  f.split(0, 50);  // position 0
  f.split(1, 30);  // position 1

  auto h1 = f.d.locate_element({ival(60), ival(10)});
  CHECK(h1.ref == ElementRef{1, 0});  // piece appended at position 0
  auto h2 = f.d.locate_element({ival(60), ival(40)});
  CHECK(h2.ref == ElementRef{2, 1});  // dim-1 bracket is later; dim0 rank 1
  auto h3 = f.d.locate_element({ival(40), ival(40)});
  CHECK(h3.ref == ElementRef{2, 0});
  auto h4 = f.d.locate_element({ival(40), ival(10)});
  CHECK(h4.ref == ElementRef{0, 0});

  check_locate_matches_oracle(f);
}

TEST_CASE("update_element changes one element in place") {
  Fixture f(2);
  f.split(0, 50);
  f.split(1, 30);  // piece ordinal 2 has 2 elements

  DirectoryElement before0 = f.d.read_element({2, 0});
  DirectoryElement el = f.d.read_element({2, 1});
  el.bucket_page = 1234;
  el.set_shared(1, true);
  f.d.update_element({2, 1}, el);
  DirectoryElement after = f.d.read_element({2, 1});
  CHECK(after.bucket_page == 1234);
  CHECK(after.shared(1));
  CHECK(f.d.read_element({2, 0}) == before0);
}

TEST_CASE("randomized constructions match the logical-directory oracle") {
  std::mt19937 rng(1234);
  for (int iter = 0; iter < 30; ++iter) {
    size_t k = size_t(rnd_int(rng, 1, 4));
    Fixture f(k);
    int splits = rnd_int(rng, 1, 12);
    for (int s = 0; s < splits; ++s) {
      size_t dim = size_t(rnd_int(rng, 0, int(k) - 1));
      int32_t v;
      do {
        v = rnd_int(rng, 1, 100);
      } while (std::count(f.values[dim].begin(), f.values[dim].end(), v));
      f.split(dim, v);
    }
    check_locate_matches_oracle(f);

    // Random boxes: enumerated element set equals the oracle's set of
    // blocks intersecting the box, with no duplicates.
    for (int q = 0; q < 10; ++q) {
      ValueBox box(k);
      for (size_t dim = 0; dim < k; ++dim) {
        int32_t lo = rnd_int(rng, -5, 105);
        int32_t hi = lo + rnd_int(rng, 1, 60);
        box[dim].lo = ival(lo);
        if (rnd_int(rng, 0, 4) != 0) box[dim].hi = ival(hi);
      }
      std::vector<ElementRef> got;
      f.d.enumerate_region(box, [&](const Directory::Hit& hit) {
        got.push_back(hit.ref);
      });
      std::vector<ElementRef> expect;
      for (const auto& idx : f.oracle.blocks_touching(box))
        expect.push_back(f.oracle.at(idx));
      auto key = [](const ElementRef& r) {
        return (uint64_t(r.piece) << 40) | r.index;
      };
      std::sort(got.begin(), got.end(),
                [&](auto a, auto b) { return key(a) < key(b); });
      std::sort(expect.begin(), expect.end(),
                [&](auto a, auto b) { return key(a) < key(b); });
      CHECK(got == expect);
      CHECK(std::adjacent_find(got.begin(), got.end()) == got.end());
    }
  }
}

TEST_CASE("whole-space enumeration yields every element exactly once") {
  Fixture f(2);
  f.split(0, 50);
  f.split(1, 30);
  f.split(0, 70);
  ValueBox whole(2);
  whole[0].lo = ival(INT32_MIN);
  whole[1].lo = ival(INT32_MIN);
  std::set<std::pair<uint32_t, uint64_t>> seen;
  size_t n = 0;
  f.d.enumerate_region(whole, [&](const Directory::Hit& hit) {
    ++n;
    CHECK(seen.insert({hit.ref.piece, hit.ref.index}).second);
  });
  CHECK(n == f.d.total_elements());
}

TEST_CASE("a box inside one block enumerates exactly one element") {
  Fixture f(2);
  f.split(0, 50);
  f.split(1, 30);
  ValueBox box(2);
  box[0].lo = ival(60);
  box[0].hi = ival(61);
  box[1].lo = ival(5);
  box[1].hi = ival(6);
  size_t n = 0;
  f.d.enumerate_region(box, [&](const Directory::Hit&) { ++n; });
  CHECK(n == 1);
}

TEST_CASE("piece table entries never relocate as pieces are appended") {
  Fixture f(3);
  std::vector<std::pair<uint32_t, uint32_t>> prev = f.d.piece_table();
  std::mt19937 rng(5);
  for (int s = 0; s < 25; ++s) {
    size_t dim = size_t(rnd_int(rng, 0, 2));
    int32_t v;
    do {
      v = rnd_int(rng, 1, 1000);
    } while (std::count(f.values[dim].begin(), f.values[dim].end(), v));
    f.split(dim, v);
    auto now = f.d.piece_table();
    REQUIRE(now.size() == prev.size() + 1);
    for (size_t i = 0; i < prev.size(); ++i) CHECK(now[i] == prev[i]);
    prev = std::move(now);
  }
  // Reload from disk reproduces the same geometry.
  Partlist pl2(3, 4);
  pl2.load(f.store);
  Directory d2(&f.store, &pl2, 3);
  d2.load();
  CHECK(d2.piece_table() == prev);
  CHECK(d2.total_elements() == f.d.total_elements());
}

TEST_CASE("pieces larger than a page span contiguous pages") {
  Fixture f(2, 256);  // element width 5; ~50 elements per 256-byte page
  for (int i = 1; i <= 80; ++i) f.split(0, i * 3);
  f.split(1, 500);  // piece with 81 elements on dim 0
  for (int i = 1; i <= 30; ++i) f.split(1, i * 7);
  check_locate_matches_oracle(f);
}
