#include <benchmark/benchmark.h>

#include <filesystem>
#include <random>

#include "gridrel/grid_file.hpp"

using namespace gridrel;

namespace {

RelationSchema bench_schema(uint32_t capacity) {
  RelationSchema s;
  s.name = "BENCH";
  s.attrs = {{"A", AttrType::Integer, 4},
             {"B", AttrType::Integer, 4},
             {"C", AttrType::Integer, 4},
             {"PAY", AttrType::Integer, 4}};
  s.grid_attrs = {0, 1, 2};
  s.bucket_capacity = capacity;
  return s;
}

struct BenchDb {
  std::string dir;
  GridFile gf;
  std::vector<Tuple> data;

  explicit BenchDb(size_t tuples, bool cache = true) {
    dir = (std::filesystem::temp_directory_path() /
           ("gridrel_bench_" + std::to_string(::getpid())))
              .string();
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    GridFile::Options opts;
    opts.page_size = 4096;
    opts.use_cache = cache;
    gf = GridFile::create(dir, bench_schema(32), opts);
    std::mt19937 rng(1);
    for (size_t i = 0; i < tuples; ++i) {
      Tuple t{Value{int32_t(rng() % 100000)}, Value{int32_t(rng() % 100000)},
              Value{int32_t(rng() % 100000)}, Value{int32_t(i)}};
      gf.insert(t);
      data.push_back(t);
    }
  }
  ~BenchDb() {
    gf.close();
    std::filesystem::remove_all(dir);
  }
};

void BM_Insert(benchmark::State& state) {
  for (auto _ : state) {
    state.PauseTiming();
    BenchDb db(0);
    std::mt19937 rng(2);
    state.ResumeTiming();
    for (int i = 0; i < state.range(0); ++i)
      db.gf.insert(Tuple{Value{int32_t(rng() % 100000)},
                         Value{int32_t(rng() % 100000)},
                         Value{int32_t(rng() % 100000)}, Value{i}});
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Insert)->Arg(2000)->Unit(benchmark::kMillisecond);

void BM_PointQuery(benchmark::State& state) {
  BenchDb db(10000);
  std::mt19937 rng(3);
  for (auto _ : state) {
    const Tuple& probe = db.data[rng() % db.data.size()];
    benchmark::DoNotOptimize(db.gf.point_query({probe[0], probe[1], probe[2]}));
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_PointQuery);

void BM_RegionScan(benchmark::State& state) {
  BenchDb db(10000);
  std::mt19937 rng(4);
  for (auto _ : state) {
    int32_t lo = int32_t(rng() % 90000);
    RegionSet r;
    Box b = full_box(db.gf.schema());
    b[0].lo = encode_value(db.gf.schema().attrs[0], Value{lo});
    b[0].hi = encode_value(db.gf.schema().attrs[0], Value{lo + 10000});
    r.boxes.push_back(std::move(b));
    benchmark::DoNotOptimize(db.gf.scan_region(r));
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_RegionScan);

void BM_OrderedScan(benchmark::State& state) {
  BenchDb db(5000);
  for (auto _ : state) {
    RegionSet whole;
    whole.boxes.push_back(full_box(db.gf.schema()));
    size_t n = 0;
    db.gf.ordered_scan(0, whole, false, [&](const Tuple&) { ++n; });
    benchmark::DoNotOptimize(n);
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_OrderedScan);

}  // namespace

BENCHMARK_MAIN();
