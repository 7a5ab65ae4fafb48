#include "gridrel/page_store.hpp"

#include <cstring>
#include <filesystem>

namespace gridrel {

namespace {

constexpr uint32_t kMagic = 0x47524446;  // "GRDF"
constexpr uint32_t kVersion = 1;
constexpr uint32_t kMinPageSize = 256;

const char* kExt[3] = {".dat", ".dir", ".scales"};

void put_u32(uint8_t* p, uint32_t v) {
  p[0] = uint8_t(v);
  p[1] = uint8_t(v >> 8);
  p[2] = uint8_t(v >> 16);
  p[3] = uint8_t(v >> 24);
}
uint32_t get_u32(const uint8_t* p) {
  return uint32_t(p[0]) | (uint32_t(p[1]) << 8) | (uint32_t(p[2]) << 16) |
         (uint32_t(p[3]) << 24);
}
void put_u64(uint8_t* p, uint64_t v) {
  put_u32(p, uint32_t(v));
  put_u32(p + 4, uint32_t(v >> 32));
}
uint64_t get_u64(const uint8_t* p) {
  return uint64_t(get_u32(p)) | (uint64_t(get_u32(p + 4)) << 32);
}

}  // namespace

PageStore::~PageStore() {
  try {
    if (open_) close();
  } catch (...) {
  }
}

PageStore::PageStore(PageStore&& other) noexcept { *this = std::move(other); }

PageStore& PageStore::operator=(PageStore&& other) noexcept {
  if (this == &other) return *this;
  try {
    if (open_) close();
  } catch (...) {
  }
  base_ = std::move(other.base_);
  for (int i = 0; i < 3; ++i) files_[i] = std::move(other.files_[i]);
  header_ = other.header_;
  stats_ = other.stats_;
  open_ = other.open_;
  use_cache_ = other.use_cache_;
  cache_capacity_ = other.cache_capacity_;
  cache_ = std::move(other.cache_);
  lru_ = std::move(other.lru_);
  trace_enabled_ = other.trace_enabled_;
  trace_capture_writes_ = other.trace_capture_writes_;
  trace_ = std::move(other.trace_);
  other.open_ = false;
  return *this;
}

PageStore PageStore::create(const std::string& base, const Options& opts,
                            const RelationHeader& engine_fields) {
  if (opts.page_size < kMinPageSize || (opts.page_size & (opts.page_size - 1)))
    throw EngineError("page size must be a power of two >= 256");
  if (exists(base)) throw EngineError("relation files already exist: " + base);

  PageStore s;
  s.base_ = base;
  s.header_ = engine_fields;
  s.header_.page_size = opts.page_size;
  s.header_.free_list_head = 0;
  s.header_.page_count[0] = s.header_.page_count[1] = s.header_.page_count[2] = 0;
  s.use_cache_ = opts.use_cache;
  s.cache_capacity_ = opts.cache_pages;
  for (int r = 0; r < 3; ++r) {
    std::string path = base + kExt[r];
    std::ofstream touch(path, std::ios::binary | std::ios::trunc);
    if (!touch) throw EngineError("cannot create " + path);
  }
  for (int r = 0; r < 3; ++r) {
    std::string path = base + kExt[r];
    s.files_[r].open(path, std::ios::binary | std::ios::in | std::ios::out);
    if (!s.files_[r]) throw EngineError("cannot open " + path);
  }
  s.open_ = true;
  s.write_header_page();
  return s;
}

PageStore PageStore::open(const std::string& base, bool use_cache,
                          size_t cache_pages) {
  PageStore s;
  s.base_ = base;
  s.use_cache_ = use_cache;
  s.cache_capacity_ = cache_pages;
  for (int r = 0; r < 3; ++r) {
    std::string path = base + kExt[r];
    s.files_[r].open(path, std::ios::binary | std::ios::in | std::ios::out);
    if (!s.files_[r]) throw EngineError("cannot open " + path);
  }
  s.open_ = true;
  s.read_header_page();
  return s;
}

bool PageStore::exists(const std::string& base) {
  return std::filesystem::exists(base + kExt[0]);
}

void PageStore::remove_files(const std::string& base) {
  for (int r = 0; r < 3; ++r) std::filesystem::remove(base + kExt[r]);
}

void PageStore::close() {
  if (!open_) return;
  write_header_page();
  for (auto& f : files_) f.close();
  cache_.clear();
  lru_.clear();
  open_ = false;
}

std::fstream& PageStore::file_for(FileRole role) {
  return files_[static_cast<size_t>(role)];
}

uint64_t PageStore::physical_offset(PageId id) const {
  uint64_t phys = id.index;
  if (id.role == FileRole::Data) phys += 1;  // page 0 is the header
  return phys * header_.page_size;
}

void PageStore::count_read(FileRole role) {
  switch (role) {
    case FileRole::Data: ++stats_.data_reads; break;
    case FileRole::Directory: ++stats_.dir_reads; break;
    case FileRole::Scales: ++stats_.scale_reads; break;
  }
}

void PageStore::count_write(FileRole role) {
  switch (role) {
    case FileRole::Data: ++stats_.data_writes; break;
    case FileRole::Directory: ++stats_.dir_writes; break;
    case FileRole::Scales: ++stats_.scale_writes; break;
  }
}

void PageStore::check_allocated(PageId id) const {
  if (!open_) throw EngineError("store is closed");
  if (id.index >= header_.page_count[static_cast<size_t>(id.role)])
    throw EngineError("unknown page " + std::to_string(id.index));
}

void PageStore::raw_read(PageId id, uint8_t* out) {
  auto& f = file_for(id.role);
  f.clear();
  f.seekg(static_cast<std::streamoff>(physical_offset(id)));
  f.read(reinterpret_cast<char*>(out), header_.page_size);
  if (!f) throw EngineError("i/o failure reading page");
  count_read(id.role);
  if (trace_enabled_) trace_.push_back({false, id, {}});
}

void PageStore::raw_write(PageId id, const uint8_t* data) {
  auto& f = file_for(id.role);
  f.clear();
  f.seekp(static_cast<std::streamoff>(physical_offset(id)));
  f.write(reinterpret_cast<const char*>(data), header_.page_size);
  if (!f) throw EngineError("i/o failure writing page");
  f.flush();
  count_write(id.role);
  if (trace_enabled_) {
    TraceEvent ev{true, id, {}};
    if (trace_capture_writes_)
      ev.content.assign(data, data + header_.page_size);
    trace_.push_back(std::move(ev));
  }
}

bool PageStore::cache_get(PageId id, uint8_t* out) {
  if (!use_cache_) return false;
  auto it = cache_.find(key_of(id));
  if (it == cache_.end()) return false;
  lru_.splice(lru_.begin(), lru_, it->second.lru_it);
  std::memcpy(out, it->second.content.data(), header_.page_size);
  return true;
}

void PageStore::cache_put(PageId id, const uint8_t* data) {
  if (!use_cache_) return;
  CacheKey key = key_of(id);
  auto it = cache_.find(key);
  if (it != cache_.end()) {
    it->second.content.assign(data, data + header_.page_size);
    lru_.splice(lru_.begin(), lru_, it->second.lru_it);
    return;
  }
  if (cache_.size() >= cache_capacity_ && !lru_.empty()) {
    cache_.erase(lru_.back());
    lru_.pop_back();
  }
  lru_.push_front(key);
  cache_[key] = CacheEntry{Bytes(data, data + header_.page_size), lru_.begin()};
}

PageId PageStore::alloc(FileRole role) {
  if (!open_) throw EngineError("store is closed");
  Bytes zero(header_.page_size, 0);
  if (role == FileRole::Data && header_.free_list_head != 0) {
    uint32_t index = header_.free_list_head - 1;
    PageId id{FileRole::Data, index};
    Bytes page(header_.page_size);
    raw_read(id, page.data());
    header_.free_list_head = get_u32(page.data());
    raw_write(id, zero.data());
    cache_put(id, zero.data());
    return id;
  }
  uint32_t index = header_.page_count[static_cast<size_t>(role)]++;
  PageId id{role, index};
  raw_write(id, zero.data());
  cache_put(id, zero.data());
  return id;
}

void PageStore::free_data_page(uint32_t index) {
  PageId id{FileRole::Data, index};
  check_allocated(id);
  Bytes page(header_.page_size, 0);
  put_u32(page.data(), header_.free_list_head);
  raw_write(id, page.data());
  cache_.erase(key_of(id));
  header_.free_list_head = index + 1;
}

void PageStore::read(PageId id, uint8_t* out) {
  check_allocated(id);
  if (cache_get(id, out)) return;
  raw_read(id, out);
  cache_put(id, out);
}

void PageStore::write(PageId id, const uint8_t* data) {
  check_allocated(id);
  raw_write(id, data);
  cache_put(id, data);
}

Bytes PageStore::read_page(PageId id) {
  Bytes b(header_.page_size);
  read(id, b.data());
  return b;
}

void PageStore::write_page(PageId id, const Bytes& content) {
  if (content.size() != header_.page_size)
    throw EngineError("wrong page length");
  write(id, content.data());
}

void PageStore::set_trace(bool enabled, bool capture_writes) {
  trace_enabled_ = enabled;
  trace_capture_writes_ = capture_writes;
}

// Header page layout, all little-endian (documented in docs/file-formats.md).
void PageStore::write_header_page() {
  Bytes page(header_.page_size, 0);
  uint8_t* p = page.data();
  put_u32(p + 0, kMagic);
  put_u32(p + 4, kVersion);
  put_u32(p + 8, header_.page_size);
  put_u32(p + 12, header_.free_list_head);
  put_u32(p + 16, header_.page_count[0]);
  put_u32(p + 20, header_.page_count[1]);
  put_u32(p + 24, header_.page_count[2]);
  put_u64(p + 28, header_.schema_hash);
  put_u32(p + 36, header_.tuple_width);
  put_u32(p + 40, header_.bucket_capacity);
  put_u32(p + 44, header_.grid_dims);
  p[48] = static_cast<uint8_t>(header_.policy);
  p[49] = header_.word_size;
  put_u32(p + 52, header_.next_split_dim);
  put_u64(p + 56, header_.tuple_count);
  auto& f = files_[0];
  f.clear();
  f.seekp(0);
  f.write(reinterpret_cast<const char*>(p), header_.page_size);
  if (!f) throw EngineError("i/o failure writing header");
  f.flush();
  ++stats_.data_writes;
}

void PageStore::read_header_page() {
  // Page size is discovered from the fixed prefix before reading the rest.
  uint8_t fixed[12];
  auto& f = files_[0];
  f.clear();
  f.seekg(0);
  f.read(reinterpret_cast<char*>(fixed), sizeof fixed);
  if (!f) throw EngineError("corrupt header: short read");
  if (get_u32(fixed) != kMagic) throw EngineError("corrupt header: bad magic");
  if (get_u32(fixed + 4) != kVersion)
    throw EngineError("corrupt header: bad version");
  uint32_t page_size = get_u32(fixed + 8);
  if (page_size < kMinPageSize) throw EngineError("corrupt header: page size");
  Bytes page(page_size);
  f.clear();
  f.seekg(0);
  f.read(reinterpret_cast<char*>(page.data()), page_size);
  if (!f) throw EngineError("corrupt header: short page");
  const uint8_t* p = page.data();
  header_.page_size = page_size;
  header_.free_list_head = get_u32(p + 12);
  header_.page_count[0] = get_u32(p + 16);
  header_.page_count[1] = get_u32(p + 20);
  header_.page_count[2] = get_u32(p + 24);
  header_.schema_hash = get_u64(p + 28);
  header_.tuple_width = get_u32(p + 36);
  header_.bucket_capacity = get_u32(p + 40);
  header_.grid_dims = get_u32(p + 44);
  header_.policy = static_cast<SplitPolicy>(p[48]);
  header_.word_size = p[49];
  header_.next_split_dim = get_u32(p + 52);
  header_.tuple_count = get_u64(p + 56);
  ++stats_.data_reads;
}

void PageStore::flush_header() { write_header_page(); }

}  // namespace gridrel
