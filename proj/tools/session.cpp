#include "session.hpp"

#include <iomanip>
#include <iostream>
#include <sstream>

namespace gridrel {

namespace {

std::string trim(const std::string& s) {
  size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::string csv_field(const std::string& v) {
  if (v.find_first_of(",\"\n") == std::string::npos) return v;
  std::string out = "\"";
  for (char c : v) {
    if (c == '"') out += "\"\"";
    else out.push_back(c);
  }
  return out + "\"";
}

}  // namespace

Session::Session(const SessionConfig& cfg) : cfg_(cfg) {
  Database::Config dc;
  dc.dir = cfg.db_dir;
  dc.page_size = cfg.page_size;
  dc.use_cache = cfg.use_cache;
  dc.policy = cfg.policy;
  db_ = std::make_unique<Database>(dc);
}

void Session::print_result(const ExecResult& r, std::ostream& out) {
  switch (r.kind) {
    case ExecResult::Kind::Ok:
      out << "ok\n";
      return;
    case ExecResult::Kind::Count:
      if (cfg_.csv)
        out << "affected," << r.count << "\n";
      else
        out << r.count << " row(s) affected\n";
      return;
    case ExecResult::Kind::Rows:
      break;
  }
  if (cfg_.csv) {
    for (size_t c = 0; c < r.columns.size(); ++c)
      out << (c ? "," : "") << csv_field(r.columns[c]);
    out << "\n";
    for (const auto& row : r.rows) {
      for (size_t c = 0; c < row.size(); ++c)
        out << (c ? "," : "") << csv_field(value_to_string(row[c]));
      out << "\n";
    }
    return;
  }
  std::vector<size_t> width(r.columns.size());
  for (size_t c = 0; c < r.columns.size(); ++c) width[c] = r.columns[c].size();
  std::vector<std::vector<std::string>> cells;
  for (const auto& row : r.rows) {
    std::vector<std::string> line;
    for (size_t c = 0; c < row.size(); ++c) {
      line.push_back(value_to_string(row[c]));
      width[c] = std::max(width[c], line.back().size());
    }
    cells.push_back(std::move(line));
  }
  for (size_t c = 0; c < r.columns.size(); ++c)
    out << (c ? "  " : "") << std::left << std::setw(int(width[c])) << r.columns[c];
  out << "\n";
  for (size_t c = 0; c < r.columns.size(); ++c)
    out << (c ? "  " : "") << std::string(width[c], '-');
  out << "\n";
  for (const auto& line : cells) {
    for (size_t c = 0; c < line.size(); ++c)
      out << (c ? "  " : "") << std::left << std::setw(int(width[c])) << line[c];
    out << "\n";
  }
  out << "(" << r.rows.size() << " row" << (r.rows.size() == 1 ? "" : "s")
      << ")\n";
}

void Session::print_stats(const std::string& rel, std::ostream& out) {
  std::vector<std::string> names;
  if (!rel.empty())
    names.push_back(rel);
  else
    names = db_->relation_names();
  for (const std::string& name : names) {
    GridStats st = db_->relation_stats(name);
    const RelationSchema schema = db_->catalog().lookup(name);
    if (cfg_.csv) {
      out << "stats," << name << ",tuples," << st.tuple_count << "\n";
      out << "stats," << name << ",buckets," << st.bucket_count << "\n";
      out << "stats," << name << ",overflow_pages," << st.overflow_pages << "\n";
      out << "stats," << name << ",occupancy," << std::fixed
          << std::setprecision(3) << st.occupancy << "\n";
      out << "stats," << name << ",redundancy," << std::fixed
          << std::setprecision(3) << st.redundancy << "\n";
      for (size_t d = 0; d < st.partitions.size(); ++d)
        out << "stats," << name << ",partitions."
            << schema.grid_attr(d).name << "," << st.partitions[d] << "\n";
    } else {
      out << name << ": tuples=" << st.tuple_count
          << " buckets=" << st.bucket_count
          << " overflow_pages=" << st.overflow_pages << " occupancy="
          << std::fixed << std::setprecision(1) << st.occupancy * 100 << "%"
          << " redundancy=" << std::setprecision(2) << st.redundancy
          << " partitions:";
      for (size_t d = 0; d < st.partitions.size(); ++d)
        out << " " << schema.grid_attr(d).name << "=" << st.partitions[d];
      out << "\n";
    }
  }
}

void Session::print_access(std::ostream& out) {
  AccessStats st = db_->access_stats();
  if (cfg_.csv) {
    out << "access,data," << st.data_reads << "," << st.data_writes << "\n";
    out << "access,dir," << st.dir_reads << "," << st.dir_writes << "\n";
    out << "access,scales," << st.scale_reads << "," << st.scale_writes << "\n";
    out << "access,total," << st.reads() << "," << st.writes() << "\n";
  } else {
    out << "data   reads=" << st.data_reads << " writes=" << st.data_writes << "\n";
    out << "dir    reads=" << st.dir_reads << " writes=" << st.dir_writes << "\n";
    out << "scales reads=" << st.scale_reads << " writes=" << st.scale_writes << "\n";
    out << "total  reads=" << st.reads() << " writes=" << st.writes()
        << " (" << st.total() << " page accesses)\n";
  }
}

bool Session::dot_command(const std::string& line, std::ostream& out) {
  std::istringstream in(line);
  std::string cmd;
  in >> cmd;
  try {
    if (cmd == ".quit" || cmd == ".exit") {
      quit_ = true;
      return true;
    }
    if (cmd == ".help") {
      out << "statements end with ';'\n"
             ".stats [REL]     grid statistics per relation\n"
             ".access          page-access counters since last reset\n"
             ".reset           zero the counters\n"
             ".explain QUERY   show the plan for a SELECT\n"
             ".quit            leave\n";
      return true;
    }
    if (cmd == ".stats") {
      std::string rel;
      in >> rel;
      print_stats(rel, out);
      return true;
    }
    if (cmd == ".access") {
      print_access(out);
      return true;
    }
    if (cmd == ".reset") {
      db_->reset_access_stats();
      out << "ok\n";
      return true;
    }
    if (cmd == ".explain") {
      std::string rest = trim(line.substr(cmd.size()));
      if (!rest.empty() && rest.back() == ';') rest.pop_back();
      out << db_->explain(rest);
      return true;
    }
  } catch (const EngineError& e) {
    out << "error: " << e.what() << "\n";
    return false;
  }
  out << "error: unknown command " << cmd << "\n";
  return false;
}

bool Session::handle(const std::string& input, std::ostream& out) {
  std::string text = trim(input);
  if (text.empty()) return true;
  if (text[0] == '.') return dot_command(text, out);
  try {
    ExecResult r = db_->execute(text);
    print_result(r, out);
    return true;
  } catch (const EngineError& e) {
    out << "error: " << e.what() << "\n";
    return false;
  }
}

int Session::run_stream(std::istream& in, std::ostream& out, bool interactive) {
  std::string buffer;
  std::string line;
  int rc = 0;
  if (interactive) out << "gridrel> " << std::flush;
  while (!quit_ && std::getline(in, line)) {
    std::string t = trim(line);
    if (buffer.empty() && (t.empty() || t.rfind("--", 0) == 0)) {
      if (interactive) out << "gridrel> " << std::flush;
      continue;
    }
    if (buffer.empty() && t[0] == '.') {
      if (!dot_command(t, out) && cfg_.strict) return 1;
      if (interactive && !quit_) out << "gridrel> " << std::flush;
      continue;
    }
    buffer += (buffer.empty() ? "" : "\n") + line;
    if (t.empty() || t.back() != ';') {
      if (interactive) out << "     -> " << std::flush;
      continue;
    }
    bool ok = handle(buffer, out);
    buffer.clear();
    if (!ok && cfg_.strict) return 1;
    if (!ok) rc = 0;  // non-strict keeps going and still exits 0
    if (interactive && !quit_) out << "gridrel> " << std::flush;
  }
  if (!buffer.empty()) {
    bool ok = handle(buffer, out);
    if (!ok && cfg_.strict) return 1;
  }
  return rc;
}

}  // namespace gridrel
