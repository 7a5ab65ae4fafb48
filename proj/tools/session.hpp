#ifndef GRIDREL_TOOLS_SESSION_HPP_
#define GRIDREL_TOOLS_SESSION_HPP_

#include <iosfwd>
#include <memory>
#include <string>

#include "gridrel/database.hpp"

namespace gridrel {

struct SessionConfig {
  std::string db_dir;
  SplitPolicy policy = SplitPolicy::RoundRobin;
  uint32_t page_size = 4096;
  bool use_cache = true;
  bool strict = false;
  bool csv = false;  // false = aligned
  uint64_t seed = 42;
};

// Interactive or scripted statement loop over one database. Statements end
// with ';'; lines starting with '.' are commands (.stats, .access, .reset,
// .explain <query>, .quit, .help); '--' lines are comments.
class Session {
 public:
  explicit Session(const SessionConfig& cfg);

  // Executes one complete statement or dot command. Returns false when the
  // input failed (parse, analysis or execution error was printed).
  bool handle(const std::string& input, std::ostream& out);

  // Reads statements until EOF (or .quit). Returns the process exit code:
  // 0, or 1 when strict mode stopped at a failing statement.
  int run_stream(std::istream& in, std::ostream& out, bool interactive);

  Database& db() { return *db_; }
  const SessionConfig& config() const { return cfg_; }

 private:
  bool dot_command(const std::string& line, std::ostream& out);
  void print_result(const ExecResult& r, std::ostream& out);
  void print_stats(const std::string& rel, std::ostream& out);
  void print_access(std::ostream& out);

  SessionConfig cfg_;
  std::unique_ptr<Database> db_;
  bool quit_ = false;
};

}  // namespace gridrel

#endif  // GRIDREL_TOOLS_SESSION_HPP_
