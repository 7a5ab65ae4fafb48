#ifndef GRIDREL_PARSER_HPP_
#define GRIDREL_PARSER_HPP_

#include <string>

#include "gridrel/ast.hpp"

namespace gridrel {

class ParseError : public EngineError {
 public:
  ParseError(size_t pos, const std::string& expected, const std::string& got)
      : EngineError("syntax error at offset " + std::to_string(pos) +
                    ": expected " + expected + ", got " + got),
        pos_(pos),
        expected_(expected) {}

  size_t position() const { return pos_; }
  const std::string& expected() const { return expected_; }

 private:
  size_t pos_;
  std::string expected_;
};

// Parses one statement (an optional trailing ';' is accepted). Keywords and
// identifiers are case-insensitive; string literals are single-quoted with
// '' as the embedded-quote escape.
Statement parse_statement(const std::string& text);

}  // namespace gridrel

#endif  // GRIDREL_PARSER_HPP_
