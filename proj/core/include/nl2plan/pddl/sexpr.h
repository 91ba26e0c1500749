#ifndef NL2PLAN_PDDL_SEXPR_H
#define NL2PLAN_PDDL_SEXPR_H

#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace nl2plan::pddl {

struct SourcePos {
  int line = 1;
  int column = 1;
};

// Raised for every syntactic or semantic problem found while reading PDDL.
// The hint is a one-line suggestion that is safe to hand back to an LLM.
class ParseError : public std::runtime_error {
 public:
  ParseError(SourcePos pos, const std::string& message, std::string hint = {});

  SourcePos pos() const { return pos_; }
  const std::string& detail() const { return detail_; }
  const std::string& hint() const { return hint_; }

 private:
  SourcePos pos_;
  std::string detail_;
  std::string hint_;
};

// A node of a Lisp-style expression. Symbols are lowercased on read.
struct SExpr {
  enum class Kind { Symbol, List };

  Kind kind = Kind::List;
  std::string symbol;
  std::vector<SExpr> items;
  SourcePos pos;
  SourcePos end;  // position of the closing paren for lists

  bool is_symbol() const { return kind == Kind::Symbol; }
  bool is_list() const { return kind == Kind::List; }
  bool is_symbol(std::string_view s) const {
    return kind == Kind::Symbol && symbol == s;
  }
  // True for a list whose first element is the given symbol.
  bool head_is(std::string_view s) const {
    return is_list() && !items.empty() && items.front().is_symbol(s);
  }
  const std::string& head() const;

  std::string to_string() const;
};

// Result of reading a whole text: top-level expressions plus the trailing
// comment found on each line (without the leading ';').
struct SExprDocument {
  std::vector<SExpr> exprs;
  std::map<int, std::string> line_comments;

  const std::string* comment_on(int line) const;
};

SExprDocument read_sexprs(std::string_view text);

std::string to_lower(std::string_view s);

// Letters, digits, '_' and '-', starting with a letter.
bool is_identifier(std::string_view s);

}  // namespace nl2plan::pddl

#endif
