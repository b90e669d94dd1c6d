#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace layoutc {

// Source span, 1-based line/column. file_id indexes into a SourceSet.
struct Span {
  int file_id = -1;
  int line = 0;
  int col = 0;
  int end_line = 0;
  int end_col = 0;
};

enum class DiagCode {
  None = 0,
  SyntaxError,
  DuplicateName,
  NonExhaustiveSplit,
  CyclicDerive,
  TypeMismatch,
  AmbiguousField,
  MissingField,
  MissingBuilder,
  UnbuiltField,
  DoubleBuild,
  BadReturnType,
  UninitializedTreeDep,
  UnsupportedPattern,
  BadAttribute,
  InternalError,
};

const char* diag_code_name(DiagCode c);

enum class Severity { Error, Warning };

struct Diagnostic {
  DiagCode code = DiagCode::None;
  Severity severity = Severity::Error;
  Span span;
  std::string message;
  // For syntax errors: the token set the parser would have accepted.
  std::vector<std::string> expected;
};

struct SourceFile {
  std::string name;
  std::string text;
};

class SourceSet {
 public:
  int add(std::string name, std::string text) {
    files_.push_back({std::move(name), std::move(text)});
    return static_cast<int>(files_.size()) - 1;
  }
  const SourceFile& file(int id) const { return files_.at(static_cast<size_t>(id)); }
  int count() const { return static_cast<int>(files_.size()); }

 private:
  std::vector<SourceFile> files_;
};

// "file:line:col: severity: message [Code]", one per line.
std::string format_diagnostic(const SourceSet& sources, const Diagnostic& d);
void print_diagnostics(const SourceSet& sources, const std::vector<Diagnostic>& diags);

struct InternalError : std::exception {
  explicit InternalError(std::string m) : msg(std::move(m)) {}
  const char* what() const noexcept override { return msg.c_str(); }
  std::string msg;
};

}  // namespace layoutc
