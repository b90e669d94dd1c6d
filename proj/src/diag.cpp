#include "layoutc/diag.hpp"

#include <iostream>
#include <sstream>

namespace layoutc {

const char* diag_code_name(DiagCode c) {
  switch (c) {
    case DiagCode::None: return "None";
    case DiagCode::SyntaxError: return "SyntaxError";
    case DiagCode::DuplicateName: return "DuplicateName";
    case DiagCode::NonExhaustiveSplit: return "NonExhaustiveSplit";
    case DiagCode::CyclicDerive: return "CyclicDerive";
    case DiagCode::TypeMismatch: return "TypeMismatch";
    case DiagCode::AmbiguousField: return "AmbiguousField";
    case DiagCode::MissingField: return "MissingField";
    case DiagCode::MissingBuilder: return "MissingBuilder";
    case DiagCode::UnbuiltField: return "UnbuiltField";
    case DiagCode::DoubleBuild: return "DoubleBuild";
    case DiagCode::BadReturnType: return "BadReturnType";
    case DiagCode::UninitializedTreeDep: return "UninitializedTreeDep";
    case DiagCode::UnsupportedPattern: return "UnsupportedPattern";
    case DiagCode::BadAttribute: return "BadAttribute";
    case DiagCode::InternalError: return "InternalError";
  }
  return "Unknown";
}

std::string format_diagnostic(const SourceSet& sources, const Diagnostic& d) {
  std::ostringstream os;
  std::string file = "<input>";
  if (d.span.file_id >= 0 && d.span.file_id < sources.count())
    file = sources.file(d.span.file_id).name;
  os << file << ':' << d.span.line << ':' << d.span.col << ": "
     << (d.severity == Severity::Error ? "error" : "warning") << ": [" << diag_code_name(d.code)
     << "] " << d.message;
  return os.str();
}

void print_diagnostics(const SourceSet& sources, const std::vector<Diagnostic>& diags) {
  for (const auto& d : diags) std::cerr << format_diagnostic(sources, d) << '\n';
}

}  // namespace layoutc
