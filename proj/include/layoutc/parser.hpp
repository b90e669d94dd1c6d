#pragma once

#include <set>
#include <string>
#include <vector>

#include "layoutc/ast.hpp"

namespace layoutc {

struct ParseResult {
  Program program;
  std::vector<Diagnostic> diags;
  bool ok() const { return diags.empty(); }
};

// Parses one source into a fresh Program. `known_types` carries type names
// declared by earlier files of the same compile set so that e.g. `qbox3x8`
// resolves as a vector of a user type.
ParseResult parse_source(const std::string& text, int file_id,
                         const std::set<std::string>& known_types = {});

// Parses several sources and merges them; duplicate type/func/layout/build
// names across the set are diagnosed.
ParseResult parse_sources(const SourceSet& sources);

// Convenience single-file entry points matching the per-language operations.
ParseResult parse_traversal(const std::string& text, int file_id = 0);
ParseResult parse_layout(const std::string& text, int file_id = 0);
ParseResult parse_build(const std::string& text, int file_id = 0);

}  // namespace layoutc
