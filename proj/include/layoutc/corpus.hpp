#pragma once

#include <string>
#include <vector>

#include "layoutc/diag.hpp"
#include "layoutc/parser.hpp"

namespace layoutc {

enum class Family { Bvh2, Dop14, Bvh8 };

struct CorpusLayout {
  std::string name;        // CLI-facing name, e.g. "pbrt-q16"
  std::string file;        // relative to the corpus directory
  Family family = Family::Bvh2;
  int table_stride = -1;   // expected node bytes when the layout has a known size
  std::string node_group;  // group whose stride realizes the node size
  bool in_matrix = false;  // part of the verification matrix
};

// Registry of shipped layouts.
const std::vector<CorpusLayout>& corpus_layouts();
const CorpusLayout* find_corpus_layout(const std::string& name);

// Corpus root: LAYOUTC_CORPUS env var or the compiled-in default.
std::string corpus_dir();

std::string read_text_file(const std::string& path);

// Relative source file paths composing a compile set.
std::vector<std::string> corpus_files_for_layout(const std::string& layout_name);
std::vector<std::string> corpus_files_for_pair(const std::string& layout_name,
                                               const std::string& algorithm);

// Loads the given corpus-relative (or absolute) files into a SourceSet.
SourceSet load_sources(const std::vector<std::string>& files);

// Parse + merge a compile set; throws InternalError on unreadable files.
ParseResult parse_corpus(const std::vector<std::string>& files, SourceSet* sources_out = nullptr);

const char* family_name(Family f);

}  // namespace layoutc
