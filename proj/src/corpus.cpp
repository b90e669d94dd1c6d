#include "layoutc/corpus.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

namespace layoutc {

const std::vector<CorpusLayout>& corpus_layouts() {
  static const std::vector<CorpusLayout> table = {
      {"identity", "layouts/identity.scion", Family::Bvh2, -1, "node", true},
      {"ptr", "layouts/ptr.scion", Family::Bvh2, 48, "node", true},
      {"pbrt", "layouts/pbrt.scion", Family::Bvh2, 32, "nodes", true},
      {"pbrt-align16", "layouts/pbrt_align16.scion", Family::Bvh2, 32, "nodes", false},
      {"pbrt-post", "layouts/pbrt_post.scion", Family::Bvh2, -1, "nodes", true},
      {"pbrt-q16", "layouts/pbrt_q16.scion", Family::Bvh2, 16, "nodes", true},
      {"sg-eq", "layouts/sg_eq.scion", Family::Bvh2, 12, "nodes", true},
      {"sg-eq-align16", "layouts/sg_eq_align16.scion", Family::Bvh2, 16, "nodes", false},
      {"shared-slab", "layouts/shared_slab.scion", Family::Bvh2, -1, "node", true},
      {"dop14", "layouts/dop14.scion", Family::Dop14, -1, "nodes", true},
      {"bvh8", "layouts/bvh8.scion", Family::Bvh8, 256, "Interiors", true},
      {"bvh8-q8", "layouts/bvh8_q8.scion", Family::Bvh8, 136, "Interiors", false},
      {"bvh8-q8-ci", "layouts/bvh8_q8_ci.scion", Family::Bvh8, 104, "Interiors", true},
      {"bvh8-q16", "layouts/bvh8_q16.scion", Family::Bvh8, 184, "Interiors", false},
      {"bvh8-q16-ci", "layouts/bvh8_q16_ci.scion", Family::Bvh8, 152, "Interiors", false},
  };
  return table;
}

const CorpusLayout* find_corpus_layout(const std::string& name) {
  for (const auto& l : corpus_layouts())
    if (l.name == name) return &l;
  return nullptr;
}

std::string corpus_dir() {
  if (const char* env = std::getenv("LAYOUTC_CORPUS")) return env;
#ifdef LAYOUTC_CORPUS_DIR
  return LAYOUTC_CORPUS_DIR;
#else
  return "corpus";
#endif
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InternalError("cannot open file: " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

const char* family_name(Family f) {
  switch (f) {
    case Family::Bvh2: return "bvh2";
    case Family::Dop14: return "dop14";
    case Family::Bvh8: return "bvh8";
  }
  return "?";
}

std::vector<std::string> corpus_files_for_layout(const std::string& layout_name) {
  const CorpusLayout* l = find_corpus_layout(layout_name);
  if (!l) throw InternalError("unknown corpus layout: " + layout_name);
  std::vector<std::string> files = {"lib/geometry.scion"};
  if (l->family == Family::Dop14) files.push_back("lib/dop.scion");
  files.push_back(l->file);
  return files;
}

std::vector<std::string> corpus_files_for_pair(const std::string& layout_name,
                                               const std::string& algorithm) {
  const CorpusLayout* l = find_corpus_layout(layout_name);
  if (!l) throw InternalError("unknown corpus layout: " + layout_name);
  std::vector<std::string> files = {"lib/geometry.scion"};
  if (l->family == Family::Dop14) files.push_back("lib/dop.scion");
  std::string alg_file;
  if (algorithm == "chrt") {
    alg_file = l->family == Family::Bvh8 ? "alg/chrt8.scion"
               : l->family == Family::Dop14 ? "alg/chrt_dop14.scion"
                                            : "alg/chrt.scion";
  } else if (algorithm == "cpq") {
    if (l->family == Family::Bvh8) throw InternalError("cpq requires a binary layout");
    alg_file = l->family == Family::Dop14 ? "alg/cpq_dop14.scion" : "alg/cpq.scion";
  } else if (algorithm == "cd") {
    if (l->family == Family::Bvh8) throw InternalError("cd requires a binary layout");
    alg_file = l->family == Family::Dop14 ? "alg/cd_dop14.scion" : "alg/cd.scion";
  } else {
    throw InternalError("unknown algorithm: " + algorithm);
  }
  files.push_back(alg_file);
  files.push_back(l->file);
  return files;
}

SourceSet load_sources(const std::vector<std::string>& files) {
  SourceSet ss;
  std::string root = corpus_dir();
  for (const auto& f : files) {
    std::string path = f;
    bool is_abs = !f.empty() && f[0] == '/';
    bool exists = false;
    {
      std::ifstream probe(path);
      exists = probe.good();
    }
    if (!is_abs && !exists) path = root + "/" + f;
    ss.add(f, read_text_file(path));
  }
  return ss;
}

ParseResult parse_corpus(const std::vector<std::string>& files, SourceSet* sources_out) {
  SourceSet ss = load_sources(files);
  ParseResult r = parse_sources(ss);
  if (sources_out) *sources_out = ss;
  return r;
}

}  // namespace layoutc
