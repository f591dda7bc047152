#pragma once

#include <nlohmann/json_fwd.hpp>

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "scramble/curves.hpp"
#include "scramble/ed.hpp"
#include "scramble/model.hpp"

namespace scramble {

using json = nlohmann::json;

// Result rows are JSON objects, one per line. Every row carries the full
// (params, seed, index) key, so files can be merged or replayed in any
// order and consumers never depend on line position.

json to_json(const ModelParams& params);
ModelParams params_from_json(const json& j);

struct EdRecord {
  ModelParams params;
  std::uint64_t seed = 0;
  int index = 0;
  EdObservables obs;
  double window = kSpectrumWindow;
};

json to_json(const EdRecord& rec);
EdRecord ed_record_from_json(const json& j);

json to_json(const OtocCurve& curve);
OtocCurve curve_from_json(const json& j);

// Line-oriented append writer. Each line is flushed and fsynced before the
// call returns, so a killed run leaves at most one torn final line, which
// readers skip.
class JsonlWriter {
 public:
  explicit JsonlWriter(const std::filesystem::path& path, bool append = true);
  ~JsonlWriter();
  JsonlWriter(const JsonlWriter&) = delete;
  JsonlWriter& operator=(const JsonlWriter&) = delete;

  void write_line(const json& j);
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
  int fd_ = -1;
};

// All intact lines of a JSONL file (missing file -> empty, torn tail
// tolerated, anything else malformed throws).
std::vector<json> read_jsonl(const std::filesystem::path& path);

// FNV-1a over the canonical (sorted-key, compact) dump.
std::uint64_t json_content_hash(const json& j);

}  // namespace scramble
