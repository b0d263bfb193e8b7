#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "semamark/embedding.hpp"

namespace semamark {

enum class Label {
  WatermarkedSemamark,
  WatermarkedLefthash,
  Unwatermarked,
  Attacked,
};

std::string to_string(Label label);
Label label_from_string(const std::string& s);

// Unit of watermarking, attack and detection: token ids plus provenance.
// provenance is a free-form JSON object (seeds, attack parameters, config
// hash) carried through the pipeline untouched.
struct TokenSequence {
  std::vector<TokenId> tokens;
  int prompt_len = 0;
  Label label = Label::Unwatermarked;
  nlohmann::json provenance = nlohmann::json::object();

  int length() const { return static_cast<int>(tokens.size()); }
};

nlohmann::json to_json(const TokenSequence& seq);
TokenSequence sequence_from_json(const nlohmann::json& j);

void write_jsonl(const std::string& path, const std::vector<TokenSequence>& seqs);

// Reads a JSON-lines file. Malformed lines are reported to `errors` as
// "line N: reason" and skipped; parsing continues.
std::vector<TokenSequence> read_jsonl(const std::string& path,
                                      std::vector<std::string>* errors = nullptr);

}  // namespace semamark
