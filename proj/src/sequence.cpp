#include "semamark/sequence.hpp"

#include <fstream>
#include <stdexcept>

namespace semamark {

std::string to_string(Label label) {
  switch (label) {
    case Label::WatermarkedSemamark: return "watermarked-semamark";
    case Label::WatermarkedLefthash: return "watermarked-lefthash";
    case Label::Unwatermarked: return "unwatermarked";
    case Label::Attacked: return "attacked";
  }
  throw std::logic_error("unknown label");
}

Label label_from_string(const std::string& s) {
  if (s == "watermarked-semamark") return Label::WatermarkedSemamark;
  if (s == "watermarked-lefthash") return Label::WatermarkedLefthash;
  if (s == "unwatermarked") return Label::Unwatermarked;
  if (s == "attacked") return Label::Attacked;
  throw std::invalid_argument("unknown sequence label: " + s);
}

nlohmann::json to_json(const TokenSequence& seq) {
  return nlohmann::json{{"tokens", seq.tokens},
                        {"prompt_len", seq.prompt_len},
                        {"label", to_string(seq.label)},
                        {"provenance", seq.provenance}};
}

TokenSequence sequence_from_json(const nlohmann::json& j) {
  TokenSequence seq;
  seq.tokens = j.at("tokens").get<std::vector<TokenId>>();
  seq.prompt_len = j.at("prompt_len").get<int>();
  seq.label = label_from_string(j.at("label").get<std::string>());
  seq.provenance = j.value("provenance", nlohmann::json::object());
  if (seq.prompt_len < 0 || seq.prompt_len > seq.length()) {
    throw std::invalid_argument("prompt_len outside [0, length]");
  }
  return seq;
}

void write_jsonl(const std::string& path, const std::vector<TokenSequence>& seqs) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw std::runtime_error("cannot open output file: " + path);
  }
  for (const auto& seq : seqs) {
    out << to_json(seq).dump() << '\n';
  }
  if (!out) {
    throw std::runtime_error("failed writing " + path);
  }
}

std::vector<TokenSequence> read_jsonl(const std::string& path,
                                      std::vector<std::string>* errors) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw std::runtime_error("cannot open input file: " + path);
  }
  std::vector<TokenSequence> seqs;
  std::string line;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) {
      continue;
    }
    try {
      seqs.push_back(sequence_from_json(nlohmann::json::parse(line)));
    } catch (const std::exception& e) {
      if (errors == nullptr) {
        throw std::runtime_error("line " + std::to_string(line_no) + ": " + e.what());
      }
      errors->push_back("line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return seqs;
}

}  // namespace semamark
