#pragma once

#include <fstream>
#include <ostream>
#include <string>
#include <vector>

#include "json.hpp"
#include "liangyi/metrics/matrix.hpp"

namespace liangyi {

// JSONL event sink. Events carry no timestamps so that two runs with the
// same seed write identical bytes.
class EventLog {
 public:
  EventLog() = default;
  explicit EventLog(std::ostream* out) : out_(out) {}

  void attach(std::ostream* out) { out_ = out; }

  void emit(const nlohmann::json& event) {
    std::string line = event.dump();
    if (out_) {
      *out_ << line << '\n';
      out_->flush();
    }
    lines_.push_back(std::move(line));
  }

  long long count() const { return static_cast<long long>(lines_.size()); }
  const std::vector<std::string>& lines() const { return lines_; }

  // Restores the in-memory view after a resume (the file already has them).
  void preload(std::vector<std::string> lines) { lines_ = std::move(lines); }

 private:
  std::ostream* out_ = nullptr;
  std::vector<std::string> lines_;
};

inline nlohmann::json member_to_json(const Member& m) {
  return {{"id", m.id}, {"genes", m.config.genes}, {"birth", m.birth_cycle}};
}

inline Member member_from_json(const nlohmann::json& j) {
  Member m;
  m.id = j.at("id").get<AlgorithmId>();
  m.config = SolverConfig::from_genes(j.at("genes").get<std::array<int, 5>>());
  m.birth_cycle = j.at("birth").get<int>();
  return m;
}

inline nlohmann::json members_to_json(std::span<const Member> ap) {
  nlohmann::json out = nlohmann::json::array();
  for (const Member& m : ap) out.push_back(member_to_json(m));
  return out;
}

inline std::vector<Member> members_from_json(const nlohmann::json& arr) {
  std::vector<Member> out;
  for (const auto& j : arr) out.push_back(member_from_json(j));
  return out;
}

inline std::vector<std::string> read_log_lines(const std::string& path) {
  std::ifstream in(path);
  std::vector<std::string> out;
  std::string line;
  while (std::getline(in, line))
    if (!line.empty()) out.push_back(line);
  return out;
}

}  // namespace liangyi
