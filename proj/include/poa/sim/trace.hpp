#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "poa/crypto/bytes.hpp"

namespace poa::sim {

/// Newline-delimited JSON event log. Records keep insertion order; the trace
/// hash is SHA-256 over the serialized text, so equal seeds give equal hashes.
class Trace {
 public:
  void record(nlohmann::json rec) { records_.push_back(std::move(rec)); }
  const std::vector<nlohmann::json>& records() const { return records_; }
  std::size_t size() const { return records_.size(); }

  std::string to_ndjson() const;
  Digest hash() const;

  /// Throws std::invalid_argument naming the bad line.
  static Trace from_ndjson(std::string_view text);

 private:
  std::vector<nlohmann::json> records_;
};

}  // namespace poa::sim
