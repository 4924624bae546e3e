#include "poa/sim/trace.hpp"

#include <sstream>

#include "poa/crypto/hash.hpp"

namespace poa::sim {

std::string Trace::to_ndjson() const {
  std::string out;
  for (const auto& r : records_) {
    out += r.dump();
    out += '\n';
  }
  return out;
}

Digest Trace::hash() const { return crypto::sha256(as_bytes(to_ndjson())); }

Trace Trace::from_ndjson(std::string_view text) {
  Trace t;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (line.empty()) continue;
    try {
      t.record(nlohmann::json::parse(line));
    } catch (const nlohmann::json::exception& e) {
      throw std::invalid_argument("trace line " + std::to_string(n) + ": " + e.what());
    }
  }
  return t;
}

}  // namespace poa::sim
