#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <queue>
#include <set>
#include <stdexcept>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "poa/crypto/bytes.hpp"
#include "poa/crypto/rng.hpp"
#include "poa/sim/trace.hpp"

namespace poa::sim {

using NodeId = std::uint32_t;
using SimTime = double;

inline constexpr NodeId kNoOwner = 0xffffffffu;

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class EventBudgetExceeded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Failed-state window: links touching `nodes` (all links if empty) drop,
/// duplicate, or delay messages by up to `reorder` extra seconds.
struct PartitionWindow {
  SimTime start = 0;
  SimTime end = 0;
  std::set<NodeId> nodes;
  double drop = 0;
  double duplicate = 0;
  double reorder = 0;
};

struct DelayModel {
  double base_latency = 0.05;
  double jitter = 0.02;
  /// Directed (from, to) base-latency overrides.
  std::map<std::pair<NodeId, NodeId>, double> link_base;
  /// Global stabilization time; afterwards every delay is capped at delta.
  SimTime gst = 0;
  double delta = 1.0;
  std::vector<PartitionWindow> partitions;

  /// Throws ConfigError when a window outlives gst or a value is out of range.
  void validate() const;
};

class Node {
 public:
  virtual ~Node() = default;
  virtual void on_start() {}
  virtual void on_message(NodeId from, const Bytes& msg) = 0;
  virtual void on_recover() {}
};

/// Deterministic discrete-event loop. Events are ordered by (time, sequence);
/// all randomness comes from the seeded Rng, so a seed fixes the trace.
class Simulator {
 public:
  using EventId = std::uint64_t;

  Simulator(DelayModel delays, std::uint64_t seed, Trace* trace, std::uint64_t max_events = 50'000'000);

  NodeId add_node(Node* node, double clock_skew = 0);
  std::size_t node_count() const { return nodes_.size(); }

  SimTime now() const { return now_; }
  double local_clock(NodeId id) const { return now_ + skew_.at(id); }
  /// Simulated time at which node `id`'s clock shows `local`.
  SimTime when_local(NodeId id, double local) const { return local - skew_.at(id); }

  /// Events owned by a node are skipped while it is down.
  EventId at(SimTime t, NodeId owner, std::function<void()> fn);
  EventId after(double delay, NodeId owner, std::function<void()> fn) { return at(now_ + delay, owner, std::move(fn)); }
  void cancel(EventId id) { pending_.erase(id); }

  void send(NodeId from, NodeId to, Bytes msg, std::string_view kind);

  void crash(NodeId id);
  void recover(NodeId id);
  bool up(NodeId id) const { return up_.at(id); }

  Rng& rng() { return rng_; }
  Trace* trace() { return trace_; }
  std::uint64_t events_processed() const { return processed_; }

  /// Calls on_start on every node (at the current time).
  void start();

  struct RunResult {
    SimTime end = 0;
    bool stopped = false;
  };
  /// Processes events with time <= t, checking `stop` after each event.
  /// Throws EventBudgetExceeded when max_events is reached.
  RunResult run_until(SimTime t, const std::function<bool()>& stop = {});

 private:
  struct Queued {
    SimTime time;
    std::uint64_t seq;
    EventId id;
    bool operator>(const Queued& o) const { return time != o.time ? time > o.time : seq > o.seq; }
  };
  struct Pending {
    NodeId owner;
    std::function<void()> fn;
  };

  double sample_delay(NodeId from, NodeId to);
  void deliver(NodeId from, NodeId to, const std::shared_ptr<const Bytes>& msg, std::string_view kind);

  DelayModel delays_;
  Rng rng_;
  Trace* trace_;
  std::uint64_t max_events_;
  SimTime now_ = 0;
  std::uint64_t seq_ = 0;
  std::uint64_t processed_ = 0;
  std::priority_queue<Queued, std::vector<Queued>, std::greater<>> queue_;
  std::unordered_map<EventId, Pending> pending_;
  std::vector<Node*> nodes_;
  std::vector<double> skew_;
  std::vector<bool> up_;
};

}  // namespace poa::sim
