#include "poa/sim/simulator.hpp"

#include <algorithm>
#include <memory>
#include <string>

namespace poa::sim {

void DelayModel::validate() const {
  if (base_latency < 0 || jitter < 0 || delta <= 0 || gst < 0) throw ConfigError("delay parameters must be non-negative");
  for (const auto& [link, base] : link_base) {
    if (base < 0) throw ConfigError("negative link latency");
  }
  for (const auto& w : partitions) {
    if (w.end < w.start) throw ConfigError("partition window ends before it starts");
    if (w.end > gst) throw ConfigError("partition window must end before the stabilization time");
    for (double p : {w.drop, w.duplicate}) {
      if (p < 0 || p > 1) throw ConfigError("partition probabilities must lie in [0, 1]");
    }
    if (w.reorder < 0) throw ConfigError("negative reorder span");
  }
}

Simulator::Simulator(DelayModel delays, std::uint64_t seed, Trace* trace, std::uint64_t max_events)
    : delays_(std::move(delays)), rng_(derive_seed(seed, "simnet")), trace_(trace), max_events_(max_events) {
  delays_.validate();
}

NodeId Simulator::add_node(Node* node, double clock_skew) {
  nodes_.push_back(node);
  skew_.push_back(clock_skew);
  up_.push_back(true);
  return static_cast<NodeId>(nodes_.size() - 1);
}

Simulator::EventId Simulator::at(SimTime t, NodeId owner, std::function<void()> fn) {
  const EventId id = ++seq_;
  queue_.push(Queued{std::max(t, now_), id, id});
  pending_.emplace(id, Pending{owner, std::move(fn)});
  return id;
}

double Simulator::sample_delay(NodeId from, NodeId to) {
  auto it = delays_.link_base.find({from, to});
  const double base = it != delays_.link_base.end() ? it->second : delays_.base_latency;
  return base + delays_.jitter * rng_.uniform_real(0, 1);
}

void Simulator::send(NodeId from, NodeId to, Bytes msg, std::string_view kind) {
  if (from >= nodes_.size() || to >= nodes_.size()) throw std::out_of_range("send to unknown node");
  if (!up_[from]) return;
  if (trace_) trace_->record({{"t", now_}, {"ev", "send"}, {"from", from}, {"to", to}, {"kind", kind}});

  double delay = sample_delay(from, to);
  int copies = 1;
  for (const auto& w : delays_.partitions) {
    if (now_ < w.start || now_ >= w.end) continue;
    if (!w.nodes.empty() && !w.nodes.contains(from) && !w.nodes.contains(to)) continue;
    if (w.drop > 0 && rng_.bernoulli(w.drop)) {
      if (trace_) {
        trace_->record({{"t", now_}, {"ev", "drop"}, {"from", from}, {"to", to}, {"kind", kind}, {"why", "partition"}});
      }
      return;
    }
    if (w.duplicate > 0 && rng_.bernoulli(w.duplicate)) copies = 2;
    if (w.reorder > 0) delay += rng_.uniform_real(0, w.reorder);
  }
  if (now_ >= delays_.gst) delay = std::min(delay, delays_.delta);

  auto shared = std::make_shared<const Bytes>(std::move(msg));
  const std::string k(kind);
  for (int c = 0; c < copies; ++c) {
    const double d = c == 0 ? delay : delay + sample_delay(from, to);
    at(now_ + d, kNoOwner, [this, from, to, shared, k] { deliver(from, to, shared, k); });
  }
}

void Simulator::deliver(NodeId from, NodeId to, const std::shared_ptr<const Bytes>& msg, std::string_view kind) {
  if (!up_[to]) {
    if (trace_) trace_->record({{"t", now_}, {"ev", "drop"}, {"from", from}, {"to", to}, {"kind", kind}, {"why", "down"}});
    return;
  }
  if (trace_) trace_->record({{"t", now_}, {"ev", "deliver"}, {"from", from}, {"to", to}, {"kind", kind}});
  nodes_[to]->on_message(from, *msg);
}

void Simulator::crash(NodeId id) {
  if (!up_.at(id)) return;
  up_[id] = false;
  if (trace_) trace_->record({{"t", now_}, {"ev", "crash"}, {"node", id}});
}

void Simulator::recover(NodeId id) {
  if (up_.at(id)) return;
  up_[id] = true;
  if (trace_) trace_->record({{"t", now_}, {"ev", "recover"}, {"node", id}});
  nodes_[id]->on_recover();
}

void Simulator::start() {
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    if (up_[i]) nodes_[i]->on_start();
  }
}

Simulator::RunResult Simulator::run_until(SimTime t, const std::function<bool()>& stop) {
  while (!queue_.empty() && queue_.top().time <= t) {
    const Queued q = queue_.top();
    queue_.pop();
    auto it = pending_.find(q.id);
    if (it == pending_.end()) continue;
    Pending p = std::move(it->second);
    pending_.erase(it);
    now_ = q.time;
    if (p.owner != kNoOwner && !up_[p.owner]) continue;
    if (++processed_ > max_events_) {
      throw EventBudgetExceeded("event budget of " + std::to_string(max_events_) + " exhausted at t=" +
                                std::to_string(now_));
    }
    p.fn();
    if (stop && stop()) return {now_, true};
  }
  now_ = std::max(now_, t);
  return {now_, false};
}

}  // namespace poa::sim
