#include "poa/pbft/replica.hpp"

#include <algorithm>
#include <limits>

namespace poa::pbft {

using chain::Block;
using nlohmann::json;

namespace {
constexpr std::size_t kMaxBuffered = 2048;

std::uint64_t cert_height(const PreparedCert& c) { return PrePrepare::decode(c.preprepare.body).height; }
std::uint64_t cert_view(const PreparedCert& c) { return PrePrepare::decode(c.preprepare.body).view; }
}  // namespace

Replica::Replica(ReplicaConfig cfg, ReplicaKeys keys, std::unique_ptr<SigningMode> mode, ReplicaContext& ctx,
                 Bridge& bridge, Rng rng, Behavior* behavior)
    : cfg_(std::move(cfg)),
      keys_(std::move(keys)),
      mode_(std::move(mode)),
      ctx_(ctx),
      bridge_(bridge),
      rng_(std::move(rng)),
      behavior_(behavior ? behavior : &default_behavior_),
      timeout_(cfg_.view_change_timeout) {
  cfg_.validate();
  if (keys_.auth_keys.size() != cfg_.n) throw std::invalid_argument("one authenticator key per replica required");
  mode_->attach(*this);
}

void Replica::trace(json rec) {
  rec["node"] = cfg_.id;
  ctx_.trace(std::move(rec));
}

SignedMessage Replica::make(MsgKind kind, Bytes body) { return seal(kind, cfg_.id, std::move(body), keys_.auth, rng_); }

void Replica::emit(const SignedMessage& m, std::optional<std::uint32_t> to) {
  if (behavior_->silent()) return;
  const Bytes bytes = m.encode();
  if (to) {
    ctx_.send(*to, bytes);
  } else {
    ctx_.broadcast(bytes);
  }
}

void Replica::inject(MsgKind kind, Bytes body, std::optional<std::uint32_t> to) {
  emit(make(kind, std::move(body)), to);
}

const Block* Replica::block_at(RoundRef ref) const {
  auto it = log_.find(ref);
  return it != log_.end() && it->second.preprepare ? &it->second.block : nullptr;
}

bool Replica::locally_committed(RoundRef ref) const {
  auto it = log_.find(ref);
  return it != log_.end() && it->second.committed;
}

// ---------------------------------------------------------------- requests

void Replica::start() { schedule_request(); }

void Replica::schedule_request() {
  if (request_timer_) {
    ctx_.cancel_timer(*request_timer_);
    request_timer_.reset();
  }
  const std::uint64_t n = current_height();
  if (n > cfg_.max_height || n <= requested_height_) return;
  const double at = cfg_.nominal(n) - cfg_.lead_delta;
  if (ctx_.local_clock() >= at) {
    generate_request(n);
  } else {
    request_timer_ = ctx_.set_timer(at, [this, n] {
      request_timer_.reset();
      generate_request(n);
    });
  }
}

void Replica::generate_request(std::uint64_t height) {
  if (height != current_height() || height <= requested_height_) return;
  requested_height_ = height;
  trace({{"ev", "request"}, {"height", height}, {"ts", cfg_.t0 + height * cfg_.tau}});
  start_timer();
  if (is_primary() && !in_view_change_) propose(height);
}

void Replica::start_timer() {
  if (!cfg_.view_change_enabled || vc_timer_) return;
  vc_timer_ = ctx_.set_timer(ctx_.local_clock() + timeout_, [this] {
    vc_timer_.reset();
    start_view_change((in_view_change_ ? pending_view_ : view_) + 1);
  });
}

void Replica::stop_timer() {
  if (vc_timer_) ctx_.cancel_timer(*vc_timer_);
  vc_timer_.reset();
}

void Replica::propose(std::uint64_t height) {
  const RoundRef ref{view_, height};
  if (block_at(ref)) return;
  Block block = chain::grind(bridge_.build_template(height));
  Slot& s = log_[ref];

  if (behavior_->equivocate()) {
    // Odd backups get the honest template, even backups a conflicting one.
    Block other = block;
    other.transactions[0] = chain::Transaction::coinbase(height, block.transactions[0].subsidy, as_bytes("equivocation"));
    other.header.merkle_root = chain::merkle_root_excluding_solution(other.transactions);
    other = chain::grind(std::move(other));
    const SignedMessage a = make(MsgKind::PrePrepare, PrePrepare{view_, height, block}.encode());
    const SignedMessage b = make(MsgKind::PrePrepare, PrePrepare{view_, height, other}.encode());
    trace({{"ev", "equivocate"}, {"height", height}, {"view", view_},
           {"digests", {to_hex(block.hash()), to_hex(other.hash())}}});
    for (std::uint32_t r = 0; r < cfg_.n; ++r) {
      if (r != cfg_.id) emit(r % 2 ? a : b, r);
    }
    log_preprepare(s, ref, a, block);
    return;
  }

  const SignedMessage m = make(MsgKind::PrePrepare, PrePrepare{view_, height, block}.encode());
  trace({{"ev", "preprepare_sent"}, {"height", height}, {"view", view_}, {"digest", to_hex(block.hash())}});
  emit(m);
  log_preprepare(s, ref, m, block);
}

// ---------------------------------------------------------------- dispatch

void Replica::on_message(std::uint32_t from, ByteView bytes) {
  SignedMessage m;
  try {
    m = SignedMessage::decode(bytes);
  } catch (const DecodeError&) {
    trace({{"ev", "malformed"}, {"from", from}});
    return;
  }
  if (m.sender != from || !verify_seal(m, keys_.auth_keys)) {
    trace({{"ev", "bad_seal"}, {"from", from}, {"kind", to_string(m.kind)}});
    return;
  }
  try {
    dispatch(from, m, false);
  } catch (const DecodeError&) {
    trace({{"ev", "malformed"}, {"from", from}, {"kind", to_string(m.kind)}});
  }
}

bool Replica::buffer_if_future(std::uint32_t from, const SignedMessage& m, std::uint64_t view, std::uint64_t height) {
  if (view < view_ || height < current_height()) return false;
  if (view > view_ || height > current_height()) {
    if (buffered_.size() < kMaxBuffered) buffered_.emplace_back(from, m);
    return true;
  }
  return false;
}

void Replica::dispatch(std::uint32_t from, const SignedMessage& m, bool) {
  auto current = [&](std::uint64_t view, std::uint64_t height) {
    if (buffer_if_future(from, m, view, height)) return false;
    return view == view_ && height == current_height() && !in_view_change_;
  };
  switch (m.kind) {
    case MsgKind::PrePrepare: {
      const PrePrepare pp = PrePrepare::decode(m.body);
      if (current(pp.view, pp.height)) handle_preprepare(m, pp);
      break;
    }
    case MsgKind::Prepare: {
      const Prepare p = Prepare::decode(m.body);
      if (current(p.view, p.height)) handle_prepare(m, p);
      break;
    }
    case MsgKind::Commit: {
      const Commit c = Commit::decode(m.body);
      if (current(c.view, c.height)) handle_commit(m, c);
      break;
    }
    case MsgKind::Extension: {
      const Extension e = Extension::decode(m.body);
      if (current(e.view, e.height)) handle_extension(m, e);
      break;
    }
    case MsgKind::ViewChange:
      handle_view_change(m, ViewChange::decode(m.body));
      break;
    case MsgKind::NewView:
      handle_new_view(m, NewView::decode(m.body));
      break;
  }
}

void Replica::replay_buffered() {
  std::vector<std::pair<std::uint32_t, SignedMessage>> pending;
  pending.swap(buffered_);
  for (const auto& [from, m] : pending) {
    try {
      dispatch(from, m, true);
    } catch (const DecodeError&) {
    }
  }
}

// ---------------------------------------------------------------- normal case

void Replica::handle_preprepare(const SignedMessage& m, const PrePrepare& pp) {
  const RoundRef ref{pp.view, pp.height};
  if (m.sender != cfg_.primary(pp.view)) {
    trace({{"ev", "reject_preprepare"}, {"height", pp.height}, {"view", pp.view}, {"reason", "not-primary"}});
    return;
  }
  Slot& s = log_[ref];
  const Digest digest = pp.block.hash();
  if (s.preprepare) {
    if (digest != s.digest) {
      trace({{"ev", "conflicting_preprepare"}, {"height", pp.height}, {"view", pp.view}, {"digest", to_hex(digest)}});
    }
    return;
  }
  const double local = ctx_.local_clock();
  const chain::RejectReason r = bridge_.chain().validate(pp.block, {.template_only = true, .local_clock = local});
  if (r != chain::RejectReason::Accept) {
    trace({{"ev", "reject_preprepare"}, {"height", pp.height}, {"view", pp.view}, {"digest", to_hex(digest)},
           {"reason", to_string(r)}, {"ts", pp.block.header.timestamp}, {"local_clock", local}});
    return;
  }
  trace({{"ev", "preprepare_accepted"}, {"height", pp.height}, {"view", pp.view}, {"digest", to_hex(digest)},
         {"ts", pp.block.header.timestamp}, {"local_clock", local}});
  log_preprepare(s, ref, m, pp.block);
}

void Replica::log_preprepare(Slot& s, RoundRef ref, const SignedMessage& m, const Block& block) {
  s.preprepare = m;
  s.block = block;
  s.digest = block.hash();

  const Bytes extra = mode_->prepare_payload(block, ref);
  mode_->on_prepare_payload(cfg_.id, ref, extra);
  if (cfg_.primary(ref.view) != cfg_.id) {
    const SignedMessage p = make(MsgKind::Prepare, Prepare{ref.view, ref.height, s.digest, extra}.encode());
    s.prepares[cfg_.id] = {s.digest, p};
    emit(p);
  }

  auto pending = std::move(s.pending_commits);
  s.pending_commits.clear();
  for (const auto& [sender, c] : pending) accept_commit(s, ref, sender, c);
  check_prepared(s, ref);
}

void Replica::handle_prepare(const SignedMessage& m, const Prepare& p) {
  const RoundRef ref{p.view, p.height};
  if (m.sender == cfg_.primary(p.view)) return;
  Slot& s = log_[ref];
  if (s.prepares.contains(m.sender)) return;
  s.prepares[m.sender] = {p.digest, m};
  mode_->on_prepare_payload(m.sender, ref, p.extra);
  check_prepared(s, ref);
}

void Replica::check_prepared(Slot& s, RoundRef ref) {
  if (s.prepared || !s.preprepare) return;
  std::vector<SignedMessage> matching;
  for (const auto& [sender, entry] : s.prepares) {
    if (entry.first == s.digest) matching.push_back(entry.second);
  }
  if (matching.size() + 1 < cfg_.q) return;
  s.prepared = true;
  matching.resize(cfg_.q - 1);
  trace({{"ev", "prepared"}, {"height", ref.height}, {"view", ref.view}, {"digest", to_hex(s.digest)}});
  if (!prepared_cert_ || ref.view >= prepared_cert_view_) {
    prepared_cert_ = PreparedCert{*s.preprepare, matching};
    prepared_cert_view_ = ref.view;
  }

  if (!s.commit_sent) {
    s.commit_sent = true;
    if (auto payload = mode_->commit_payload(s.block, ref)) {
      const Commit c{ref.view, ref.height, s.digest, *payload};
      trace({{"ev", "commit_sent"}, {"height", ref.height}, {"view", ref.view}, {"digest", to_hex(s.digest)},
             {"ts", s.block.header.timestamp}, {"local_clock", ctx_.local_clock()}});
      emit(make(MsgKind::Commit, c.encode()));
      accept_commit(s, ref, cfg_.id, c);
    }
  }
  check_committed(s, ref);
}

void Replica::handle_commit(const SignedMessage& m, const Commit& c) {
  const RoundRef ref{c.view, c.height};
  Slot& s = log_[ref];
  if (s.commits.contains(m.sender)) return;
  if (!s.preprepare) {
    s.pending_commits.emplace(m.sender, c);
    return;
  }
  accept_commit(s, ref, m.sender, c);
}

void Replica::accept_commit(Slot& s, RoundRef ref, std::uint32_t sender, const Commit& c) {
  if (c.digest != s.digest || s.commits.contains(sender)) return;
  if (!mode_->check_commit_payload(sender, s.block, ref, c.payload)) {
    trace({{"ev", "commit_invalid"}, {"height", ref.height}, {"view", ref.view}, {"from", sender}});
    return;
  }
  s.commits.emplace(sender, c.payload);
  check_committed(s, ref);
}

void Replica::check_committed(Slot& s, RoundRef ref) {
  if (s.committed || !s.prepared || s.commits.size() < cfg_.q) return;
  s.committed = true;
  trace({{"ev", "committed_local"}, {"height", ref.height}, {"view", ref.view}, {"digest", to_hex(s.digest)}});
  mode_->on_locally_committed(s.block, ref, s.commits);
}

void Replica::handle_extension(const SignedMessage& m, const Extension& e) {
  mode_->on_extension(m.sender, RoundRef{e.view, e.height}, e.payload);
}

void Replica::send_extension(std::uint32_t to, RoundRef ref, Bytes payload) {
  emit(make(MsgKind::Extension, Extension{ref.view, ref.height, std::move(payload)}.encode()), to);
}

void Replica::broadcast_extension(RoundRef ref, Bytes payload) {
  emit(make(MsgKind::Extension, Extension{ref.view, ref.height, std::move(payload)}.encode()));
}

void Replica::submit_solution(const Block& block, Bytes solution, const std::vector<std::uint32_t>& signers) {
  const Block signed_block = chain::attach_solution(block, std::move(solution));
  trace({{"ev", "finalize"}, {"height", block.height}, {"view", view_}, {"hash", to_hex(signed_block.hash())},
         {"solution", to_hex(*signed_block.solution())}, {"signers", signers}});
  if (behavior_->intercept_solution(*this, signed_block)) return;
  bridge_.submit_block(signed_block);
}

// ---------------------------------------------------------------- checkpoints

void Replica::on_checkpoint(const Block& block) {
  const std::uint64_t h = block.height;
  std::erase_if(log_, [h](const auto& kv) { return kv.first.height <= h; });
  if (prepared_cert_ && cert_height(*prepared_cert_) <= h) prepared_cert_.reset();
  stop_timer();
  timeout_ = cfg_.view_change_timeout;
  if (in_view_change_ && vc_height_ <= h) {
    // The request that triggered the view change has been served.
    trace({{"ev", "view_change_abandoned"}, {"to_view", pending_view_}, {"height", h}});
    in_view_change_ = false;
    pending_view_ = view_;
  }
  if (requested_height_ > h) start_timer();
  mode_->on_checkpoint(h);
  behavior_->on_tip(*this, block);
  schedule_request();
  replay_buffered();
}

void Replica::on_recover() {
  vc_timer_.reset();
  request_timer_.reset();
  if (requested_height_ >= current_height()) start_timer();
  schedule_request();
}

// ---------------------------------------------------------------- view change

bool Replica::valid_cert(const PreparedCert& cert, std::uint64_t below_view) const {
  if (cert.preprepare.kind != MsgKind::PrePrepare || !verify_seal(cert.preprepare, keys_.auth_keys)) return false;
  const PrePrepare pp = PrePrepare::decode(cert.preprepare.body);
  if (pp.view >= below_view || cert.preprepare.sender != cfg_.primary(pp.view)) return false;
  const Digest digest = pp.block.hash();
  std::set<std::uint32_t> senders;
  for (const auto& m : cert.prepares) {
    if (m.kind != MsgKind::Prepare || m.sender == cfg_.primary(pp.view) || !verify_seal(m, keys_.auth_keys)) {
      return false;
    }
    const Prepare p = Prepare::decode(m.body);
    if (p.view != pp.view || p.height != pp.height || p.digest != digest) return false;
    senders.insert(m.sender);
  }
  return senders.size() + 1 >= cfg_.q;
}

std::optional<PreparedCert> Replica::select_cert(const std::vector<std::pair<SignedMessage, ViewChange>>& vcs,
                                                 std::uint64_t& target_height) const {
  std::uint64_t max_tip = 0;
  for (const auto& [m, vc] : vcs) max_tip = std::max(max_tip, vc.tip_height);
  target_height = max_tip + 1;
  std::optional<PreparedCert> best;
  std::uint64_t best_view = 0;
  for (const auto& [m, vc] : vcs) {
    if (!vc.cert || cert_height(*vc.cert) != target_height) continue;
    const std::uint64_t v = cert_view(*vc.cert);
    if (!best || v > best_view) {
      best = vc.cert;
      best_view = v;
    }
  }
  return best;
}

void Replica::start_view_change(std::uint64_t target) {
  if (!cfg_.view_change_enabled) return;
  if (target <= view_ || (in_view_change_ && target <= pending_view_)) return;
  in_view_change_ = true;
  pending_view_ = target;
  vc_height_ = current_height();
  trace({{"ev", "view_change"}, {"from_view", view_}, {"to_view", target}, {"height", vc_height_}});

  ViewChange vc{target, tip_height(), std::nullopt};
  if (prepared_cert_ && cert_height(*prepared_cert_) == current_height()) vc.cert = prepared_cert_;
  const SignedMessage m = make(MsgKind::ViewChange, vc.encode());
  view_changes_[target][cfg_.id] = {m, vc};
  emit(m);

  timeout_ *= 2;
  stop_timer();
  vc_timer_ = ctx_.set_timer(ctx_.local_clock() + timeout_, [this] {
    vc_timer_.reset();
    start_view_change(pending_view_ + 1);
  });
  maybe_send_new_view(target);
}

void Replica::handle_view_change(const SignedMessage& m, const ViewChange& vc) {
  if (vc.new_view <= view_) {
    // A lagging replica is asking to leave a view we already left: help it catch up.
    if (last_new_view_ && m.sender != cfg_.id) emit(*last_new_view_, m.sender);
    return;
  }
  if (vc.cert && !valid_cert(*vc.cert, vc.new_view)) {
    trace({{"ev", "invalid_view_change"}, {"from", m.sender}, {"to_view", vc.new_view}});
    return;
  }
  auto& bucket = view_changes_[vc.new_view];
  if (bucket.contains(m.sender)) return;
  bucket[m.sender] = {m, vc};

  const std::uint64_t base = in_view_change_ ? pending_view_ : view_;
  std::set<std::uint32_t> senders;
  std::uint64_t smallest = std::numeric_limits<std::uint64_t>::max();
  for (const auto& [v, b] : view_changes_) {
    if (v <= base) continue;
    for (const auto& [sender, entry] : b) senders.insert(sender);
    smallest = std::min(smallest, v);
  }
  if (senders.size() >= cfg_.f_b + 1) start_view_change(smallest);
  maybe_send_new_view(vc.new_view);
}

void Replica::maybe_send_new_view(std::uint64_t target) {
  if (cfg_.primary(target) != cfg_.id || target <= view_ || new_view_sent_.contains(target)) return;
  const auto& bucket = view_changes_[target];
  if (bucket.size() < cfg_.q) return;

  std::vector<std::pair<SignedMessage, ViewChange>> chosen;
  NewView nv{target, {}, std::nullopt};
  for (const auto& [sender, entry] : bucket) {
    if (chosen.size() == cfg_.q) break;
    chosen.push_back(entry);
    nv.view_changes.push_back(entry.first);
  }
  std::uint64_t height = 0;
  if (auto cert = select_cert(chosen, height)) {
    const PrePrepare old = PrePrepare::decode(cert->preprepare.body);
    nv.preprepare = make(MsgKind::PrePrepare, PrePrepare{target, height, old.block}.encode());
  }
  new_view_sent_.insert(target);
  const SignedMessage m = make(MsgKind::NewView, nv.encode());
  emit(m);
  handle_new_view(m, nv);
}

void Replica::handle_new_view(const SignedMessage& m, const NewView& nv) {
  if (nv.view <= view_ || m.sender != cfg_.primary(nv.view) || nv.view_changes.size() < cfg_.q) return;
  std::vector<std::pair<SignedMessage, ViewChange>> vcs;
  std::set<std::uint32_t> senders;
  for (const auto& vm : nv.view_changes) {
    if (vm.kind != MsgKind::ViewChange || !verify_seal(vm, keys_.auth_keys)) return;
    ViewChange vc = ViewChange::decode(vm.body);
    if (vc.new_view != nv.view || !senders.insert(vm.sender).second) return;
    if (vc.cert && !valid_cert(*vc.cert, nv.view)) return;
    vcs.emplace_back(vm, std::move(vc));
  }
  std::uint64_t height = 0;
  const auto cert = select_cert(vcs, height);
  if (cert.has_value() != nv.preprepare.has_value()) return;
  std::optional<PrePrepare> pp;
  if (cert) {
    const SignedMessage& pm = *nv.preprepare;
    if (pm.kind != MsgKind::PrePrepare || pm.sender != m.sender || !verify_seal(pm, keys_.auth_keys)) return;
    pp = PrePrepare::decode(pm.body);
    if (pp->view != nv.view || pp->height != height ||
        pp->block.hash() != PrePrepare::decode(cert->preprepare.body).block.hash()) {
      return;
    }
  }

  last_new_view_ = m;
  install_view(nv.view);
  if (pp && pp->height == current_height()) {
    trace({{"ev", "reproposal"}, {"height", pp->height}, {"view", pp->view}, {"digest", to_hex(pp->block.hash())}});
    if (is_primary()) {
      log_preprepare(log_[RoundRef{pp->view, pp->height}], {pp->view, pp->height}, *nv.preprepare, pp->block);
    } else {
      handle_preprepare(*nv.preprepare, *pp);
    }
  } else if (pp && pp->height > current_height() && buffered_.size() < kMaxBuffered) {
    buffered_.emplace_back(m.sender, *nv.preprepare);
  }
  if (is_primary() && requested_height_ >= current_height() && !block_at({view_, current_height()})) {
    propose(current_height());
  }
  replay_buffered();
}

void Replica::install_view(std::uint64_t v) {
  view_ = v;
  in_view_change_ = false;
  pending_view_ = v;
  trace({{"ev", "new_view"}, {"view", v}, {"primary", cfg_.primary(v)}, {"height", current_height()}});
  std::erase_if(log_, [v](const auto& kv) { return kv.first.view < v; });
  std::erase_if(view_changes_, [v](const auto& kv) { return kv.first <= v; });
  stop_timer();
  if (requested_height_ >= current_height()) start_timer();
  mode_->on_view_installed(v);
}

}  // namespace poa::pbft
