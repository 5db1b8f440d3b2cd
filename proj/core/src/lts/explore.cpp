#include "ttm/lts/explore.hpp"

#include <algorithm>
#include <chrono>
#include <cstring>
#include <exception>
#include <thread>

#include <fmt/format.h>
#include <json.hpp>

namespace ttm::lts {

namespace {
constexpr std::size_t kBatch = 512;
}  // namespace

StateStore::StateStore(int width) : width_(static_cast<std::size_t>(width)), table_(1024, 0) {}

std::uint64_t StateStore::hash(const Value* c) const {
  std::uint64_t h = 0x9E3779B97F4A7C15ULL;
  for (std::size_t i = 0; i < width_; ++i) {
    h ^= static_cast<std::uint32_t>(c[i]);
    h *= 0xff51afd7ed558ccdULL;
    h ^= h >> 32;
  }
  return h;
}

void StateStore::grow() {
  std::vector<std::uint32_t> next(table_.size() * 2, 0);
  const std::size_t mask = next.size() - 1;
  for (std::uint32_t id = 0; id < count_; ++id) {
    std::size_t i = hash(get(id)) & mask;
    while (next[i]) i = (i + 1) & mask;
    next[i] = id + 1;
  }
  table_ = std::move(next);
}

std::int64_t StateStore::find(const Value* c) const {
  const std::size_t mask = table_.size() - 1;
  for (std::size_t i = hash(c) & mask; table_[i]; i = (i + 1) & mask)
    if (std::memcmp(get(table_[i] - 1), c, width_ * sizeof(Value)) == 0) return table_[i] - 1;
  return -1;
}

std::pair<std::uint32_t, bool> StateStore::insert(const Value* c) {
  if ((count_ + 1) * 2 > table_.size()) grow();
  const std::size_t mask = table_.size() - 1;
  std::size_t i = hash(c) & mask;
  for (; table_[i]; i = (i + 1) & mask)
    if (std::memcmp(get(table_[i] - 1), c, width_ * sizeof(Value)) == 0) return {table_[i] - 1, false};
  auto id = static_cast<std::uint32_t>(count_++);
  arena_.insert(arena_.end(), c, c + width_);
  table_[i] = id + 1;
  return {id, true};
}

void erase_last(const System& sys, Value* c) {
  c[sys.p_offset()] = -1;
  c[sys.p_offset() + 1] = 0;
}

TransitionName edge_label(const System& sys, const Value* from, const Value* to, bool ignore_last) {
  if (!ignore_last) return sys.last(to);
  const std::size_t w = static_cast<std::size_t>(sys.width());
  std::vector<Successor> succ;
  sys.successors(from, succ);
  for (auto& s : succ) {
    erase_last(sys, s.config.data());
    if (std::equal(s.config.begin(), s.config.end(), to, to + w)) return s.name;
  }
  throw Error(ErrorKind::ReplayDivergence, "no transition connects the two configurations");
}

std::string format_stats(const ExploreStats& s) {
  return fmt::format("states={} transitions={} peak_frontier={} depth={} deadlocks={}", s.states, s.transitions,
                     s.peak_frontier, s.depth, s.deadlocks);
}

LtsGraph explore(const System& sys, const ExploreOptions& opts) {
  const auto t0 = std::chrono::steady_clock::now();
  const std::size_t w = static_cast<std::size_t>(sys.width());
  LtsGraph g{StateStore(sys.width()), {}, {}, {}, {}, opts.ignore_last};
  Configuration init = sys.initial();
  if (opts.ignore_last) erase_last(sys, init.data());
  g.store.insert(init.data());
  if (opts.keep_edges) g.offsets.push_back(0);

  const int workers = std::max(1, opts.workers);
  std::vector<std::uint32_t> frontier{0}, next;
  std::vector<std::vector<Value>> buffers;
  auto fail = [&](std::size_t expanded) {
    g.stats.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    g.stats.states = g.store.size();
    throw Error(ErrorKind::StateLimitExceeded,
                fmt::format("state limit exceeded after {} expanded configurations ({}; limit {} states, {} MiB)",
                            expanded, format_stats(g.stats), opts.max_states, opts.max_bytes >> 20));
  };

  std::size_t expanded = 0;
  while (!frontier.empty()) {
    g.stats.peak_frontier = std::max(g.stats.peak_frontier, frontier.size());
    next.clear();
    // Batches bound the memory held by unsorted successor buffers.
    for (std::size_t base = 0; base < frontier.size(); base += kBatch) {
      const std::size_t batch = std::min(kBatch, frontier.size() - base);
      buffers.assign(batch, {});
      // Successor computation is pure; run it in parallel, insert in order.
      auto work = [&](std::size_t lo, std::size_t hi) {
        for (std::size_t k = lo; k < hi; ++k) {
          sys.successor_configs(g.store.get(frontier[base + k]), buffers[k]);
          if (opts.ignore_last)
            for (std::size_t off = 0; off < buffers[k].size(); off += w) erase_last(sys, buffers[k].data() + off);
        }
      };
      if (workers == 1 || batch < 64) {
        work(0, batch);
      } else {
        std::vector<std::thread> pool;
        std::vector<std::exception_ptr> errors(static_cast<std::size_t>(workers));
        const std::size_t chunk = (batch + static_cast<std::size_t>(workers) - 1) / static_cast<std::size_t>(workers);
        for (int t = 0; t < workers; ++t) {
          std::size_t lo = static_cast<std::size_t>(t) * chunk, hi = std::min(batch, lo + chunk);
          if (lo >= hi) break;
          pool.emplace_back([&, lo, hi, t] {
            try {
              work(lo, hi);
            } catch (...) {
              errors[static_cast<std::size_t>(t)] = std::current_exception();
            }
          });
        }
        for (auto& th : pool) th.join();
        for (auto& e : errors)
          if (e) std::rethrow_exception(e);
      }
  
      for (std::size_t k = 0; k < batch; ++k) {
        const auto& buf = buffers[k];
        const std::size_t n = buf.size() / w;
        if (n == 0) {
          g.deadlocks.push_back(frontier[base + k]);
          ++g.stats.deadlocks;
        }
        for (std::size_t j = 0; j < n; ++j) {
          auto [id, fresh] = g.store.insert(buf.data() + j * w);
          if (fresh) {
            next.push_back(id);
            if (g.store.size() > opts.max_states || g.store.bytes() > opts.max_bytes) fail(expanded);
          }
          if (opts.keep_edges) g.targets.push_back(id);
        }
        g.stats.transitions += n;
        if (opts.keep_edges) g.offsets.push_back(g.targets.size());
        ++expanded;
        std::vector<Value>().swap(buffers[k]);
      }
    }
    frontier.swap(next);
    if (!frontier.empty()) ++g.stats.depth;
  }
  g.stats.states = g.store.size();
  g.stats.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return g;
}

std::string graph_json(const System& sys, const LtsGraph& g) {
  nlohmann::json nodes = nlohmann::json::array();
  nlohmann::json edges = nlohmann::json::array();
  for (std::uint32_t s = 0; s < g.size(); ++s) {
    nodes.push_back({{"id", s}, {"config", nlohmann::json::parse(sys.to_json(g.store.config(s)))}});
    if (g.offsets.empty()) continue;
    for (const auto* t = g.begin(s); t != g.end(s); ++t)
      edges.push_back({{"from", s},
                       {"to", *t},
                       {"label", sys.render(edge_label(sys, g.store.get(s), g.store.get(*t), g.ignore_last))}});
  }
  nlohmann::json j{{"nodes", std::move(nodes)}, {"edges", std::move(edges)}, {"states", g.size()},
                   {"transitions", g.stats.transitions}};
  return j.dump(2);
}

}  // namespace ttm::lts
