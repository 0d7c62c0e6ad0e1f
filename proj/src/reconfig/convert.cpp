/* Copyright 2026 The ucp Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#include <array>
#include <atomic>
#include <map>
#include <memory>
#include <mutex>
#include <set>
#include <thread>

#include "ucp/atomic_store.hpp"
#include "ucp/fs_util.hpp"
#include "ucp/manifest.hpp"
#include "ucp/parallel.hpp"
#include "ucp/reconfig.hpp"
#include "ucp/tensor_file.hpp"

namespace ucp {

namespace fs = std::filesystem;

namespace {

std::atomic<std::uint64_t> g_invocations{0};

// First error wins; everything after it is a consequence of the abort.
class ErrorSlot {
 public:
  void set(std::exception_ptr e) {
    std::lock_guard lock(mu_);
    if (!error_) error_ = e;
    failed_ = true;
  }
  bool failed() const { return failed_.load(); }
  void rethrow() {
    if (error_) std::rethrow_exception(error_);
  }

 private:
  std::mutex mu_;
  std::exception_ptr error_;
  std::atomic<bool> failed_{false};
};

struct PendingParam {
  std::array<std::vector<FragmentMsg>, 3> msgs;
  bool dispatched = false;
};

// One reducer group: a receiving thread that buckets messages by param and
// `inner` threads that union and save completed params.
class ReducerGroup {
 public:
  ReducerGroup(const ModelSpec& spec, const std::map<std::string, std::uint64_t>& expected,
               const fs::path& out, const ConvertOptions& options, ErrorSlot& errors)
      : spec_(spec),
        expected_(expected),
        out_(out),
        options_(options),
        errors_(errors),
        inbox_(options.queue_capacity),
        ready_(spec.params.size() + 1) {}

  BoundedQueue<FragmentMsg>& inbox() { return inbox_; }
  std::uint64_t consumed() const { return consumed_; }
  std::uint64_t written() const { return written_; }

  void run() {
    std::vector<std::jthread> inner;
    for (std::uint32_t i = 0; i < std::max<std::uint32_t>(1, options_.inner); ++i) {
      inner.emplace_back([this] { work(); });
    }
    try {
      receive();
    } catch (...) {
      errors_.set(std::current_exception());
      inbox_.close();
    }
    ready_.close();
  }

  void abort() {
    inbox_.close();
    ready_.close();
  }

 private:
  void receive() {
    while (auto msg = inbox_.pop()) {
      if (errors_.failed()) continue;  // drain so producers never block
      ++consumed_;
      const std::string name = msg->entry.param;
      const auto it = expected_.find(name);
      if (it == expected_.end()) {
        throw Error(ErrorCode::kManifest, "rank " + std::to_string(msg->source_rank) +
                                              " lists unknown param " + name);
      }
      std::lock_guard lock(mu_);
      PendingParam& p = pending_[name];
      if (p.dispatched) {
        throw Error(ErrorCode::kOverlappingRange,
                    name + ": extra fragment from rank " + std::to_string(msg->source_rank));
      }
      const auto kind = static_cast<std::size_t>(msg->entry.state);
      p.msgs[kind].push_back(std::move(*msg));
      bool complete = true;
      for (const auto& v : p.msgs) complete = complete && v.size() >= it->second;
      if (complete) {
        p.dispatched = true;
        ready_.push(name);
      }
    }
    if (errors_.failed()) return;
    std::lock_guard lock(mu_);
    for (const auto& [name, p] : pending_) {
      if (!p.dispatched) {
        std::string counts;
        for (auto k : kStateKinds) {
          counts += " " + std::string(state_kind_name(k)) + "=" +
                    std::to_string(p.msgs[static_cast<std::size_t>(k)].size());
        }
        throw Error(ErrorCode::kMissingFragment,
                    name + ": expected " + std::to_string(expected_.at(name)) +
                        " fragments per state, got" + counts);
      }
    }
  }

  void work() {
    while (auto name = ready_.pop()) {
      if (errors_.failed()) continue;
      try {
        std::array<std::vector<FragmentMsg>, 3> msgs;
        {
          std::lock_guard lock(mu_);
          msgs = std::move(pending_.at(*name).msgs);
        }
        const ParamSpec& param = spec_.param(*name);
        fs::create_directories(out_ / param.name);
        for (auto k : kStateKinds) {
          const Tensor t = union_fragments(param, k, std::move(msgs[static_cast<std::size_t>(k)]),
                                           {options_.strict_replicate});
          write_tensor(atomic_file(out_, param.name, k), t);
        }
        ++written_;
      } catch (...) {
        errors_.set(std::current_exception());
      }
    }
  }

  const ModelSpec& spec_;
  const std::map<std::string, std::uint64_t>& expected_;
  const fs::path out_;
  const ConvertOptions& options_;
  ErrorSlot& errors_;
  BoundedQueue<FragmentMsg> inbox_;
  BoundedQueue<std::string> ready_;
  // pending_ nodes are stable; the mutex orders the hand-off to workers.
  std::mutex mu_;
  std::map<std::string, PendingParam> pending_;
  std::atomic<std::uint64_t> consumed_{0};
  std::atomic<std::uint64_t> written_{0};
};

}  // namespace

std::uint64_t conversion_invocations() { return g_invocations.load(); }

ConvertStats convert(const fs::path& src, const fs::path& out, const ConvertOptions& options) {
  ++g_invocations;
  if (options.workers == 0 || options.inner == 0) {
    throw Error(ErrorCode::kInvalidArgument, "convert needs at least one worker");
  }
  if (!fs::exists(src / kConfigFile)) {
    throw Error(ErrorCode::kManifest, src.string() + " has no config.json (incomplete checkpoint?)");
  }
  const std::string config_text = read_text(src / kConfigFile);
  const CheckpointMeta meta = parse_checkpoint_meta(config_text);
  const ModelSpec spec = model_from_json(read_text(src / kModelFile));
  meta.config.validate(spec.layer_slots());

  const std::uint32_t world = meta.config.world_size();
  for (std::uint32_t g = 0; g < world; ++g) {
    if (!fs::is_directory(src / rank_dir_name(g))) {
      throw Error(ErrorCode::kMissingFragment, "missing " + rank_dir_name(g));
    }
  }
  for (const auto& e : fs::directory_iterator(src)) {
    const auto name = e.path().filename().string();
    if (e.is_directory() && name.starts_with("rank_")) {
      bool known = false;
      for (std::uint32_t g = 0; g < world && !known; ++g) known = name == rank_dir_name(g);
      if (!known) throw Error(ErrorCode::kManifest, "unexpected rank directory " + name);
    }
  }

  // Fragment counts come from the config, not from the manifests under test.
  std::map<std::string, std::uint64_t> expected;
  for (const auto& p : spec.params) {
    const auto patterns = assign_pattern(spec, p, meta.config);
    const auto& w = patterns[static_cast<std::size_t>(StateKind::kWeight)];
    expected[p.name] = w.stages.size() * std::uint64_t{meta.config.tp} * meta.config.dp;
  }

  prepare_empty_dir(out);
  ConvertStats stats;
  stats.plan = plan_work(spec, options.workers);

  ErrorSlot errors;
  std::vector<std::unique_ptr<ReducerGroup>> groups;
  for (std::uint32_t w = 0; w < options.workers; ++w) {
    groups.push_back(std::make_unique<ReducerGroup>(spec, expected, out, options, errors));
  }
  std::atomic<std::uint64_t> emitted{0};
  {
    std::vector<std::jthread> reducers;
    for (auto& g : groups) reducers.emplace_back([&g] { g->run(); });

    std::atomic<std::uint32_t> next_rank{0};
    {
      std::vector<std::jthread> mappers;
      for (std::uint32_t m = 0; m < std::min(options.workers, world); ++m) {
        mappers.emplace_back([&] {
          for (;;) {
            const std::uint32_t g = next_rank.fetch_add(1);
            if (g >= world || errors.failed()) return;
            try {
              extract(src / rank_dir_name(g), [&](FragmentMsg&& msg) {
                if (errors.failed()) return;
                std::uint32_t owner;
                try {
                  owner = stats.plan.worker_of(msg.entry.param);
                } catch (const Error&) {
                  throw Error(ErrorCode::kManifest, rank_dir_name(g) + " lists unknown param " +
                                                        msg.entry.param);
                }
                ++emitted;
                groups[owner]->inbox().push(std::move(msg));
              });
            } catch (...) {
              errors.set(std::current_exception());
              for (auto& grp : groups) grp->abort();
              return;
            }
          }
        });
      }
    }
    for (auto& g : groups) g->inbox().close();
  }
  errors.rethrow();

  stats.messages_emitted = emitted;
  for (const auto& g : groups) {
    stats.messages_consumed += g->consumed();
    stats.params_written += g->written();
  }
  if (stats.params_written != spec.params.size()) {
    throw Error(ErrorCode::kMissingFragment, "only " + std::to_string(stats.params_written) +
                                                 " of " + std::to_string(spec.params.size()) +
                                                 " params written");
  }
  // Written last: a tree with ucp_meta.json is complete.
  write_text_atomic(out / kModelFile, model_to_json(spec));
  write_atomic_meta(out, {meta.step, meta.metadata, fingerprint(config_text)});
  return stats;
}

}  // namespace ucp
