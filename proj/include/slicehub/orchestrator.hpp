#ifndef SLICEHUB_ORCHESTRATOR_HPP
#define SLICEHUB_ORCHESTRATOR_HPP

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstddef>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "slicehub/grid.hpp"
#include "slicehub/slicer.hpp"

namespace slicehub {

inline constexpr std::size_t kMaxParallelism = 1000;

enum class JobState { Pending, Running, Done, Failed };

std::string_view to_string(JobState state);

struct SliceJob {
  std::string job_id;
  std::string model_id;
  CellIndex cell;
  SliceRequest request;
  JobState state = JobState::Pending;
  std::optional<SlicingResult> result;  // iff Done
  std::optional<std::string> error;     // iff Failed
  int attempts = 0;
};

struct BatchStatus {
  std::size_t total = 0;
  std::size_t completed = 0;
  std::size_t failed = 0;
  std::optional<double> eta_s;
  std::chrono::system_clock::time_point started_at;
  bool finished = false;
};

/// Runs `count` tasks with at most `parallelism` in flight and calls
/// `on_complete` exactly once after the last one returns. Must not block.
class Executor {
 public:
  virtual ~Executor() = default;
  virtual void run(std::size_t count, std::size_t parallelism,
                   std::function<void(std::size_t)> task, std::function<void()> on_complete) = 0;
};

/// Local executor: each dispatch gets its own worker threads pulling task
/// indices from a shared counter. Destruction joins everything.
class ThreadExecutor final : public Executor {
 public:
  ThreadExecutor() = default;
  ~ThreadExecutor() override;
  ThreadExecutor(const ThreadExecutor&) = delete;
  ThreadExecutor& operator=(const ThreadExecutor&) = delete;

  void run(std::size_t count, std::size_t parallelism, std::function<void(std::size_t)> task,
           std::function<void()> on_complete) override;

 private:
  struct Worker {
    std::thread thread;
    std::shared_ptr<std::atomic<bool>> done;
  };
  void reap_locked();

  std::mutex mutex_;
  std::vector<Worker> workers_;
};

using BatchId = std::string;

class Orchestrator {
 public:
  /// Called on a worker thread with every job in its final state, before
  /// waiters are released.
  using CompletionHandler = std::function<void(const std::vector<SliceJob>&)>;

  explicit Orchestrator(std::shared_ptr<Executor> executor = std::make_shared<ThreadExecutor>());
  ~Orchestrator();
  Orchestrator(const Orchestrator&) = delete;
  Orchestrator& operator=(const Orchestrator&) = delete;

  /// Non-blocking. Throws ParallelismOutOfRange outside [1, 1000] and
  /// InvalidArgument for an empty job list. Each job is tried at most twice.
  BatchId submit_batch(std::vector<SliceJob> jobs, std::size_t parallelism,
                       std::shared_ptr<const SlicerBackend> backend,
                       CompletionHandler on_complete = {});

  /// Throws UnknownBatch.
  BatchStatus status(const BatchId& id) const;

  /// Blocks until the batch and its completion handler are finished.
  std::vector<SliceJob> wait(const BatchId& id) const;

  /// Current snapshot of the jobs, in submission order.
  std::vector<SliceJob> jobs(const BatchId& id) const;

  std::vector<BatchId> batch_ids() const;

 private:
  struct Batch;
  std::shared_ptr<Batch> find(const BatchId& id) const;

  std::shared_ptr<Executor> executor_;
  mutable std::mutex mutex_;
  std::map<BatchId, std::shared_ptr<Batch>> batches_;
  std::size_t next_id_ = 1;
};

/// Applies results to a copy of `grid` in (cell, arrival) order. Sliced
/// results replace anything; interpolated ones only fill empty or
/// interpolated cells. Throws IndexOutOfRange before touching anything.
SliceGrid merge_results(const SliceGrid& grid,
                        const std::vector<std::pair<CellIndex, SlicingResult>>& results);

}  // namespace slicehub

#endif  // SLICEHUB_ORCHESTRATOR_HPP
