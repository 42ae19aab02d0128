#include "slicehub/orchestrator.hpp"

#include <algorithm>
#include <exception>
#include <iostream>

#include "slicehub/error.hpp"

namespace slicehub {

std::string_view to_string(JobState state) {
  switch (state) {
    case JobState::Pending: return "pending";
    case JobState::Running: return "running";
    case JobState::Done: return "done";
    case JobState::Failed: return "failed";
  }
  return "unknown";
}

ThreadExecutor::~ThreadExecutor() {
  std::vector<Worker> workers;
  {
    std::lock_guard lock(mutex_);
    workers = std::move(workers_);
  }
  for (Worker& w : workers) {
    if (w.thread.joinable()) w.thread.join();
  }
}

void ThreadExecutor::reap_locked() {
  auto finished = std::partition(workers_.begin(), workers_.end(),
                                 [](const Worker& w) { return !w.done->load(); });
  for (auto it = finished; it != workers_.end(); ++it) it->thread.join();
  workers_.erase(finished, workers_.end());
}

void ThreadExecutor::run(std::size_t count, std::size_t parallelism,
                         std::function<void(std::size_t)> task,
                         std::function<void()> on_complete) {
  struct Shared {
    std::function<void(std::size_t)> task;
    std::function<void()> on_complete;
    std::size_t count = 0;
    std::atomic<std::size_t> next{0};
    std::atomic<std::size_t> live_workers{0};
  };
  auto shared = std::make_shared<Shared>();
  shared->task = std::move(task);
  shared->on_complete = std::move(on_complete);
  shared->count = count;

  const std::size_t n_workers = std::max<std::size_t>(1, std::min(parallelism, count));
  shared->live_workers = n_workers;

  std::lock_guard lock(mutex_);
  reap_locked();
  for (std::size_t w = 0; w < n_workers; ++w) {
    auto done = std::make_shared<std::atomic<bool>>(false);
    workers_.push_back({std::thread([shared, done] {
                          for (std::size_t i = shared->next.fetch_add(1); i < shared->count;
                               i = shared->next.fetch_add(1)) {
                            shared->task(i);
                          }
                          if (shared->live_workers.fetch_sub(1) == 1 && shared->on_complete) {
                            shared->on_complete();
                          }
                          done->store(true);
                        }),
                        done});
  }
}

struct Orchestrator::Batch {
  mutable std::mutex mutex;
  mutable std::condition_variable cv;
  std::vector<SliceJob> jobs;
  std::size_t completed = 0;
  std::size_t failed = 0;
  bool finished = false;
  std::chrono::steady_clock::time_point started;
  std::chrono::system_clock::time_point started_wall;
  std::shared_ptr<const SlicerBackend> backend;
  CompletionHandler on_complete;
};

Orchestrator::Orchestrator(std::shared_ptr<Executor> executor) : executor_(std::move(executor)) {}

Orchestrator::~Orchestrator() {
  for (const BatchId& id : batch_ids()) wait(id);
}

BatchId Orchestrator::submit_batch(std::vector<SliceJob> jobs, std::size_t parallelism,
                                   std::shared_ptr<const SlicerBackend> backend,
                                   CompletionHandler on_complete) {
  if (parallelism < 1 || parallelism > kMaxParallelism) {
    throw Error(ErrorCode::ParallelismOutOfRange,
                "parallelism " + std::to_string(parallelism) + " outside [1, 1000]");
  }
  if (jobs.empty()) throw Error(ErrorCode::InvalidArgument, "batch has no jobs");
  if (!backend) throw Error(ErrorCode::InvalidArgument, "batch has no backend");

  auto batch = std::make_shared<Batch>();
  batch->backend = std::move(backend);
  batch->on_complete = std::move(on_complete);
  batch->started = std::chrono::steady_clock::now();
  batch->started_wall = std::chrono::system_clock::now();

  BatchId id;
  {
    std::lock_guard lock(mutex_);
    id = "b" + std::to_string(next_id_++);
    batches_.emplace(id, batch);
  }
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    SliceJob& job = jobs[i];
    if (job.job_id.empty()) job.job_id = id + "-" + std::to_string(i);
    job.state = JobState::Pending;
    job.result.reset();
    job.error.reset();
    job.attempts = 0;
  }
  batch->jobs = std::move(jobs);
  const std::size_t count = batch->jobs.size();

  auto task = [batch](std::size_t i) {
    SliceRequest request;
    {
      std::lock_guard lock(batch->mutex);
      batch->jobs[i].state = JobState::Running;
      request = batch->jobs[i].request;
    }
    std::optional<SlicingResult> result;
    std::string error;
    int attempts = 0;
    for (; attempts < 2 && !result; ++attempts) {
      try {
        result = slice(request, *batch->backend);
      } catch (const std::exception& e) {
        error = e.what();
      }
    }
    std::lock_guard lock(batch->mutex);
    SliceJob& job = batch->jobs[i];
    job.attempts = attempts;
    if (result) {
      job.state = JobState::Done;
      job.result = result;
      ++batch->completed;
    } else {
      job.state = JobState::Failed;
      job.error = error;
      ++batch->failed;
    }
  };

  auto complete = [batch] {
    if (batch->on_complete) {
      std::vector<SliceJob> snapshot;
      {
        std::lock_guard lock(batch->mutex);
        snapshot = batch->jobs;
      }
      try {
        batch->on_complete(snapshot);
      } catch (const std::exception& e) {
        std::cerr << "slicehub: batch completion handler failed: " << e.what() << "\n";
      }
    }
    {
      std::lock_guard lock(batch->mutex);
      batch->finished = true;
    }
    batch->cv.notify_all();
  };

  executor_->run(count, parallelism, std::move(task), std::move(complete));
  return id;
}

std::shared_ptr<Orchestrator::Batch> Orchestrator::find(const BatchId& id) const {
  std::lock_guard lock(mutex_);
  const auto it = batches_.find(id);
  if (it == batches_.end()) throw Error(ErrorCode::UnknownBatch, "no batch " + id);
  return it->second;
}

BatchStatus Orchestrator::status(const BatchId& id) const {
  const auto batch = find(id);
  std::lock_guard lock(batch->mutex);
  BatchStatus st;
  st.total = batch->jobs.size();
  st.completed = batch->completed;
  st.failed = batch->failed;
  st.started_at = batch->started_wall;
  st.finished = batch->finished;
  const std::size_t done = st.completed + st.failed;
  if (st.finished) {
    st.eta_s = 0.0;
  } else if (done > 0) {
    const double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - batch->started).count();
    st.eta_s = elapsed * static_cast<double>(st.total - done) /
               static_cast<double>(std::max<std::size_t>(st.completed, 1));
  }
  return st;
}

std::vector<SliceJob> Orchestrator::wait(const BatchId& id) const {
  const auto batch = find(id);
  std::unique_lock lock(batch->mutex);
  batch->cv.wait(lock, [&] { return batch->finished; });
  return batch->jobs;
}

std::vector<SliceJob> Orchestrator::jobs(const BatchId& id) const {
  const auto batch = find(id);
  std::lock_guard lock(batch->mutex);
  return batch->jobs;
}

std::vector<BatchId> Orchestrator::batch_ids() const {
  std::lock_guard lock(mutex_);
  std::vector<BatchId> ids;
  for (const auto& [id, batch] : batches_) ids.push_back(id);
  return ids;
}

SliceGrid merge_results(const SliceGrid& grid,
                        const std::vector<std::pair<CellIndex, SlicingResult>>& results) {
  for (const auto& [idx, result] : results) {
    if (!grid.contains(idx)) {
      throw Error(ErrorCode::IndexOutOfRange, "result for cell (" + std::to_string(idx.r) + ", " +
                                                  std::to_string(idx.s) + ") outside grid");
    }
  }
  std::vector<std::size_t> order(results.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return results[a].first < results[b].first; });

  SliceGrid out = grid;
  for (const std::size_t i : order) {
    const auto& [idx, incoming] = results[i];
    std::optional<SlicingResult>& cell = out.at(idx);
    if (incoming.is_sliced() || !cell || !cell->is_sliced()) cell = incoming;
  }
  return out;
}

}  // namespace slicehub
