#include "sojourn/parallel.hpp"

#include <atomic>
#include <exception>
#include <mutex>
#include <thread>

namespace sojourn {

const char* error_kind_name(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidSize: return "invalid-size";
    case ErrorKind::DegenerateInput: return "degenerate-input";
    case ErrorKind::ZeroField: return "zero-field";
    case ErrorKind::GridMismatch: return "grid-mismatch";
    case ErrorKind::OriginSupport: return "origin-support";
    case ErrorKind::OutOfBand: return "out-of-band";
    case ErrorKind::EnergyGap: return "energy-gap";
    case ErrorKind::WrapAround: return "wrap-around";
    case ErrorKind::HorizonExceeded: return "horizon-exceeded";
    case ErrorKind::NonUnitary: return "non-unitary";
    case ErrorKind::BranchJump: return "branch-jump";
    case ErrorKind::NotIdentityAnchored: return "not-identity-anchored";
    case ErrorKind::InvalidArgument: return "invalid-argument";
    case ErrorKind::Config: return "config";
    case ErrorKind::Io: return "io";
  }
  return "unknown";
}

namespace {
std::mutex g_warn_mu;
std::vector<Warning> g_warnings;
}  // namespace

void emit_warning(const std::string& code, const std::string& message) {
  std::lock_guard<std::mutex> lock(g_warn_mu);
  g_warnings.push_back({code, message});
}

std::vector<Warning> drain_warnings() {
  std::lock_guard<std::mutex> lock(g_warn_mu);
  std::vector<Warning> out;
  out.swap(g_warnings);
  return out;
}

namespace parallel {

namespace {
std::atomic<int> g_workers{1};
}

void set_worker_count(int workers) {
  if (workers < 1) throw Error(ErrorKind::InvalidArgument, "worker count must be >= 1");
  g_workers.store(workers);
}

int worker_count() { return g_workers.load(); }

void for_blocks(std::size_t nblocks, const std::function<void(std::size_t)>& fn) {
  int workers = worker_count();
  if (workers <= 1 || nblocks < 2) {
    for (std::size_t b = 0; b < nblocks; ++b) fn(b);
    return;
  }
  std::size_t nthreads = std::min<std::size_t>(static_cast<std::size_t>(workers), nblocks);
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mu;
  auto run = [&] {
    for (;;) {
      std::size_t b = next.fetch_add(1);
      if (b >= nblocks) return;
      try {
        fn(b);
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mu);
        if (!failure) failure = std::current_exception();
        next.store(nblocks);
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(nthreads - 1);
  for (std::size_t t = 1; t < nthreads; ++t) pool.emplace_back(run);
  run();
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace parallel
}  // namespace sojourn
