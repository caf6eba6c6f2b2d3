#pragma once

#include <cstdint>
#include <utility>

namespace polynl::instrument {

// Counters filled while a Scope is active on the current thread:
//   flops      — multiply-add work reported by the dense kernels, one
//                multiply or add counted as one FLOP,
//   peak_elems — largest single buffer (in scalar elements) allocated while
//                the scope was live. This is the deterministic "peak memory"
//                proxy used by the benchmark harness: inputs and parameters
//                created before the scope never count, every intermediate and
//                the output do.
struct Counters {
  std::uint64_t flops = 0;
  std::uint64_t peak_elems = 0;
};

inline thread_local Counters* tl_sink = nullptr;

inline void note_alloc(std::uint64_t elems) {
  if (tl_sink && elems > tl_sink->peak_elems) tl_sink->peak_elems = elems;
}

inline void note_flops(std::uint64_t n) {
  if (tl_sink) tl_sink->flops += n;
}

inline bool active() { return tl_sink != nullptr; }

// RAII recording window. Kernels report to the innermost scope on the
// calling thread only, so counts stay deterministic under the parallel lane.
class Scope {
 public:
  Scope() : prev_(std::exchange(tl_sink, &counters_)) {}
  ~Scope() { tl_sink = prev_; }
  Scope(const Scope&) = delete;
  Scope& operator=(const Scope&) = delete;

  const Counters& counters() const { return counters_; }

 private:
  Counters counters_;
  Counters* prev_;
};

}  // namespace polynl::instrument
