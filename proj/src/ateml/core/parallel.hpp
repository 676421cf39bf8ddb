#pragma once

#include <cstddef>
#include <functional>

namespace ateml {

// Number of worker threads used by parallel_for; 0 selects all hardware
// threads. Results never depend on this value.
void set_thread_count(int threads);
int thread_count();

// Runs body(i) for i in [0, n). Callers write results into slot i and reduce
// in index order afterwards. Nested calls run serially on the calling thread.
// The first exception (lowest index) is rethrown after all workers join.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace ateml
