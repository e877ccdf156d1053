#pragma once

#include <cstddef>
#include <functional>

namespace instboot {

// Worker count used by parallel_for when `threads` <= 0: the INSTBOOT_THREADS
// environment variable if set to a positive value, otherwise all hardware
// threads (INSTBOOT_THREADS=0 and unset both mean "all").
int default_thread_count();

// Runs fn(0) .. fn(n-1) across worker threads with dynamic scheduling.
// Each index must write only to its own output slot; the first exception
// thrown by any task is rethrown after all workers finish.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn,
                  int threads = 0);

}  // namespace instboot
