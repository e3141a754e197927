#pragma once

#include <cstddef>

namespace pppad::parallel {

// Work-size threshold below which kernels stay serial; spawning a team for
// tiny gradcheck-sized problems costs more than the loop.
inline constexpr size_t kGrain = 4096;

bool enabled();
void set_enabled(bool on);

// Serial execution everywhere (implies single-thread OpenMP regions too).
void force_single_thread();

int thread_count();

}  // namespace pppad::parallel
