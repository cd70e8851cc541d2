#pragma once

namespace hawkes {

// Number of OpenMP threads kernels will use.
int thread_count();

// Caps parallelism; values < 1 restore the OpenMP default.
void set_thread_count(int n);

// Applies the HG_THREADS environment variable if it is set. Returns the
// resulting thread count.
int apply_thread_env();

}  // namespace hawkes
