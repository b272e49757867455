#pragma once

namespace ekma {

// Caps OpenMP worker count for subsequent parallel regions; 0 restores the
// runtime default.
void set_thread_count(int n);
int thread_count();

}  // namespace ekma
