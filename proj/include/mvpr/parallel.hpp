#pragma once

#include <functional>

namespace mvpr {

// Worker cap for parallel_for; n <= 0 restores the hardware default.
void set_max_threads(int n);
int max_threads();

// Runs fn(0..n-1) across up to max_threads() workers. Items must be
// independent; callers get determinism by writing results into per-index
// slots and reducing in index order afterwards. If any item throws, the
// exception with the smallest index is rethrown after all items finish.
void parallel_for(int n, const std::function<void(int)>& fn);

}  // namespace mvpr
