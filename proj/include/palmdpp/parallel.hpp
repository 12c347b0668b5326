#pragma once

#include <cstddef>
#include <functional>
#include <vector>

namespace palmdpp {

/// Worker count: set_thread_count() if called with n > 0, else PALMDPP_THREADS,
/// else the hardware concurrency.
int thread_count();
void set_thread_count(int n);

/// Runs body(i) for i in [0, n). Each index runs exactly once; callers write
/// results into slot i so the outcome does not depend on scheduling. The first
/// exception thrown by any body is rethrown after all workers stop.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

/// Pairwise (tree) sum in index order: reproducible for a fixed input vector.
double pairwise_sum(const double* x, std::size_t n);
inline double pairwise_sum(const std::vector<double>& x) { return pairwise_sum(x.data(), x.size()); }

}  // namespace palmdpp
