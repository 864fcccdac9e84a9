// Copyright (c) 2026 The morcert developers. All rights reserved.
// SPDX-License-Identifier: Apache-2.0

#ifndef MORCERT_PARALLEL_HPP
#define MORCERT_PARALLEL_HPP

#include <algorithm>
#include <exception>
#include <thread>
#include <vector>

#include <Eigen/Core>

namespace morcert
{

// Number of worker threads used when a caller passes 0 ("use all cores").
inline int default_thread_count()
{
  const unsigned hc = std::thread::hardware_concurrency();
  return hc == 0 ? 1 : static_cast<int>(hc);
}

// Applies body(i) for i in [0, n) across a fixed static partition of the
// index range. Each index writes only its own output slot, so results are
// bit-identical for every thread count; reductions over the outputs must be
// done serially by the caller. The first exception thrown by any worker is
// rethrown after all workers join.
template <typename Body>
void parallel_for(Eigen::Index n, int num_threads, Body &&body)
{
  if (n <= 0)
  {
    return;
  }
  if (num_threads <= 0)
  {
    num_threads = default_thread_count();
  }
  const Eigen::Index workers = std::min<Eigen::Index>(num_threads, n);
  if (workers <= 1)
  {
    for (Eigen::Index i = 0; i < n; ++i)
    {
      body(i);
    }
    return;
  }

  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(static_cast<size_t>(workers));
  pool.reserve(static_cast<size_t>(workers));
  for (Eigen::Index w = 0; w < workers; ++w)
  {
    const Eigen::Index begin = w * n / workers;
    const Eigen::Index end = (w + 1) * n / workers;
    pool.emplace_back(
        [&body, &errors, w, begin, end]()
        {
          try
          {
            for (Eigen::Index i = begin; i < end; ++i)
            {
              body(i);
            }
          }
          catch (...)
          {
            errors[static_cast<size_t>(w)] = std::current_exception();
          }
        });
  }
  for (auto &t : pool)
  {
    t.join();
  }
  for (const auto &e : errors)
  {
    if (e)
    {
      std::rethrow_exception(e);
    }
  }
}

} // namespace morcert

#endif // MORCERT_PARALLEL_HPP
