#pragma once

#include <cstddef>

namespace compdyn {

// Worker count for the OpenMP drivers. jobs <= 0 means "all logical cores".
struct Parallelism {
  int jobs = 0;
};

int resolve_jobs(Parallelism p);
int hardware_threads();

}  // namespace compdyn
