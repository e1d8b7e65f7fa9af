#include "compdyn/parallel.hpp"

#include <omp.h>

namespace compdyn {

int hardware_threads() { return omp_get_num_procs(); }

int resolve_jobs(Parallelism p) { return p.jobs > 0 ? p.jobs : hardware_threads(); }

}  // namespace compdyn
