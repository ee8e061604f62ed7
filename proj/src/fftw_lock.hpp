#pragma once

#include <mutex>

namespace pimd_kubo::detail {

// FFTW planning is not thread safe; every plan creation and destruction in
// the library takes this lock. Execution of an existing plan does not.
std::mutex& fftw_planner_mutex();

}  // namespace pimd_kubo::detail
