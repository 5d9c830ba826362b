#pragma once

#include <gsl/gsl_errno.h>

namespace kpbbm::detail {

// GSL aborts on error by default; every call site here checks status codes.
inline void silence_gsl() {
  static const bool once = [] {
    gsl_set_error_handler_off();
    return true;
  }();
  (void)once;
}

}  // namespace kpbbm::detail
