#pragma once

#include <functional>

#include "doctest.h"
#include "tlsys/error.hpp"

inline tlsys::ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const tlsys::Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return tlsys::ErrorCode::InvariantViolation;
}
