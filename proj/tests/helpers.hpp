#pragma once

#include <gtest/gtest.h>

#include "sigw/error.hpp"

/// Kind of the sigw::Error thrown by f; fails the test if none is thrown.
template <typename F>
sigw::ErrorKind error_kind_of(F&& f) {
  try {
    f();
  } catch (const sigw::Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no sigw::Error thrown";
  return sigw::ErrorKind::Io;
}
