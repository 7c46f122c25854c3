#pragma once

#include <optional>

#include "ftcp/errors.hpp"

// Code of the ftcp::Error thrown by f, or nullopt if nothing was thrown.
template <class F>
std::optional<ftcp::ErrorCode> error_code_of(F&& f) {
  try {
    f();
  } catch (const ftcp::Error& e) {
    return e.code();
  }
  return std::nullopt;
}
