#pragma once

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <iostream>
#include <sstream>
#include <string>

// Always-on requirement: never compiled out in Release.
#define REQUIRE(cond, msg)                                                      \
  do {                                                                          \
    if (!(cond)) {                                                              \
      std::cerr << "[FAIL] " << __FILE__ << ":" << __LINE__ << " " << msg       \
                << "\n";                                                        \
      std::exit(1);                                                            \
    }                                                                           \
  } while (0)

#define REQUIRE_NEAR(a, b, tol, msg)                                            \
  do {                                                                          \
    const double a_ = (a), b_ = (b), tol_ = (tol);                              \
    if (!(std::abs(a_ - b_) <= tol_)) {                                         \
      std::cerr << "[FAIL] " << __FILE__ << ":" << __LINE__ << " " << msg       \
                << " (" << a_ << " vs " << b_ << ", tol " << tol_ << ")\n";     \
      std::exit(1);                                                            \
    }                                                                           \
  } while (0)

#define REQUIRE_THROWS(expr, extype, msg)                                       \
  do {                                                                          \
    bool caught_ = false;                                                       \
    try {                                                                       \
      (void)(expr);                                                             \
    } catch (const extype&) {                                                   \
      caught_ = true;                                                           \
    }                                                                           \
    REQUIRE(caught_, msg);                                                      \
  } while (0)

inline double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

inline std::string fixture_path(const std::string& name) { return "fixtures/" + name; }
