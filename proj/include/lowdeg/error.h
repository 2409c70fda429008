#pragma once

#include <cstdio>
#include <stdexcept>
#include <string>

namespace lowdeg {

// Invalid argument or malformed input. Maps to CLI exit code 2.
class DomainError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A conditional quantity was requested on a group whose mass is below the
// configured floor.
class InsufficientMass : public DomainError {
 public:
  InsufficientMass(const std::string& what, double mass)
      : DomainError(what + " (mass " + std::to_string(mass) + ")"), mass_(mass) {}
  double mass() const { return mass_; }

 private:
  double mass_;
};

// An iterative procedure stopped without reaching its target. Maps to CLI
// exit code 3.
class ConvergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class BasisTooLarge : public DomainError {
 public:
  // `log10_estimate` is the base-10 logarithm of the estimated member count;
  // the count itself usually overflows a double.
  BasisTooLarge(double log10_estimate, double cap)
      : DomainError(message(log10_estimate, cap)),
        log10_estimate_(log10_estimate) {}
  double log10_estimate() const { return log10_estimate_; }

 private:
  static std::string message(double log10_estimate, double cap) {
    char buf[128];
    std::snprintf(buf, sizeof buf, "basis too large: ~10^%.1f members exceeds cap %.0f",
                  log10_estimate, cap);
    return buf;
  }

  double log10_estimate_;
};

}  // namespace lowdeg
