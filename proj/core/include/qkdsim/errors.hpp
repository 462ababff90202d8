#pragma once

#include <stdexcept>
#include <string>

namespace qkdsim {

/// Caller violated an operation's precondition (bad mode set, bad enum, ...).
class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A state left the exact few-photon regime; the caller should switch to MacroPulse.
class RegimeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Configuration could not be parsed or failed validation.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An attack strategy cannot run against the configured setup.
class AttackRefused : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace qkdsim
