// Copyright 2026 The xheep-sim Authors.
// Licensed under the Apache License, Version 2.0, see LICENSE for details.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace xheep {

/// Base class for recoverable simulator errors (bad input, illegal requests).
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or invalid input file / descriptor. `field` names the offending key.
class ConfigError : public Error {
 public:
  ConfigError(std::string field, const std::string& message)
      : Error(field.empty() ? message : field + ": " + message), field_(std::move(field)) {}

  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

/// Broken engine contract (event in the past, out-of-range bank offset...).
class SimulationAbort : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

class IllegalTransition : public Error {
 public:
  using Error::Error;
};

class ChannelBusy : public Error {
 public:
  using Error::Error;
};

class SlotOccupied : public Error {
 public:
  using Error::Error;
};

class NoSuchSlot : public Error {
 public:
  using Error::Error;
};

class AcceleratorBusy : public Error {
 public:
  using Error::Error;
};

class PoweredDown : public Error {
 public:
  using Error::Error;
};

class DomainError : public Error {
 public:
  using Error::Error;
};

class CalibrationInfeasible : public Error {
 public:
  using Error::Error;
};

}  // namespace xheep
