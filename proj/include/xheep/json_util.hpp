// Copyright 2026 The xheep-sim Authors.
// Licensed under the Apache License, Version 2.0, see LICENSE for details.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <initializer_list>
#include <optional>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "xheep/error.hpp"

namespace xheep::json_util {

using nlohmann::json;

/// Reads a JSON file; syntax errors surface as ConfigError carrying the
/// parser's line/column message.
json read_file(const std::filesystem::path& path);

/// Field-tracking view over a JSON object. Every accessor records the key so
/// that finish() can reject keys nobody asked for.
class ObjectReader {
 public:
  ObjectReader(const json& object, std::string path);

  bool has(std::string_view key) const;
  const json& raw(std::string_view key);

  std::optional<std::uint64_t> u64(std::string_view key);
  std::optional<std::int64_t> i64(std::string_view key);
  std::optional<double> number(std::string_view key);
  std::optional<bool> boolean(std::string_view key);
  std::optional<std::string> string(std::string_view key);
  /// Accepts an unsigned integer or a "0x..." string.
  std::optional<std::uint32_t> address(std::string_view key);

  std::uint64_t require_u64(std::string_view key);
  double require_number(std::string_view key);
  std::string require_string(std::string_view key);
  std::uint32_t require_address(std::string_view key);

  std::string field(std::string_view key) const;
  /// Throws ConfigError on the first key that was never read.
  void finish() const;

 private:
  const json* lookup(std::string_view key);

  const json& object_;
  std::string path_;
  std::vector<std::string> seen_;
};

std::string hex32(std::uint32_t value);

/// Deep copy of `doc` with the top-level "metadata" member removed.
json without_metadata(const json& doc);

}  // namespace xheep::json_util
