// Copyright 2026 The xheep-sim Authors.
// Licensed under the Apache License, Version 2.0, see LICENSE for details.
// SPDX-License-Identifier: Apache-2.0

#include "xheep/json_util.hpp"

#include <algorithm>
#include <fstream>
#include <limits>

#include <fmt/format.h>

namespace xheep::json_util {

json read_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path.string(), "cannot open file");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(path.string(), e.what());
  }
}

ObjectReader::ObjectReader(const json& object, std::string path)
    : object_(object), path_(std::move(path)) {
  if (!object_.is_object()) throw ConfigError(path_.empty() ? "<root>" : path_, "expected a JSON object");
}

std::string ObjectReader::field(std::string_view key) const {
  return path_.empty() ? std::string(key) : path_ + "." + std::string(key);
}

bool ObjectReader::has(std::string_view key) const { return object_.contains(key); }

const json* ObjectReader::lookup(std::string_view key) {
  auto it = object_.find(key);
  if (it == object_.end()) return nullptr;
  seen_.emplace_back(key);
  return &*it;
}

const json& ObjectReader::raw(std::string_view key) {
  const json* v = lookup(key);
  if (!v) throw ConfigError(field(key), "missing required key");
  return *v;
}

std::optional<std::uint64_t> ObjectReader::u64(std::string_view key) {
  const json* v = lookup(key);
  if (!v) return std::nullopt;
  if (!v->is_number_unsigned() && !(v->is_number_integer() && v->get<std::int64_t>() >= 0)) throw ConfigError(field(key), "expected a non-negative integer");
  return v->get<std::uint64_t>();
}

std::optional<std::int64_t> ObjectReader::i64(std::string_view key) {
  const json* v = lookup(key);
  if (!v) return std::nullopt;
  if (!v->is_number_integer()) throw ConfigError(field(key), "expected an integer");
  if (v->is_number_unsigned() && v->get<std::uint64_t>() > std::uint64_t(std::numeric_limits<std::int64_t>::max()))
    throw ConfigError(field(key), "integer out of range");
  return v->get<std::int64_t>();
}

std::optional<double> ObjectReader::number(std::string_view key) {
  const json* v = lookup(key);
  if (!v) return std::nullopt;
  if (!v->is_number()) throw ConfigError(field(key), "expected a number");
  return v->get<double>();
}

std::optional<bool> ObjectReader::boolean(std::string_view key) {
  const json* v = lookup(key);
  if (!v) return std::nullopt;
  if (!v->is_boolean()) throw ConfigError(field(key), "expected true or false");
  return v->get<bool>();
}

std::optional<std::string> ObjectReader::string(std::string_view key) {
  const json* v = lookup(key);
  if (!v) return std::nullopt;
  if (!v->is_string()) throw ConfigError(field(key), "expected a string");
  return v->get<std::string>();
}

std::optional<std::uint32_t> ObjectReader::address(std::string_view key) {
  const json* v = lookup(key);
  if (!v) return std::nullopt;
  std::uint64_t value = 0;
  if (v->is_number_unsigned() || (v->is_number_integer() && v->get<std::int64_t>() >= 0)) {
    value = v->get<std::uint64_t>();
  } else if (v->is_string()) {
    std::string s = v->get<std::string>();
    s.erase(std::remove(s.begin(), s.end(), '_'), s.end());
    try {
      std::size_t used = 0;
      value = std::stoull(s, &used, 0);
      if (used != s.size()) throw std::invalid_argument(s);
    } catch (const std::exception&) {
      throw ConfigError(field(key), "malformed address '" + v->get<std::string>() + "'");
    }
  } else {
    throw ConfigError(field(key), "expected an address (integer or \"0x...\" string)");
  }
  if (value > 0xFFFF'FFFFull) throw ConfigError(field(key), "address exceeds 32 bits");
  return static_cast<std::uint32_t>(value);
}

std::uint64_t ObjectReader::require_u64(std::string_view key) {
  auto v = u64(key);
  if (!v) throw ConfigError(field(key), "missing required key");
  return *v;
}

double ObjectReader::require_number(std::string_view key) {
  auto v = number(key);
  if (!v) throw ConfigError(field(key), "missing required key");
  return *v;
}

std::string ObjectReader::require_string(std::string_view key) {
  auto v = string(key);
  if (!v) throw ConfigError(field(key), "missing required key");
  return *v;
}

std::uint32_t ObjectReader::require_address(std::string_view key) {
  auto v = address(key);
  if (!v) throw ConfigError(field(key), "missing required key");
  return *v;
}

void ObjectReader::finish() const {
  for (auto it = object_.begin(); it != object_.end(); ++it) {
    if (std::find(seen_.begin(), seen_.end(), it.key()) == seen_.end())
      throw ConfigError(field(it.key()), "unknown key");
  }
}

std::string hex32(std::uint32_t value) { return fmt::format("0x{:08X}", value); }

json without_metadata(const json& doc) {
  json copy = doc;
  if (copy.is_object()) copy.erase("metadata");
  return copy;
}

}  // namespace xheep::json_util
