// Copyright 2026 The drrscore Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Small text and binary helpers shared by the file formats: flat
// `key = value` documents, whitespace-separated number lists and
// little-endian sample payloads.

#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace drrscore::textio {

// Ordered `key = value` entries. Keys may repeat. Blank lines and lines
// starting with '#' are skipped.
struct KeyValueDoc {
  std::vector<std::pair<std::string, std::string>> entries;

  // Value of the last entry named `key`; throws DataError if absent.
  const std::string& Get(std::string_view key) const;
  const std::string* Find(std::string_view key) const;
  std::vector<std::string> GetAll(std::string_view key) const;
};

KeyValueDoc ParseKeyValue(std::string_view text, const std::string& origin);
KeyValueDoc ReadKeyValueFile(const std::filesystem::path& path);
void WriteKeyValueFile(const std::filesystem::path& path,
                       const KeyValueDoc& doc);

std::string Trim(std::string_view s);
std::vector<std::string> SplitWhitespace(std::string_view s);
std::vector<std::string> Split(std::string_view s, char sep);

// Strict numeric parsing; the whole token must be consumed.
double ParseDouble(std::string_view token, std::string_view what);
long long ParseInt(std::string_view token, std::string_view what);
std::vector<double> ParseDoubles(std::string_view s, std::string_view what);

// Shortest text that parses back to the identical double.
std::string FormatExact(double v);

std::string ReadTextFile(const std::filesystem::path& path);
void WriteTextFile(const std::filesystem::path& path, std::string_view text);

std::vector<std::uint8_t> ReadBytes(const std::filesystem::path& path);
void WriteBytes(const std::filesystem::path& path,
                std::span<const std::uint8_t> bytes);

std::vector<std::uint8_t> EncodeInt16LE(std::span<const std::int16_t> values);
std::vector<std::int16_t> DecodeInt16LE(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> EncodeFloat32LE(std::span<const float> values);
std::vector<float> DecodeFloat32LE(std::span<const std::uint8_t> bytes);

}  // namespace drrscore::textio
