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

#include "drrscore/textio.hpp"

#include <fmt/format.h>

#include <bit>
#include <charconv>
#include <cstring>
#include <fstream>
#include <sstream>

#include "drrscore/error.hpp"

namespace drrscore::textio {

const std::string* KeyValueDoc::Find(std::string_view key) const {
  for (auto it = entries.rbegin(); it != entries.rend(); ++it) {
    if (it->first == key) return &it->second;
  }
  return nullptr;
}

const std::string& KeyValueDoc::Get(std::string_view key) const {
  const std::string* v = Find(key);
  if (v == nullptr) {
    throw DataError(fmt::format("missing key '{}'", key));
  }
  return *v;
}

std::vector<std::string> KeyValueDoc::GetAll(std::string_view key) const {
  std::vector<std::string> out;
  for (const auto& [k, v] : entries) {
    if (k == key) out.push_back(v);
  }
  return out;
}

std::string Trim(std::string_view s) {
  const char* ws = " \t\r\n";
  const auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(ws);
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> SplitWhitespace(std::string_view s) {
  std::vector<std::string> out;
  std::istringstream in{std::string(s)};
  std::string tok;
  while (in >> tok) out.push_back(tok);
  return out;
}

std::vector<std::string> Split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    if (pos == std::string_view::npos) {
      out.emplace_back(s.substr(start));
      return out;
    }
    out.emplace_back(s.substr(start, pos - start));
    start = pos + 1;
  }
}

KeyValueDoc ParseKeyValue(std::string_view text, const std::string& origin) {
  KeyValueDoc doc;
  int line_no = 0;
  for (const auto& raw : Split(text, '\n')) {
    ++line_no;
    const std::string line = Trim(raw);
    if (line.empty() || line.front() == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw DataError(fmt::format("{}:{}: expected 'key = value'", origin,
                                  line_no));
    }
    std::string key = Trim(std::string_view(line).substr(0, eq));
    if (key.empty()) {
      throw DataError(fmt::format("{}:{}: empty key", origin, line_no));
    }
    doc.entries.emplace_back(std::move(key),
                             Trim(std::string_view(line).substr(eq + 1)));
  }
  return doc;
}

KeyValueDoc ReadKeyValueFile(const std::filesystem::path& path) {
  return ParseKeyValue(ReadTextFile(path), path.string());
}

void WriteKeyValueFile(const std::filesystem::path& path,
                       const KeyValueDoc& doc) {
  std::string text;
  for (const auto& [k, v] : doc.entries) {
    text += k;
    text += " = ";
    text += v;
    text += '\n';
  }
  WriteTextFile(path, text);
}

double ParseDouble(std::string_view token, std::string_view what) {
  const std::string t = Trim(token);
  double v = 0.0;
  const auto* first = t.data();
  const auto* last = t.data() + t.size();
  if (!t.empty() && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (t.empty() || ec != std::errc() || ptr != last) {
    throw DataError(fmt::format("invalid number for {}: '{}'", what, t));
  }
  return v;
}

long long ParseInt(std::string_view token, std::string_view what) {
  const std::string t = Trim(token);
  long long v = 0;
  const auto* first = t.data();
  const auto* last = t.data() + t.size();
  if (!t.empty() && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (t.empty() || ec != std::errc() || ptr != last) {
    throw DataError(fmt::format("invalid integer for {}: '{}'", what, t));
  }
  return v;
}

std::vector<double> ParseDoubles(std::string_view s, std::string_view what) {
  std::vector<double> out;
  for (const auto& tok : SplitWhitespace(s)) out.push_back(ParseDouble(tok, what));
  return out;
}

std::string FormatExact(double v) { return fmt::format("{}", v); }

std::string ReadTextFile(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError(fmt::format("cannot open '{}'", path.string()));
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void WriteTextFile(const std::filesystem::path& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError(fmt::format("cannot write '{}'", path.string()));
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw DataError(fmt::format("write failed for '{}'", path.string()));
}

std::vector<std::uint8_t> ReadBytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError(fmt::format("cannot open '{}'", path.string()));
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void WriteBytes(const std::filesystem::path& path,
                std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError(fmt::format("cannot write '{}'", path.string()));
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw DataError(fmt::format("write failed for '{}'", path.string()));
}

namespace {

template <typename Word>
Word ToLittle(Word w) {
  if constexpr (std::endian::native == std::endian::little) {
    return w;
  } else {
    Word r = 0;
    for (std::size_t i = 0; i < sizeof(Word); ++i) {
      r = static_cast<Word>((r << 8) | ((w >> (8 * i)) & 0xFF));
    }
    return r;
  }
}

template <typename T, typename Word>
std::vector<std::uint8_t> Encode(std::span<const T> values) {
  static_assert(sizeof(T) == sizeof(Word));
  std::vector<std::uint8_t> out(values.size() * sizeof(T));
  for (std::size_t i = 0; i < values.size(); ++i) {
    const Word w = ToLittle(std::bit_cast<Word>(values[i]));
    std::memcpy(out.data() + i * sizeof(T), &w, sizeof(T));
  }
  return out;
}

template <typename T, typename Word>
std::vector<T> Decode(std::span<const std::uint8_t> bytes) {
  if (bytes.size() % sizeof(T) != 0) {
    throw DataError(fmt::format("payload of {} bytes is not a multiple of {}",
                                bytes.size(), sizeof(T)));
  }
  std::vector<T> out(bytes.size() / sizeof(T));
  for (std::size_t i = 0; i < out.size(); ++i) {
    Word w;
    std::memcpy(&w, bytes.data() + i * sizeof(T), sizeof(T));
    out[i] = std::bit_cast<T>(ToLittle(w));
  }
  return out;
}

}  // namespace

std::vector<std::uint8_t> EncodeInt16LE(std::span<const std::int16_t> values) {
  return Encode<std::int16_t, std::uint16_t>(values);
}

std::vector<std::int16_t> DecodeInt16LE(std::span<const std::uint8_t> bytes) {
  return Decode<std::int16_t, std::uint16_t>(bytes);
}

std::vector<std::uint8_t> EncodeFloat32LE(std::span<const float> values) {
  return Encode<float, std::uint32_t>(values);
}

std::vector<float> DecodeFloat32LE(std::span<const std::uint8_t> bytes) {
  return Decode<float, std::uint32_t>(bytes);
}

}  // namespace drrscore::textio
