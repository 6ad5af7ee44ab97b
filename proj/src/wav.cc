// Copyright 2026 The NGCC Authors
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

#include "ngcc/wav.h"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>

#include "ngcc/error.h"

namespace ngcc {
namespace {

static_assert(std::endian::native == std::endian::little,
              "WAV I/O assumes a little-endian host");

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatFloat = 3;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;

template <typename T>
T ReadLe(const std::vector<char>& bytes, std::size_t offset) {
  Require(offset + sizeof(T) <= bytes.size(), ErrorKind::kInvalidData,
          "truncated WAV file");
  T v;
  std::memcpy(&v, bytes.data() + offset, sizeof(T));
  return v;
}

template <typename T>
void WriteLe(std::ofstream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

}  // namespace

std::vector<double> LoadWav(const std::string& path, double expected_rate) {
  std::ifstream in(path, std::ios::binary);
  Require(in.good(), ErrorKind::kIo, "cannot open " + path);
  std::vector<char> bytes((std::istreambuf_iterator<char>(in)),
                          std::istreambuf_iterator<char>());
  Require(bytes.size() >= 12 && std::memcmp(bytes.data(), "RIFF", 4) == 0 &&
              std::memcmp(bytes.data() + 8, "WAVE", 4) == 0,
          ErrorKind::kInvalidData, path + " is not a RIFF/WAVE file");

  std::uint16_t format = 0, channels = 0, bits = 0;
  std::uint32_t rate = 0;
  bool have_fmt = false;
  std::size_t data_offset = 0, data_size = 0;
  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const std::string id(bytes.data() + pos, 4);
    const std::uint32_t size = ReadLe<std::uint32_t>(bytes, pos + 4);
    const std::size_t body = pos + 8;
    if (id == "fmt ") {
      format = ReadLe<std::uint16_t>(bytes, body);
      channels = ReadLe<std::uint16_t>(bytes, body + 2);
      rate = ReadLe<std::uint32_t>(bytes, body + 4);
      bits = ReadLe<std::uint16_t>(bytes, body + 14);
      if (format == kFormatExtensible && size >= 26) {
        format = ReadLe<std::uint16_t>(bytes, body + 24);
      }
      have_fmt = true;
    } else if (id == "data") {
      data_offset = body;
      data_size = std::min<std::size_t>(size, bytes.size() - body);
      break;
    }
    pos = body + size + (size & 1);
  }
  Require(have_fmt && data_offset != 0, ErrorKind::kInvalidData,
          path + " lacks a fmt or data chunk");
  Require(channels == 1, ErrorKind::kInvalidData,
          path + " has " + std::to_string(channels) +
              " channels; only mono is supported");
  Require(static_cast<double>(rate) == expected_rate, ErrorKind::kInvalidData,
          path + " is sampled at " + std::to_string(rate) +
              " Hz; resample to " + std::to_string(static_cast<int>(expected_rate)) +
              " Hz first");

  std::vector<double> samples;
  if (format == kFormatPcm && bits == 16) {
    samples.resize(data_size / 2);
    for (std::size_t i = 0; i < samples.size(); ++i) {
      samples[i] = ReadLe<std::int16_t>(bytes, data_offset + 2 * i) / 32768.0;
    }
  } else if (format == kFormatFloat && bits == 32) {
    samples.resize(data_size / 4);
    for (std::size_t i = 0; i < samples.size(); ++i) {
      samples[i] = ReadLe<float>(bytes, data_offset + 4 * i);
      Require(std::isfinite(samples[i]), ErrorKind::kInvalidData,
              path + " contains non-finite samples");
    }
  } else {
    throw Error(ErrorKind::kInvalidData,
                path + ": unsupported WAV encoding (need 16-bit PCM or 32-bit float)");
  }
  return samples;
}

void WriteWav(const std::string& path, std::span<const double> samples,
              double sample_rate, WavFormat format) {
  std::ofstream out(path, std::ios::binary);
  Require(out.good(), ErrorKind::kIo, "cannot write " + path);
  const std::uint16_t bits = format == WavFormat::kPcm16 ? 16 : 32;
  const std::uint32_t data_bytes =
      static_cast<std::uint32_t>(samples.size() * (bits / 8));
  const std::uint32_t rate = static_cast<std::uint32_t>(std::lround(sample_rate));
  out.write("RIFF", 4);
  WriteLe<std::uint32_t>(out, 36 + data_bytes);
  out.write("WAVEfmt ", 8);
  WriteLe<std::uint32_t>(out, 16);
  WriteLe<std::uint16_t>(out, format == WavFormat::kPcm16 ? kFormatPcm : kFormatFloat);
  WriteLe<std::uint16_t>(out, 1);
  WriteLe<std::uint32_t>(out, rate);
  WriteLe<std::uint32_t>(out, rate * (bits / 8));
  WriteLe<std::uint16_t>(out, bits / 8);
  WriteLe<std::uint16_t>(out, bits);
  out.write("data", 4);
  WriteLe<std::uint32_t>(out, data_bytes);
  for (double v : samples) {
    if (format == WavFormat::kPcm16) {
      const double scaled = std::clamp(std::round(v * 32768.0), -32768.0, 32767.0);
      WriteLe<std::int16_t>(out, static_cast<std::int16_t>(scaled));
    } else {
      WriteLe<float>(out, static_cast<float>(v));
    }
  }
  Require(out.good(), ErrorKind::kIo, "failed writing " + path);
}

std::vector<Frame> SplitFrames(std::span<const double> samples,
                               std::size_t frame_length, double sample_rate) {
  std::vector<Frame> frames;
  for (std::size_t start = 0; start + frame_length <= samples.size();
       start += frame_length) {
    frames.emplace_back(
        std::vector<double>(samples.begin() + start,
                            samples.begin() + start + frame_length),
        sample_rate);
  }
  return frames;
}

}  // namespace ngcc
