// Copyright 2026 The sdci Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef SDCI_IO_PACKETS_HPP
#define SDCI_IO_PACKETS_HPP

#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include <sdci/packet.hpp>

namespace sdci::io {

/**
 * Packet stream: one JSON object per line,
 * {"window": m, "times": [...], "values": [...], "sigmas": [...], "sensors": [...]}.
 * Blank lines are ignored. Windows must be strictly increasing.
 */
[[nodiscard]] nlohmann::json packet_to_json(const DataPacket& packet);

/// \throws ParseError naming `line` and the offending field.
[[nodiscard]] DataPacket packet_from_json(const nlohmann::json& record, std::size_t line);

/// Streaming reader.
class PacketReader {
 public:
  explicit PacketReader(const std::filesystem::path& path);

  /// Next packet, or nothing at end of stream.
  /// \throws ParseError, ProtocolViolation (window not after the previous one)
  std::optional<DataPacket> next();

 private:
  std::ifstream in_;
  std::string name_;
  std::size_t line_{0};
  std::optional<int> last_window_;
};

[[nodiscard]] std::vector<DataPacket> read_packets(const std::filesystem::path& path);

/// Append-only writer, flushed after every packet.
class PacketWriter {
 public:
  explicit PacketWriter(const std::filesystem::path& path);
  void write(const DataPacket& packet);

 private:
  std::ofstream out_;
  std::string name_;
  std::optional<int> last_window_;
};

void write_packets(const std::filesystem::path& path, const std::vector<DataPacket>& packets);

}  // namespace sdci::io

#endif
