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

#include <sdci/io/packets.hpp>

#include <cmath>
#include <stdexcept>

#include <sdci/errors.hpp>

namespace sdci::io {

namespace {

Eigen::VectorXd numbers(const nlohmann::json& record, const char* field, std::size_t line) {
  if (!record.contains(field)) {
    throw ParseError(line, std::string{"missing field '"} + field + "'");
  }
  const nlohmann::json& array = record.at(field);
  if (!array.is_array()) {
    throw ParseError(line, std::string{"field '"} + field + "' must be an array");
  }
  Eigen::VectorXd out(static_cast<Eigen::Index>(array.size()));
  for (std::size_t j = 0; j < array.size(); ++j) {
    if (!array[j].is_number()) {
      throw ParseError(line, std::string{"field '"} + field + "' entry " + std::to_string(j) + " is not a number");
    }
    out(static_cast<Eigen::Index>(j)) = array[j].get<double>();
  }
  return out;
}

nlohmann::json array_of(const Eigen::VectorXd& v) {
  nlohmann::json out = nlohmann::json::array();
  for (Eigen::Index j = 0; j < v.size(); ++j) {
    out.push_back(v(j));
  }
  return out;
}

}  // namespace

nlohmann::json packet_to_json(const DataPacket& packet) {
  return nlohmann::json{{"window", packet.window_index},
                        {"times", array_of(packet.times)},
                        {"values", array_of(packet.values)},
                        {"sigmas", array_of(packet.sigmas)},
                        {"sensors", packet.sensor_ids}};
}

DataPacket packet_from_json(const nlohmann::json& record, std::size_t line) {
  if (!record.is_object()) {
    throw ParseError(line, "record must be a JSON object");
  }
  if (!record.contains("window") || !record.at("window").is_number_integer()) {
    throw ParseError(line, "field 'window' must be an integer");
  }
  DataPacket packet;
  packet.window_index = record.at("window").get<int>();
  packet.times = numbers(record, "times", line);
  packet.values = numbers(record, "values", line);
  packet.sigmas = numbers(record, "sigmas", line);
  if (!record.contains("sensors") || !record.at("sensors").is_array()) {
    throw ParseError(line, "field 'sensors' must be an array");
  }
  for (const auto& id : record.at("sensors")) {
    if (!id.is_string()) {
      throw ParseError(line, "field 'sensors' must hold strings");
    }
    packet.sensor_ids.push_back(id.get<std::string>());
  }
  const Eigen::Index n = packet.values.size();
  if (n == 0) {
    throw ParseError(line, "field 'values' is empty");
  }
  if (packet.times.size() != n) {
    throw ParseError(line, "field 'times' length differs from 'values'");
  }
  if (packet.sigmas.size() != n) {
    throw ParseError(line, "field 'sigmas' length differs from 'values'");
  }
  if (static_cast<Eigen::Index>(packet.sensor_ids.size()) != n) {
    throw ParseError(line, "field 'sensors' length differs from 'values'");
  }
  for (Eigen::Index j = 0; j < n; ++j) {
    if (!(packet.sigmas(j) > 0.0) || !std::isfinite(packet.sigmas(j))) {
      throw ParseError(line, "field 'sigmas' entry " + std::to_string(j) + " must be positive");
    }
    if (j > 0 && packet.times(j) < packet.times(j - 1)) {
      throw ParseError(line, "field 'times' must be nondecreasing");
    }
  }
  return packet;
}

PacketReader::PacketReader(const std::filesystem::path& path) : in_{path}, name_{path.string()} {
  if (!in_) {
    throw IoError("cannot open packet stream " + name_);
  }
}

std::optional<DataPacket> PacketReader::next() {
  std::string text;
  while (std::getline(in_, text)) {
    ++line_;
    if (text.find_first_not_of(" \t\r") == std::string::npos) {
      continue;
    }
    nlohmann::json record;
    try {
      record = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
      throw ParseError(line_, std::string{"malformed JSON: "} + e.what());
    }
    DataPacket packet = packet_from_json(record, line_);
    if (last_window_ && packet.window_index <= *last_window_) {
      throw ProtocolViolation(name_ + " line " + std::to_string(line_) + ": window " +
                              std::to_string(packet.window_index) + " follows window " +
                              std::to_string(*last_window_));
    }
    last_window_ = packet.window_index;
    return packet;
  }
  return std::nullopt;
}

std::vector<DataPacket> read_packets(const std::filesystem::path& path) {
  PacketReader reader{path};
  std::vector<DataPacket> out;
  while (auto packet = reader.next()) {
    out.push_back(std::move(*packet));
  }
  return out;
}

PacketWriter::PacketWriter(const std::filesystem::path& path)
    : out_{path, std::ios::binary | std::ios::trunc}, name_{path.string()} {
  if (!out_) {
    throw IoError("cannot write packet stream " + name_);
  }
}

void PacketWriter::write(const DataPacket& packet) {
  validate_packet(packet);
  if (last_window_ && packet.window_index <= *last_window_) {
    throw ProtocolViolation("window " + std::to_string(packet.window_index) + " written after window " +
                            std::to_string(*last_window_));
  }
  last_window_ = packet.window_index;
  out_ << packet_to_json(packet).dump() << '\n';
  out_.flush();
  if (!out_) {
    throw IoError("write failed: " + name_);
  }
}

void write_packets(const std::filesystem::path& path, const std::vector<DataPacket>& packets) {
  PacketWriter writer{path};
  for (const auto& packet : packets) {
    writer.write(packet);
  }
}

}  // namespace sdci::io
