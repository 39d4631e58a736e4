#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "v2x/geometry/occupancy_grid.hpp"
#include "v2x/model/types.hpp"

namespace v2x {

enum class PayloadKind : std::uint8_t { track = 0, map = 1, occupancy = 2, motion = 3 };

std::string to_string(PayloadKind kind);
bool carries_queries(PayloadKind kind);

inline constexpr std::uint32_t kWireMagic = 0x56325846;  // "V2XF"
inline constexpr std::uint16_t kWireVersion = 1;
// magic, version, sender, timestamp, kind
inline constexpr std::size_t kHeaderBytes = 4 + 2 + 4 + 8 + 1;

// One transmitted payload. Values are already quantised to f32.
struct V2XMessage {
  std::uint32_t sender = 0;
  std::uint64_t timestamp_ms = 0;
  PayloadKind kind = PayloadKind::track;

  // query kinds
  std::uint32_t count = 0;
  std::uint32_t dim = 0;
  std::vector<float> features;  // count x dim, row-major
  std::vector<float> refs;      // count x 2
  std::vector<float> scores;    // count

  // occupancy kind
  std::uint32_t height = 0;
  std::uint32_t width = 0;
  float cell_size = 0.0f;
  float origin_x = 0.0f;
  float origin_y = 0.0f;
  std::vector<float> probs;  // height x width

  // Bytes counted towards bandwidth: features and refs for query kinds,
  // probabilities for occupancy. Headers, grid geometry and scores are excluded.
  std::size_t payload_bytes() const;
  void validate() const;

  friend bool operator==(const V2XMessage&, const V2XMessage&) = default;
};

V2XMessage encode(const QuerySet& qs, std::uint32_t sender, std::uint64_t timestamp_ms);
V2XMessage encode(const OccupancyGrid& grid, std::uint32_t sender, std::uint64_t timestamp_ms);
QuerySet decode_queries(const V2XMessage& msg);
OccupancyGrid decode_grid(const V2XMessage& msg);

// Little-endian wire bytes.
std::vector<std::uint8_t> to_wire(const V2XMessage& msg);
V2XMessage from_wire(std::span<const std::uint8_t> bytes);

}  // namespace v2x
