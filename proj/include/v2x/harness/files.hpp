#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "v2x/comm/message.hpp"
#include "v2x/harness/scenario.hpp"

namespace v2x {

nlohmann::json read_json_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

// Message log: each frame prefixed by its u32 little-endian byte length.
std::string encode_message_log(const std::vector<V2XMessage>& messages);
std::vector<V2XMessage> decode_message_log(const std::string& bytes);
std::string read_binary_file(const std::filesystem::path& path);

// {"count", "seed", "difficulty", "min_agents", "max_agents"}; seeds run seed, seed+1, ...
struct ScenarioBatchSpec {
  std::size_t count = 4;
  std::uint64_t seed = 100;
  int difficulty = 2;
  ScenarioConfig config;
};
ScenarioBatchSpec batch_spec_from_json(const nlohmann::json& j);
std::vector<Scenario> make_batch(const ScenarioBatchSpec& spec);

}  // namespace v2x
