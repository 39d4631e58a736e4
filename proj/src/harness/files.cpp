#include "v2x/harness/files.hpp"

#include <fstream>
#include <set>
#include <sstream>

namespace v2x {

nlohmann::json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw DecodeError(path.string() + ": " + e.what());
  }
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

std::string read_binary_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string encode_message_log(const std::vector<V2XMessage>& messages) {
  std::string out;
  for (const auto& m : messages) {
    const std::vector<std::uint8_t> frame = to_wire(m);
    const auto n = static_cast<std::uint32_t>(frame.size());
    for (int b = 0; b < 4; ++b) out.push_back(static_cast<char>((n >> (8 * b)) & 0xFF));
    out.append(frame.begin(), frame.end());
  }
  return out;
}

std::vector<V2XMessage> decode_message_log(const std::string& bytes) {
  std::vector<V2XMessage> out;
  std::size_t pos = 0;
  while (pos < bytes.size()) {
    if (bytes.size() - pos < 4) throw DecodeError("message log: truncated length prefix");
    std::uint32_t n = 0;
    for (int b = 0; b < 4; ++b) n |= static_cast<std::uint32_t>(static_cast<std::uint8_t>(bytes[pos + b])) << (8 * b);
    pos += 4;
    if (bytes.size() - pos < n) throw DecodeError("message log: truncated frame");
    const auto* p = reinterpret_cast<const std::uint8_t*>(bytes.data() + pos);
    out.push_back(from_wire(std::span<const std::uint8_t>(p, n)));
    pos += n;
  }
  return out;
}

ScenarioBatchSpec batch_spec_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ContractError("scenario batch must be a JSON object");
  const std::set<std::string> known{"count", "seed", "difficulty", "min_agents", "max_agents"};
  for (const auto& [k, v] : j.items()) {
    if (!known.count(k)) throw ContractError("unknown key '" + k + "' in scenarios");
  }
  ScenarioBatchSpec s;
  s.count = j.value("count", s.count);
  s.seed = j.value("seed", s.seed);
  s.difficulty = j.value("difficulty", s.difficulty);
  s.config.min_agents = j.value("min_agents", s.config.min_agents);
  s.config.max_agents = j.value("max_agents", s.config.max_agents);
  if (s.count == 0) throw ContractError("scenario count must be at least 1");
  s.config.validate();
  return s;
}

std::vector<Scenario> make_batch(const ScenarioBatchSpec& spec) {
  std::vector<Scenario> out;
  for (std::size_t i = 0; i < spec.count; ++i) out.push_back(gen_scenario(spec.seed + i, spec.difficulty, spec.config));
  return out;
}

}  // namespace v2x
