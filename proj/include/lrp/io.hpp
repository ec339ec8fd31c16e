#pragma once

#include "lrp/ambiguity.hpp"
#include "lrp/geometry.hpp"
#include "lrp/positioning.hpp"
#include "lrp/scenario.hpp"

#include "json.hpp"

#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

namespace lrp {

/// Invalid configuration input; the message starts with the JSON field path.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string field, const std::string& message)
      : std::runtime_error(field + ": " + message), field_(std::move(field)) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

struct LayoutFile {
  Room room;
  LrpLayout layout;
};

nlohmann::json layout_to_json(const Room& room, const LrpLayout& layout);
LayoutFile layout_from_json(const nlohmann::json& j, const std::string& path = "");
LayoutFile load_layout(const std::filesystem::path& file);
void save_layout(const std::filesystem::path& file, const Room& room, const LrpLayout& layout);

nlohmann::json lut_to_json(const LookupTable& table);
LookupTable lut_from_json(const nlohmann::json& j);
void save_lut(const std::filesystem::path& file, const LookupTable& table);
LookupTable load_lut(const std::filesystem::path& file);

/// CSV with columns p_x,p_y,q_x,q_y,gap_m.
void save_ambiguities_csv(const std::filesystem::path& file, const std::vector<AmbiguityPair>& pairs);

/// Relative `layout_file` references resolve against `base_dir`.
Scenario scenario_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir = ".");
Scenario load_scenario(const std::filesystem::path& file);

/// Parses "WxDxH" such as "5x5x4".
Room parse_room(const std::string& spec);

nlohmann::json read_json(const std::filesystem::path& file);

}  // namespace lrp
