#pragma once

#include <filesystem>
#include <optional>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>

#include "fpnas/space.hpp"

namespace fpnas {

// Shipped space documents; identical to configs/spaces/<name>.json.
namespace presets {

inline constexpr std::string_view kFbnetV2F = R"json({"name":"fbnetv2-f","input_resolution":224,"input_channels":3,"groups":[{"operator":"conv","kernel":3,"channel":16,"repeat":1,"stride":2,"input":{"resolution":224,"channels":3}},{"operator":"mbconv","input":{"resolution":112,"channels":16},"repeat":1,"stride":1,"sharing":"per-group","kernel":[0,3,5],"nonlinearity":["relu","swish"],"splits":[0,1],"expansion":1,"channel":{"min":12,"max":16,"step":4}},{"operator":"mbconv","input":{"resolution":112,"channels":16},"repeat":1,"stride":2,"sharing":"per-group","kernel":[0,3,5],"nonlinearity":["relu","swish"],"splits":[0,1],"expansion":{"min":0.75,"max":4.5,"step":0.75},"channel":{"min":16,"max":24,"step":4}},{"operator":"mbconv","input":{"resolution":56,"channels":24},"repeat":2,"stride":1,"sharing":"per-group","kernel":[0,3,5],"nonlinearity":["relu","swish"],"splits":[0,1],"expansion":{"min":0.75,"max":4.5,"step":0.75},"channel":{"min":16,"max":24,"step":4}},{"operator":"mbconv","input":{"resolution":56,"channels":24},"repeat":1,"stride":2,"sharing":"per-group","kernel":[0,3,5],"nonlinearity":["relu","swish"],"splits":[0,1],"expansion":{"min":0.75,"max":4.5,"step":0.75},"channel":{"min":16,"max":40,"step":8}},{"operator":"mbconv","input":{"resolution":28,"channels":40},"repeat":2,"stride":1,"sharing":"per-group","kernel":[0,3,5],"nonlinearity":["relu","swish"],"splits":[0,1],"expansion":{"min":0.75,"max":4.5,"step":0.75},"channel":{"min":16,"max":40,"step":8}},{"operator":"mbconv","input":{"resolution":28,"channels":40},"repeat":1,"stride":2,"sharing":"per-group","kernel":[0,3,5],"nonlinearity":["relu","swish"],"splits":[0,1],"expansion":{"min":0.75,"max":4.5,"step":0.75},"channel":{"min":48,"max":80,"step":8}},{"operator":"mbconv","input":{"resolution":14,"channels":80},"repeat":2,"stride":1,"sharing":"per-group","kernel":[0,3,5],"nonlinearity":["relu","swish"],"splits":[0,1],"expansion":{"min":0.75,"max":4.5,"step":0.75},"channel":{"min":48,"max":80,"step":8}},{"operator":"mbconv","input":{"resolution":14,"channels":80},"repeat":3,"stride":1,"sharing":"per-group","kernel":[0,3,5],"nonlinearity":["relu","swish"],"splits":[0,1],"expansion":{"min":0.75,"max":4.5,"step":0.75},"channel":{"min":72,"max":112,"step":8}},{"operator":"mbconv","input":{"resolution":14,"channels":112},"repeat":1,"stride":2,"sharing":"per-group","kernel":[0,3,5],"nonlinearity":["relu","swish"],"splits":[0,1],"expansion":{"min":0.75,"max":4.5,"step":0.75},"channel":{"min":112,"max":184,"step":8}},{"operator":"mbconv","input":{"resolution":7,"channels":184},"repeat":3,"stride":1,"sharing":"per-group","kernel":[0,3,5],"nonlinearity":["relu","swish"],"splits":[0,1],"expansion":{"min":0.75,"max":4.5,"step":0.75},"channel":{"min":112,"max":184,"step":8}},{"operator":"conv","kernel":1,"channel":1984,"input":{"resolution":7,"channels":184}},{"operator":"avgpool"},{"operator":"fc","channel":1000}]})json";

inline constexpr std::string_view kFbnetV2FFine = R"json({"name":"fbnetv2-f-fine","input_resolution":224,"input_channels":3,"groups":[{"operator":"conv","kernel":3,"channel":16,"repeat":1,"stride":2,"input":{"resolution":224,"channels":3}},{"operator":"mbconv","input":{"resolution":112,"channels":16},"repeat":1,"stride":1,"sharing":"per-block","kernel":[0,3,5],"nonlinearity":["relu","swish"],"splits":[0,1],"expansion":1,"channel":{"min":12,"max":16,"step":4}},{"operator":"mbconv","input":{"resolution":112,"channels":16},"repeat":1,"stride":2,"sharing":"per-block","kernel":[0,3,5],"nonlinearity":["relu","swish"],"splits":[0,1],"expansion":{"min":0.75,"max":4.5,"step":0.75},"channel":{"min":16,"max":24,"step":4}},{"operator":"mbconv","input":{"resolution":56,"channels":24},"repeat":2,"stride":1,"sharing":"per-block","kernel":[0,3,5],"nonlinearity":["relu","swish"],"splits":[0,1],"expansion":{"min":0.75,"max":4.5,"step":0.75},"channel":{"min":16,"max":24,"step":4}},{"operator":"mbconv","input":{"resolution":56,"channels":24},"repeat":1,"stride":2,"sharing":"per-block","kernel":[0,3,5],"nonlinearity":["relu","swish"],"splits":[0,1],"expansion":{"min":0.75,"max":4.5,"step":0.75},"channel":{"min":16,"max":40,"step":8}},{"operator":"mbconv","input":{"resolution":28,"channels":40},"repeat":2,"stride":1,"sharing":"per-block","kernel":[0,3,5],"nonlinearity":["relu","swish"],"splits":[0,1],"expansion":{"min":0.75,"max":4.5,"step":0.75},"channel":{"min":16,"max":40,"step":8}},{"operator":"mbconv","input":{"resolution":28,"channels":40},"repeat":1,"stride":2,"sharing":"per-block","kernel":[0,3,5],"nonlinearity":["relu","swish"],"splits":[0,1],"expansion":{"min":0.75,"max":4.5,"step":0.75},"channel":{"min":48,"max":80,"step":8}},{"operator":"mbconv","input":{"resolution":14,"channels":80},"repeat":2,"stride":1,"sharing":"per-block","kernel":[0,3,5],"nonlinearity":["relu","swish"],"splits":[0,1],"expansion":{"min":0.75,"max":4.5,"step":0.75},"channel":{"min":48,"max":80,"step":8}},{"operator":"mbconv","input":{"resolution":14,"channels":80},"repeat":3,"stride":1,"sharing":"per-block","kernel":[0,3,5],"nonlinearity":["relu","swish"],"splits":[0,1],"expansion":{"min":0.75,"max":4.5,"step":0.75},"channel":{"min":72,"max":112,"step":8}},{"operator":"mbconv","input":{"resolution":14,"channels":112},"repeat":1,"stride":2,"sharing":"per-block","kernel":[0,3,5],"nonlinearity":["relu","swish"],"splits":[0,1],"expansion":{"min":0.75,"max":4.5,"step":0.75},"channel":{"min":112,"max":184,"step":8}},{"operator":"mbconv","input":{"resolution":7,"channels":184},"repeat":3,"stride":1,"sharing":"per-block","kernel":[0,3,5],"nonlinearity":["relu","swish"],"splits":[0,1],"expansion":{"min":0.75,"max":4.5,"step":0.75},"channel":{"min":112,"max":184,"step":8}},{"operator":"conv","kernel":1,"channel":1984,"input":{"resolution":7,"channels":184}},{"operator":"avgpool"},{"operator":"fc","channel":1000}]})json";

inline constexpr std::string_view kFbnetV2FPlusPlus = R"json({"name":"fbnetv2-f++","input_resolution":224,"input_channels":3,"groups":[{"operator":"conv","kernel":3,"channel":16,"repeat":1,"stride":2,"input":{"resolution":224,"channels":3}},{"operator":"mbconv","input":{"resolution":112,"channels":16},"repeat":1,"stride":1,"sharing":"per-group","kernel":[0,3,5],"nonlinearity":["relu","swish"],"splits":[0,1,2,4],"expansion":1,"channel":{"min":12,"max":16,"step":4}},{"operator":"mbconv","input":{"resolution":112,"channels":16},"repeat":1,"stride":2,"sharing":"per-group","kernel":[0,3,5],"nonlinearity":["relu","swish"],"splits":[0,1,2,4],"expansion":{"min":0.75,"max":4.5,"step":0.75},"channel":{"min":16,"max":24,"step":4}},{"operator":"mbconv","input":{"resolution":56,"channels":24},"repeat":2,"stride":1,"sharing":"per-group","kernel":[0,3,5],"nonlinearity":["relu","swish"],"splits":[0,1,2,4],"expansion":{"min":0.75,"max":4.5,"step":0.75},"channel":{"min":16,"max":24,"step":4}},{"operator":"mbconv","input":{"resolution":56,"channels":24},"repeat":1,"stride":2,"sharing":"per-group","kernel":[0,3,5],"nonlinearity":["relu","swish"],"splits":[0,1,2,4],"expansion":{"min":0.75,"max":4.5,"step":0.75},"channel":{"min":16,"max":40,"step":8}},{"operator":"mbconv","input":{"resolution":28,"channels":40},"repeat":2,"stride":1,"sharing":"per-group","kernel":[0,3,5],"nonlinearity":["relu","swish"],"splits":[0,1,2,4],"expansion":{"min":0.75,"max":4.5,"step":0.75},"channel":{"min":16,"max":40,"step":8}},{"operator":"mbconv","input":{"resolution":28,"channels":40},"repeat":1,"stride":2,"sharing":"per-group","kernel":[0,3,5],"nonlinearity":["relu","swish"],"splits":[0,1,2,4],"expansion":{"min":0.75,"max":4.5,"step":0.75},"channel":{"min":48,"max":80,"step":8}},{"operator":"mbconv","input":{"resolution":14,"channels":80},"repeat":2,"stride":1,"sharing":"per-group","kernel":[0,3,5],"nonlinearity":["relu","swish"],"splits":[0,1,2,4],"expansion":{"min":0.75,"max":4.5,"step":0.75},"channel":{"min":48,"max":80,"step":8}},{"operator":"mbconv","input":{"resolution":14,"channels":80},"repeat":3,"stride":1,"sharing":"per-group","kernel":[0,3,5],"nonlinearity":["relu","swish"],"splits":[0,1,2,4],"expansion":{"min":0.75,"max":4.5,"step":0.75},"channel":{"min":72,"max":112,"step":8}},{"operator":"mbconv","input":{"resolution":14,"channels":112},"repeat":1,"stride":2,"sharing":"per-group","kernel":[0,3,5],"nonlinearity":["relu","swish"],"splits":[0,1,2,4],"expansion":{"min":0.75,"max":4.5,"step":0.75},"channel":{"min":112,"max":184,"step":8}},{"operator":"mbconv","input":{"resolution":7,"channels":184},"repeat":3,"stride":1,"sharing":"per-group","kernel":[0,3,5],"nonlinearity":["relu","swish"],"splits":[0,1,2,4],"expansion":{"min":0.75,"max":4.5,"step":0.75},"channel":{"min":112,"max":184,"step":8}},{"operator":"conv","kernel":1,"channel":1984,"input":{"resolution":7,"channels":184}},{"operator":"avgpool"},{"operator":"fc","channel":1000}]})json";

}  // namespace presets

inline std::optional<std::string_view> preset_document(std::string_view name) {
  if (name == "fbnetv2-f") return presets::kFbnetV2F;
  if (name == "fbnetv2-f-fine") return presets::kFbnetV2FFine;
  if (name == "fbnetv2-f++") return presets::kFbnetV2FPlusPlus;
  return std::nullopt;
}

inline std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError(path.string(), "cannot open file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// A preset name or a path to a space document.
inline SearchSpace load_space(const std::string& name_or_path) {
  if (auto doc = preset_document(name_or_path)) return parse_space(*doc);
  return parse_space(read_text_file(name_or_path));
}

}  // namespace fpnas
