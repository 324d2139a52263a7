#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "gcsim/action.hpp"
#include "gcsim/library.hpp"

namespace gcsim {

inline constexpr int kScreenWidth = 1280;
inline constexpr int kScreenHeight = 720;
/// Left column reserved for the palette; clicks there resolve only to buttons.
inline constexpr double kPaletteColumnWidth = 160.0;

struct Button {
  std::string name;      // "category:<c>", "tool:<t>" or "input_bar"
  std::string category;  // owning category for tool buttons
  BBox box;
};

/// Category/tool buttons, the input bar and the active selection.
struct ToolPalette {
  std::vector<Button> category_buttons;
  std::vector<Button> tool_buttons;
  Button input_bar;
  std::optional<std::string> active_category;
  std::optional<std::string> active_tool;

  /// Standard layout: categories in one column, every tool in a second
  /// column, the input bar at the bottom of the palette.
  static ToolPalette standard();

  const Button* category_button(std::string_view category) const;
  const Button* tool_button(std::string_view tool) const;
  /// Empty string when the invariants hold.
  std::string check_invariants(int screen_width = kScreenWidth, int screen_height = kScreenHeight) const;

  friend bool operator==(const ToolPalette&, const ToolPalette&) = default;
};

inline std::string category_button_name(std::string_view c) { return "category:" + std::string(c); }
inline std::string tool_button_name(std::string_view t) { return "tool:" + std::string(t); }
inline constexpr std::string_view kInputBarName = "input_bar";

}  // namespace gcsim
