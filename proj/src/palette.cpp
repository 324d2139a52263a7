#include "gcsim/palette.hpp"

namespace gcsim {

ToolPalette ToolPalette::standard() {
  ToolPalette p;
  int row = 0;
  for (std::string_view c : categories()) {
    const double y = 8.0 + 40.0 * row++;
    p.category_buttons.push_back(Button{category_button_name(c), std::string(c), BBox{4.0, y, 76.0, y + 32.0}});
  }
  row = 0;
  for (std::string_view c : categories()) {
    for (const FunctionInfo& fi : function_table()) {
      if (fi.category != c) continue;
      const double y = 8.0 + 36.0 * row++;
      p.tool_buttons.push_back(Button{tool_button_name(fi.tool), std::string(c), BBox{84.0, y, 156.0, y + 30.0}});
    }
  }
  p.input_bar = Button{std::string(kInputBarName), {}, BBox{4.0, 672.0, 156.0, 704.0}};
  return p;
}

const Button* ToolPalette::category_button(std::string_view category) const {
  const std::string name = category_button_name(category);
  for (const Button& b : category_buttons) {
    if (b.name == name) return &b;
  }
  return nullptr;
}

const Button* ToolPalette::tool_button(std::string_view tool) const {
  const std::string name = tool_button_name(tool);
  for (const Button& b : tool_buttons) {
    if (b.name == name) return &b;
  }
  return nullptr;
}

std::string ToolPalette::check_invariants(int screen_width, int screen_height) const {
  std::vector<const Button*> all;
  for (const Button& b : category_buttons) all.push_back(&b);
  for (const Button& b : tool_buttons) all.push_back(&b);
  all.push_back(&input_bar);
  for (std::size_t i = 0; i < all.size(); ++i) {
    const BBox& b = all[i]->box;
    if (b.x_min < 0 || b.y_min < 0 || b.x_max > screen_width || b.y_max > screen_height) {
      return all[i]->name + " lies outside the screen";
    }
    if (b.x_max >= kPaletteColumnWidth) return all[i]->name + " intrudes into the canvas region";
    for (std::size_t j = i + 1; j < all.size(); ++j) {
      if (b.overlaps(all[j]->box)) return all[i]->name + " overlaps " + all[j]->name;
    }
  }
  if (active_tool) {
    const Button* t = tool_button(*active_tool);
    if (t == nullptr) return "unknown active tool";
    if (!active_category || t->category != *active_category) return "active tool outside the active category";
  }
  return {};
}

}  // namespace gcsim
