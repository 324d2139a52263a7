#include "gcsim/lower.hpp"

#include "gcsim/error.hpp"

namespace gcsim {

using nlohmann::json;

std::vector<Action> LoweredProgram::flatten() const {
  std::vector<Action> out;
  for (const ActionGroup& g : groups) out.insert(out.end(), g.actions.begin(), g.actions.end());
  return out;
}

std::size_t LoweredProgram::action_count() const {
  std::size_t n = 0;
  for (const ActionGroup& g : groups) n += g.actions.size();
  return n;
}

std::vector<int> LoweredProgram::task_of_step() const {
  std::vector<int> out;
  for (const ActionGroup& g : groups) out.insert(out.end(), g.actions.size(), g.task_index);
  return out;
}

json LoweredProgram::to_json() const {
  json groups_json = json::array();
  for (const ActionGroup& g : groups) {
    json actions = json::array();
    for (const Action& a : g.actions) actions.push_back(a.to_json());
    groups_json.push_back(json{{"task_index", g.task_index}, {"actions", std::move(actions)}});
  }
  return json{{"groups", std::move(groups_json)}, {"action_count", action_count()}};
}

LoweredProgram LoweredProgram::from_json(const json& j) {
  LoweredProgram p;
  for (const json& jg : j.at("groups")) {
    ActionGroup g;
    g.task_index = jg.at("task_index").get<int>();
    for (const json& ja : jg.at("actions")) g.actions.push_back(Action::from_json(ja));
    p.groups.push_back(std::move(g));
  }
  return p;
}

Vec2 normalized_canvas(const Viewport& viewport, Vec2 world) {
  const Vec2 px = project(viewport, world);
  return {px.x / viewport.width, px.y / viewport.height};
}

LoweredProgram lower(const TaskPlan& plan, const ToolPalette& palette, const Viewport& viewport) {
  viewport.validate();
  for (const Diagnostic& d : validate_dependencies(plan)) {
    const Task& t = plan.tasks.at(static_cast<std::size_t>(d.task_index));
    if (info(t.function).requires_existing && d.code != DiagCode::MalformedTask) {
      throw Error(ErrorCode::UseBeforeCreate, "task " + std::to_string(d.task_index) + ": " + d.message);
    }
  }

  std::optional<std::string> category = palette.active_category;
  std::optional<std::string> tool = palette.active_tool;
  LoweredProgram program;
  for (std::size_t i = 0; i < plan.tasks.size(); ++i) {
    const Task& task = plan.tasks[i];
    const FunctionInfo& fi = info(task.function);
    ActionGroup group{static_cast<int>(i), {}};

    if (task.function == Function::GenerateInputAction) {
      const BBox& box = palette.input_bar.box;
      group.actions.push_back(Action::click(std::string(kInputBarName), box.center(), box));
      group.actions.push_back(Action::type(std::string(fi.object_type), task.text));
      program.groups.push_back(std::move(group));
      continue;
    }

    if (tool != fi.tool) {
      if (category != fi.category) {
        const Button* b = palette.category_button(fi.category);
        if (b == nullptr) throw Error(ErrorCode::BadConfig, "palette lacks category " + std::string(fi.category));
        group.actions.push_back(Action::click(b->name, b->box.center(), b->box));
        category = std::string(fi.category);
      }
      const Button* b = palette.tool_button(fi.tool);
      if (b == nullptr) throw Error(ErrorCode::BadConfig, "palette lacks tool " + std::string(fi.tool));
      group.actions.push_back(Action::click(b->name, b->box.center(), b->box));
      tool = std::string(fi.tool);
    }
    for (Vec2 p : task.paint_targets()) {
      group.actions.push_back(Action::paint(std::string(fi.object_type), normalized_canvas(viewport, p)));
    }
    if (fi.takes_text) group.actions.push_back(Action::type(std::string(fi.object_type), task.text));
    program.groups.push_back(std::move(group));
  }
  return program;
}

}  // namespace gcsim
