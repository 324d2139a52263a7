# Writes the bundled corpus plans. Reference scenes come from `gcsim reference`.
import json, os, sys
out = sys.argv[1] if len(sys.argv) > 1 else os.path.join(os.path.dirname(os.path.abspath(__file__)), "..", "corpus")
def t(fn, pts=None, text=None, position=None):
    a = {}
    if pts is not None: a["points"] = pts
    if position is not None: a["position"] = position
    if text is not None: a["text"] = text
    return {"function": fn, "args": a}
P = []
def add(id, instr, diff, grade, skills, tasks):
    P.append({"id": id, "instruction": instr, "plan": {"description": instr, "grade_level": grade,
              "drawing_difficulty": diff, "skills": skills, "tasks": tasks}})

add("segment_midpoint", "Draw segment AB and mark its midpoint M.", "Beginner", "Grade 6", ["segments", "midpoints"], [
    t("draw_segment", [[-2, -1], [2, 1]]), t("midpoint_or_center", [[-2, -1], [2, 1]]),
    t("add_text_label", text="M", position=[0.2, 0.6])])
add("two_points_line", "Plot points P and Q and draw the line through them.", "Beginner", "Grade 6", ["lines"], [
    t("draw_point", [[-2, 2]]), t("draw_point", [[3, -1]]), t("draw_line", [[-2, 2], [3, -1]])])
add("ray_from_origin", "Draw a ray from O through A and label it.", "Beginner", "Grade 7", ["rays"], [
    t("draw_ray", [[0, 0], [3, 2]]), t("add_text_label", text="r", position=[1.5, 1.4])])
add("triangle_basic", "Draw triangle ABC.", "Beginner", "Grade 6", ["polygons"], [
    t("draw_polygon", [[-2, -2], [3, -2], [0, 3]])])
add("circle_radius", "Draw a circle with center O through point A.", "Beginner", "Grade 7", ["circles"], [
    t("draw_circle_center_point", [[0, 0], [2, 0]]), t("draw_segment", [[0, 0], [2, 0]])])
add("nested_midpoints", "Plot A and B, mark the midpoint C of AB, then the midpoint D of CB.", "Beginner", "Grade 7", ["midpoints"], [
    t("draw_point", [[-3, -1]]), t("draw_point", [[3, 1]]),
    t("midpoint_or_center", [[-3, -1], [3, 1]]), t("midpoint_or_center", [[0, 0], [3, 1]])])
add("input_point", "Enter P=(1,2) in the input bar and draw segment OP.", "Beginner", "Grade 8", ["coordinates"], [
    t("generate_input_action", text="P=(1,2)"), t("draw_segment", [[0, 0], [1, 2]])])
add("perpendicular_through_point", "Draw line AB and the perpendicular to it through C.", "Intermediate", "Grade 8", ["perpendicular"], [
    t("draw_line", [[-3, -1], [3, 1]]), t("draw_point", [[0, 3]]),
    t("perpendicular_line", [[0, 0], [0, 3]])])
add("parallel_through_point", "Draw segment AB and the line through C parallel to it.", "Intermediate", "Grade 8", ["parallel"], [
    t("draw_segment", [[-3, -2], [2, -2]]), t("draw_point", [[0, 2]]),
    t("parallel_line", [[-1, -2], [0, 2]])])
add("perpendicular_bisector_segment", "Construct the perpendicular bisector of AB.", "Intermediate", "Grade 8", ["bisectors"], [
    t("draw_segment", [[-2, -1], [2, 1]]), t("perpendicular_bisector", [[-2, -1], [2, 1]]),
    t("midpoint_or_center", [[-2, -1], [2, 1]])])
add("angle_bisector_triangle", "Draw triangle ABC and bisect angle A.", "Intermediate", "Grade 9", ["angle bisector"], [
    t("draw_polygon", [[-2, -2], [3, -2], [0, 3]]), t("angle_bisector", [[3, -2], [-2, -2], [0, 3]]),
    t("add_text_label", text="A", position=[-2.4, -2.3])])
add("semicircle_diameter", "Draw segment AB and the semicircle on it.", "Intermediate", "Grade 9", ["circles"], [
    t("draw_segment", [[-2, 0], [2, 0]]), t("semicircle", [[-2, 0], [2, 0]])])
add("sector_quarter", "Draw a circular sector with center O from A to B.", "Intermediate", "Grade 9", ["sectors"], [
    t("circular_sector", [[0, 0], [2, 0], [0, 2]]), t("add_text_label", text="90", position=[0.4, 0.4])])
add("parabola_focus", "Draw the parabola with focus F and directrix through D.", "Intermediate", "Grade 10", ["conics"], [
    t("parabola", [[0, 1], [0, -1]]), t("add_text_label", text="F", position=[0.3, 1.2])])
add("tangents_from_point", "Draw circle c and the tangents from external point P.", "Advanced", "Grade 10", ["tangents"], [
    t("draw_circle_center_point", [[0, 0], [1.5, 0]]), t("draw_point", [[3.5, 2]]),
    t("tangents", [[3.5, 2], [1.5, 0]])])
add("hyperbola_foci", "Draw the hyperbola with foci F1, F2 through P.", "Advanced", "Grade 11", ["conics"], [
    t("hyperbola", [[-2, 0], [2, 0], [1.5, 2]]), t("draw_segment", [[-2, 0], [2, 0]])])
add("incenter_construction", "Bisect two angles of triangle ABC and mark their intersection region.", "Advanced", "Grade 10", ["angle bisector", "incenter"], [
    t("draw_polygon", [[-3, -2], [3, -2], [0, 3]]),
    t("angle_bisector", [[3, -2], [-3, -2], [0, 3]]),
    t("angle_bisector", [[-3, -2], [3, -2], [0, 3]]),
    t("add_text_label", text="I", position=[0.3, -0.6])])
add("circumcircle_bisectors", "Construct the perpendicular bisectors of AB and BC of triangle ABC.", "Advanced", "Grade 10", ["bisectors", "circumcenter"], [
    t("draw_polygon", [[-3, -2], [3, -2], [1, 3]]),
    t("perpendicular_bisector", [[-3, -2], [3, -2]]),
    t("perpendicular_bisector", [[3, -2], [1, 3]]),
    t("midpoint_or_center", [[-3, -2], [3, -2]])])
add("square_with_diagonals", "Draw square ABCD, its diagonals and its center.", "Advanced", "Grade 9", ["polygons", "midpoints"], [
    t("draw_polygon", [[-2, -2], [2, -2], [2, 2], [-2, 2]]),
    t("draw_segment", [[-2, -2], [2, 2]]), t("draw_segment", [[2, -2], [-2, 2]]),
    t("midpoint_or_center", [[-2, -2], [2, 2]]), t("add_text_label", text="O", position=[0.3, 0.3])])
add("parallelogram_parallels", "Build a parallelogram from AB and AD using parallel lines.", "Advanced", "Grade 9", ["parallel", "quadrilaterals"], [
    t("draw_segment", [[-3, -2], [1, -2]]), t("draw_segment", [[-3, -2], [-1, 2]]),
    t("parallel_line", [[-1, -2], [-1, 2]]), t("parallel_line", [[-2, 0], [1, -2]]),
    t("generate_input_action", text="S=(3,2)")])
add("square_side_two", "Draw a square with side length 2.", "Beginner", "Grade 7",
    ["Basic object construction", "Numerical and metric constraints", "Natural language to tool mapping ability"], [
    t("draw_polygon", [[0, 0], [2, 0], [2, 2], [0, 2]])])
add("triangle_bisector_label", "Construct triangle ABC and the angle bisector of angle A. Label the bisector as L1.",
    "Intermediate", "Grade 8", ["Basic object construction", "Geometric relations and constraints",
    "Multi-step dependency planning ability", "Natural language to tool mapping ability"], [
    t("draw_polygon", [[-1, 0], [3, 0], [1, 3]]), t("angle_bisector", [[3, 0], [-1, 0], [1, 3]]),
    t("add_text_label", text="L1", position=[0.5, 1])])

os.makedirs(out, exist_ok=True)
for p in P:
    with open(os.path.join(out, p["id"] + ".json"), "w") as f:
        json.dump(p, f, indent=2); f.write("\n")
fns = {t_["function"] for p in P for t_ in p["plan"]["tasks"]}
print(len(P), "problems,", len(fns), "functions")
