#include <doctest.h>

#include <cmath>

#include "gcsim/perturbation.hpp"
#include "support.hpp"

using namespace gcsim;
using namespace gcsim::testing;

namespace {

std::string shifted_chain(double dx, double dy) {
  const auto pt = [&](double x, double y) {
    return "[" + std::to_string(x + dx) + "," + std::to_string(y + dy) + "]";
  };
  return "[{\"function\":\"draw_point\",\"args\":{\"points\":[" + pt(-3, -1) + "]}}," +
         "{\"function\":\"draw_point\",\"args\":{\"points\":[" + pt(3, 1) + "]}}," +
         "{\"function\":\"midpoint_or_center\",\"args\":{\"points\":[" + pt(-3, -1) + "," + pt(3, 1) + "]}}," +
         "{\"function\":\"midpoint_or_center\",\"args\":{\"points\":[" + pt(0, 0) + "," + pt(3, 1) + "]}}]";
}

}  // namespace

TEST_SUITE("perturbation") {

TEST_CASE("nested midpoint gain") {
  const TaskPlan plan = plan_from(kMidpointChain);
  const SensitivityReport r = finite_diff_sensitivity(plan, 0);
  const ObjectBlock* d = r.downstream_object("D");
  REQUIRE(d != nullptr);
  CHECK(std::abs(d->gain - 0.25) < 1e-6);
  const Matrix block = r.anchor_block(*d, 0);
  CHECK(std::abs(block(0, 0) - 0.25) < 1e-6);
  CHECK(std::abs(block(1, 1) - 0.25) < 1e-6);
  CHECK(std::abs(block(0, 1)) < 1e-6);
  const ObjectBlock* c = r.downstream_object("C");
  REQUIRE(c != nullptr);
  CHECK(std::abs(c->gain - 0.5) < 1e-6);
  for (const std::string& s : r.column_status) CHECK(s == "ok");
}

TEST_CASE("finite differences are stable under step halving") {
  const TaskPlan plan = plan_from(kMidpointChain);
  const SensitivityReport a = finite_diff_sensitivity(plan, 0, Viewport{}, 1e-3);
  const SensitivityReport b = finite_diff_sensitivity(plan, 0, Viewport{}, 5e-4);
  REQUIRE(a.j_est.data.size() == b.j_est.data.size());
  for (std::size_t i = 0; i < a.j_est.data.size(); ++i) CHECK(std::abs(a.j_est.data[i] - b.j_est.data[i]) < 1e-9);
}

TEST_CASE("linear constructions have position-independent gains") {
  const SensitivityReport base = finite_diff_sensitivity(plan_from(kMidpointChain), 0);
  const SensitivityReport moved = finite_diff_sensitivity(plan_from(shifted_chain(0.5, -0.75)), 0);
  REQUIRE(base.j_est.data.size() == moved.j_est.data.size());
  for (std::size_t i = 0; i < base.j_est.data.size(); ++i) CHECK(std::abs(base.j_est.data[i] - moved.j_est.data[i]) < 1e-6);
}

TEST_CASE("circle through a moved point") {
  const TaskPlan plan = plan_from(R"([
    {"function":"draw_point","args":{"points":[[1,0]]}},
    {"function":"draw_circle_center_point","args":{"points":[[0,0],[1,0]]}}])");
  const SensitivityReport r = finite_diff_sensitivity(plan, 0);
  const ObjectBlock* circle = nullptr;
  for (const ObjectBlock& b : r.downstream) {
    if (b.variant == Variant::Circle) circle = &b;
    else CHECK(b.gain == 0.0);  // the centre does not move
  }
  REQUIRE(circle != nullptr);
  CHECK(std::abs(circle->gain - 1.0) < 1e-6);
  CHECK(std::abs(r.amplification - 1.0) < 1e-6);
}

TEST_CASE("independent point has no downstream effect") {
  const TaskPlan plan = plan_from(R"([
    {"function":"draw_point","args":{"points":[[1,1]]}},
    {"function":"draw_segment","args":{"points":[[-2,-2],[2,-1]]}}])");
  const SensitivityReport r = finite_diff_sensitivity(plan, 0);
  for (double x : r.j_est.data) CHECK(x == 0.0);
  CHECK(r.amplification == 0.0);
  CHECK(r.b_est.max_column_norm() == doctest::Approx(1.0));
}

TEST_CASE("zero-noise cascade is exactly zero") {
  const CascadeReport r = cascade_report(plan_from(kMidpointChain), 0.0, 5);
  CHECK(r.failed_runs == 0);
  for (const ObjectDisplacement& o : r.objects) {
    CHECK(o.mean == 0.0);
    CHECK(o.max == 0.0);
  }
}

TEST_CASE("cascade follows the analytic gain") {
  const CascadeReport r = cascade_report(plan_from(kMidpointChain), 5.0, 500, 1);
  const SourceCascade* a = r.source(0);
  REQUIRE(a != nullptr);
  const ObjectDisplacement* src = nullptr;
  const ObjectDisplacement* d = nullptr;
  for (const ObjectDisplacement& o : a->objects) {
    if (o.label == "A") src = &o;
    if (o.label == "D") d = &o;
  }
  REQUIRE(src != nullptr);
  REQUIRE(d != nullptr);
  REQUIRE(src->mean > 0.0);
  const double ratio = d->mean / src->mean;
  CHECK(ratio >= 0.25 * 0.8);
  CHECK(ratio <= 0.25 * 1.2);
}

TEST_CASE("doubling noise doubles displacement") {
  const TaskPlan plan = plan_from(kMidpointChain);
  const CascadeReport lo = cascade_report(plan, 2.0, 300, 3), hi = cascade_report(plan, 4.0, 300, 3);
  const SourceCascade* a = lo.source(0);
  const SourceCascade* b = hi.source(0);
  REQUIRE(a != nullptr);
  REQUIRE(b != nullptr);
  const double ratio = b->source_mean / a->source_mean;
  CHECK(ratio == doctest::Approx(2.0).epsilon(0.15));
  const double down = b->downstream_mean / a->downstream_mean;
  CHECK(down == doctest::Approx(2.0).epsilon(0.15));
}

TEST_CASE("cascade ranks sources by amplification") {
  const CascadeReport r = cascade_report(plan_from(kMidpointChain), 3.0, 50, 2);
  for (std::size_t i = 1; i < r.sources.size(); ++i) CHECK(r.sources[i - 1].amplification >= r.sources[i].amplification);
  const auto j = r.to_json();
  CHECK(j.contains("sources"));
  CHECK(r.table().find("amplification") != std::string::npos);
}

}  // TEST_SUITE
