#include "commute/report_json.hpp"

namespace commute {

namespace {

Json point_json(const Point& p, int n) {
  Json a = Json::array();
  for (int i = 0; i < n; ++i)
    a.push_back(p[i]);
  return a;
}

Json nu_json(const IntegerCube& c) {
  Json a = Json::array();
  for (int i = 0; i < c.n; ++i)
    a.push_back(c.nu[i]);
  return a;
}

} // namespace

Json to_json(const TorusDomain& domain) {
  return Json{{"n", domain.n}, {"resolution", domain.resolution}, {"period", domain.period}};
}

Json to_json(const BracketReport& report) {
  return Json{{"c0_norm", report.c0_norm}, {"l1_norm", report.l1_norm}, {"epsilon", report.epsilon}};
}

Json to_json(const CollapseParams& params) {
  return Json{{"eps", params.eps},
              {"lambda_cap", params.lambda_cap},
              {"flow_steps", params.flow_steps},
              {"retry_shrink", params.retry_shrink},
              {"max_retries", params.max_retries}};
}

CollapseParams collapse_params_from_json(const Json& j) {
  CollapseParams p;
  p.eps = j.at("eps").get<double>();
  p.lambda_cap = j.at("lambda_cap").get<double>();
  p.flow_steps = j.at("flow_steps").get<int>();
  p.retry_shrink = j.at("retry_shrink").get<double>();
  p.max_retries = j.at("max_retries").get<int>();
  return p;
}

Json to_json(const CollapseMap& map) {
  Json cubes = Json::array();
  for (const SpecialField& s : map.special_cubes)
    cubes.push_back(Json{{"nu", nu_json(s.cube)}, {"special", true}});
  for (const ClearingField& f : map.clearing)
    cubes.push_back(Json{{"nu", nu_json(f.cube)}, {"p", point_json(f.p, map.n)}, {"eps_c", f.eps_c}});
  return Json{{"mode", to_string(map.mode)},
              {"gamma", map.gamma},
              {"eps", map.params.eps},
              {"lattice_offset", point_json(map.lattice_offset, map.n)},
              {"cubes", std::move(cubes)},
              {"retries_used", map.retries_used}};
}

Json to_json(const DisplacementReport& report) {
  Json j{{"per_coordinate_sup", report.per_coordinate_sup},
         {"max_displacement", report.max_displacement()},
         {"bound", report.bound}};
  if (report.skeleton_max_distance)
    j["skeleton_max_distance"] = *report.skeleton_max_distance;
  else
    j["skeleton_max_distance"] = "not applicable";
  j["samples"] = report.samples;
  j["certified"] = report.certified();
  return j;
}

Json to_json(const DegreeCheck& check) {
  return Json{{"ok", check.ok},
              {"measure", check.measure},
              {"epsilon", check.epsilon},
              {"slack", check.slack},
              {"note", check.note}};
}

Json to_json(const AreaFormulaResult& result) {
  return Json{{"multiplicity_integral", result.multiplicity_integral},
              {"bracket_l1", result.bracket_l1},
              {"residual", result.residual},
              {"flagged_fraction", result.flagged_fraction}};
}

Json to_json(const ApproximationReport& r) {
  return Json{{"bracket_before", to_json(r.bracket_before)},
              {"measure_K", r.measure_k},
              {"bound", r.bound},
              {"lemma_bound", r.lemma_bound},
              {"per_coordinate_displacement", r.per_coordinate_displacement},
              {"max_displacement", r.max_displacement()},
              {"bracket_after_l1", r.bracket_after_l1},
              {"bracket_after_c0", r.bracket_after_c0},
              {"skeleton_max_distance", r.skeleton_max_distance},
              {"degree_check", to_json(r.degree)},
              {"mode", to_string(r.mode)},
              {"gamma", r.gamma},
              {"final_eps", r.final_eps},
              {"retries_used", r.retries_used},
              {"resolutions",
               Json{{"domain", to_json(r.domain)},
                    {"voxel_size", r.settings.voxel_size},
                    {"dilation", r.settings.dilation},
                    {"voxel_count", r.voxel_count},
                    {"params", to_json(r.settings.params)}}},
              {"notes", r.notes},
              {"certified", r.certified()}};
}

Json to_json(const ThicknessReport& report, int n) {
  return Json{{"measure", report.measure},
              {"thickness_upper", report.thickness_upper},
              {"mode", to_string(report.mode)},
              {"certificate", to_json(report.certificate)},
              {"certified", report.certified(n)}};
}

Json to_json(std::span<const SequenceEntry> entries) {
  Json a = Json::array();
  for (const SequenceEntry& e : entries) {
    Json j{{"index", e.index}, {"ok", e.ok}};
    if (!e.ok)
      j["error"] = e.error;
    j["epsilon"] = e.epsilon;
    j["sqrt_epsilon"] = e.sqrt_epsilon;
    j["displacement"] = e.displacement;
    j["cumulative_displacement"] = e.cumulative_displacement;
    if (e.report)
      j["report"] = to_json(*e.report);
    a.push_back(std::move(j));
  }
  return a;
}

} // namespace commute
