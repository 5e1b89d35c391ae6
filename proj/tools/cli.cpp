#include "cli.hpp"

#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "commute/bracket.hpp"
#include "commute/errors.hpp"
#include "commute/io.hpp"
#include "commute/pipeline.hpp"

namespace commute::cli {

namespace {

constexpr std::string_view kExprPrefix = "expr:";

bool is_expression(const std::string& s) { return s.rfind(kExprPrefix, 0) == 0; }

// Loads every input on one domain. File inputs fix the domain; otherwise it
// comes from --dim/--resolution/--period.
std::vector<GridField> load_fields(const std::vector<std::string>& inputs, const RunConfig& c,
                                   const std::filesystem::path& base = {}) {
  if (inputs.empty())
    throw UsageError("no inputs");
  std::vector<std::optional<GridField>> loaded(inputs.size());
  std::optional<TorusDomain> domain;
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    if (is_expression(inputs[i]))
      continue;
    loaded[i] = read_fgrid((base / inputs[i]).string());
    if (!domain)
      domain = loaded[i]->domain();
    else if (!(loaded[i]->domain() == *domain))
      throw UsageError("input domains differ: " + inputs[i]);
  }
  if (!domain) {
    domain = TorusDomain::uniform(c.dim, c.resolution, c.period);
    domain->validate();
  }
  std::vector<GridField> fields;
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    if (loaded[i])
      fields.push_back(std::move(*loaded[i]));
    else
      fields.push_back(sample_field(*domain, inputs[i].substr(kExprPrefix.size())));
  }
  require_shared_domain(fields);
  return fields;
}

Json voxels_json(const VoxelSet& k) {
  return Json{{"n", k.dim()}, {"voxel_size", k.voxel_size()}, {"count", k.count()}, {"measure", k.measure()}};
}

ApproximationSettings settings_of(const RunConfig& c) {
  ApproximationSettings s;
  s.voxel_size = c.voxel_size;
  s.dilation = c.dilation;
  s.params = c.params;
  return s;
}

Json header(const RunConfig& c) { return Json{{"command", c.command}, {"config", config_to_json(c)}}; }

Outcome run_bracket(const RunConfig& c) {
  const std::vector<GridField> fields = load_fields(c.inputs, c);
  const GridField b = bracket(fields);
  Outcome o;
  o.report = header(c);
  o.report["domain"] = to_json(b.domain());
  o.report["bracket"] = to_json(bracket_report(b));
  if (!c.out.empty())
    o.artifacts.emplace_back(c.out, encode_fgrid(b));
  return o;
}

Outcome run_approximate(const RunConfig& c) {
  const std::vector<GridField> fields = load_fields(c.inputs, c);
  const Approximation a = commuting_approximation(fields, settings_of(c));
  Outcome o;
  o.report = header(c);
  o.report["report"] = to_json(a.report);
  o.report["collapse_map"] = to_json(a.map);
  if (!c.out_prefix.empty()) {
    for (std::size_t i = 0; i < a.fields.size(); ++i)
      o.artifacts.emplace_back(c.out_prefix + std::to_string(i + 1) + ".fgrd", encode_fgrid(a.fields[i]));
  }
  if (!c.voxels_out.empty())
    o.artifacts.emplace_back(c.voxels_out, encode_voxset(a.image));
  o.status = a.report.certified() ? kOk : kCertificate;
  return o;
}

std::string graph_csv(const CollapseMap& map, const VoxelSet& k) {
  std::ostringstream csv;
  csv << std::setprecision(17);
  const int n = k.dim();
  const char* names[] = {"x", "y", "z"};
  for (int a = 0; a < n; ++a)
    csv << names[a] << ',';
  for (int a = 0; a < n; ++a)
    csv << "phi_" << names[a] << (a + 1 < n ? "," : "\n");
  Point lo{}, hi{};
  for (std::size_t id = 0; id < k.count(); ++id) {
    k.voxel_box(id, lo, hi);
    Point mid{};
    for (int a = 0; a < n; ++a)
      mid[a] = 0.5 * (lo[a] + hi[a]);
    const Point phi = map.evaluate(std::span<const double>(mid.data(), static_cast<std::size_t>(n)));
    for (int a = 0; a < n; ++a)
      csv << mid[a] << ',';
    for (int a = 0; a < n; ++a)
      csv << phi[a] << (a + 1 < n ? "," : "\n");
  }
  return csv.str();
}

Outcome run_collapse(const RunConfig& c) {
  const VoxelSet k = read_voxset(c.voxels);
  const CollapseMap map = build_collapse_map(k, c.params);
  const DisplacementReport d = displacement_report(map, k, c.samples, c.seed);
  Outcome o;
  o.report = header(c);
  o.report["voxels"] = voxels_json(k);
  o.report["collapse_map"] = to_json(map);
  o.report["displacement"] = to_json(d);
  if (!c.graph_out.empty())
    o.artifacts.emplace_back(c.graph_out, graph_csv(map, k));
  o.status = d.certified() ? kOk : kCertificate;
  return o;
}

Outcome run_thickness(const RunConfig& c) {
  const VoxelSet k = read_voxset(c.voxels);
  const ThicknessReport t = thickness_upper_bound(k, c.params, c.samples, c.seed);
  Outcome o;
  o.report = header(c);
  o.report["voxels"] = voxels_json(k);
  o.report["thickness"] = to_json(t, k.dim());
  o.status = t.certified(k.dim()) ? kOk : kCertificate;
  return o;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos)
    return {};
  return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
}

// One pair per line, "F ; G"; blank lines and '#' comments are skipped.
// Relative file inputs resolve against the manifest's directory.
Outcome run_sequence(const RunConfig& c) {
  std::istringstream text(read_file(c.manifest));
  const std::filesystem::path base = std::filesystem::path(c.manifest).parent_path();
  RunConfig flat = c;
  flat.dim = 2;
  std::vector<std::array<GridField, 2>> pairs;
  std::string line;
  int line_no = 0;
  while (std::getline(text, line)) {
    ++line_no;
    line = trim(line);
    if (line.empty() || line.front() == '#')
      continue;
    const auto sep = line.find(';');
    if (sep == std::string::npos)
      throw FormatError("manifest line " + std::to_string(line_no) + ": expected 'F ; G'");
    const std::vector<std::string> inputs{trim(line.substr(0, sep)), trim(line.substr(sep + 1))};
    std::vector<GridField> f = load_fields(inputs, flat, base);
    if (!pairs.empty() && !(f[0].domain() == pairs.front()[0].domain()))
      throw UsageError("manifest line " + std::to_string(line_no) + ": pairs must share one domain");
    pairs.push_back({std::move(f[0]), std::move(f[1])});
  }
  const std::vector<SequenceEntry> entries = commuting_sequence(pairs, settings_of(c));
  Outcome o;
  o.report = header(c);
  o.report["entries"] = to_json(entries);
  bool all_ok = true;
  bool certified = true;
  for (const SequenceEntry& e : entries) {
    all_ok = all_ok && e.ok;
    if (e.report && !e.report->certified())
      certified = false;
    if (e.ok && !c.out_prefix.empty()) {
      for (std::size_t i = 0; i < e.fields.size(); ++i)
        o.artifacts.emplace_back(c.out_prefix + std::to_string(e.index + 1) + "_" + std::to_string(i + 1) + ".fgrd",
                                 encode_fgrid(e.fields[i]));
    }
  }
  o.report["all_ok"] = all_ok;
  o.report["certified"] = certified;
  o.status = certified ? kOk : kCertificate;
  return o;
}

Outcome run_verify(const RunConfig& c) {
  Json saved;
  try {
    saved = Json::parse(read_file(c.report));
  } catch (const Json::exception& e) {
    throw FormatError(std::string("report is not valid JSON: ") + e.what());
  }
  RunConfig again;
  try {
    again = config_from_json(saved.at("config"));
  } catch (const Json::exception& e) {
    throw FormatError(std::string("report has no usable config block: ") + e.what());
  }
  if (again.command == "verify")
    throw UsageError("cannot verify a verify report");
  const Outcome rerun = execute(again);

  Outcome o;
  Json mismatched = Json::array();
  for (const auto& [key, value] : rerun.report.items()) {
    if (!saved.contains(key) || saved.at(key) != value)
      mismatched.push_back(key);
  }
  for (const auto& [key, value] : saved.items()) {
    if (!rerun.report.contains(key))
      mismatched.push_back(key);
  }
  o.report = Json{{"command", "verify"},
                  {"verified_command", again.command},
                  {"matches", mismatched.empty()},
                  {"mismatched_keys", mismatched},
                  {"rerun_status", rerun.status}};
  o.status = (mismatched.empty() && rerun.status == kOk) ? kOk : kCertificate;
  return o;
}

} // namespace

Json config_to_json(const RunConfig& c) {
  return Json{{"command", c.command},
              {"inputs", c.inputs},
              {"voxels", c.voxels},
              {"manifest", c.manifest},
              {"dim", c.dim},
              {"resolution", c.resolution},
              {"period", c.period},
              {"voxel_size", c.voxel_size},
              {"dilation", c.dilation},
              {"samples", c.samples},
              {"seed", c.seed},
              {"params", to_json(c.params)}};
}

RunConfig config_from_json(const Json& j) {
  RunConfig c;
  c.command = j.at("command").get<std::string>();
  c.inputs = j.at("inputs").get<std::vector<std::string>>();
  c.voxels = j.at("voxels").get<std::string>();
  c.manifest = j.at("manifest").get<std::string>();
  c.dim = j.at("dim").get<int>();
  c.resolution = j.at("resolution").get<int>();
  c.period = j.at("period").get<double>();
  c.voxel_size = j.at("voxel_size").get<double>();
  c.dilation = j.at("dilation").get<int>();
  c.samples = j.at("samples").get<int>();
  c.seed = j.at("seed").get<std::uint64_t>();
  c.params = collapse_params_from_json(j.at("params"));
  return c;
}

Outcome execute(const RunConfig& c) {
  c.params.validate();
  if (c.command == "bracket")
    return run_bracket(c);
  if (c.command == "approximate")
    return run_approximate(c);
  if (c.command == "collapse")
    return run_collapse(c);
  if (c.command == "thickness")
    return run_thickness(c);
  if (c.command == "sequence")
    return run_sequence(c);
  if (c.command == "verify")
    return run_verify(c);
  throw UsageError("unknown command '" + c.command + "'");
}

int run(const RunConfig& c, std::ostream& out, std::ostream& log) {
  Outcome o;
  try {
    o = execute(c);
  } catch (const UsageError& e) {
    log << "commute: usage error: " << e.what() << '\n';
    return kUsage;
  } catch (const FormatError& e) {
    log << "commute: format error: " << e.what() << '\n';
    return kFormat;
  } catch (const ConstructionError& e) {
    log << "commute: construction failed: " << e.what() << '\n';
    return kConstruction;
  } catch (const IoError& e) {
    log << "commute: I/O error: " << e.what() << '\n';
    return kIo;
  }
  try {
    for (const auto& [path, bytes] : o.artifacts)
      write_file(path, bytes);
    const std::string text = o.report.dump(2) + "\n";
    if (c.command == "verify" || c.report.empty())
      out << text;
    else
      write_file(c.report, text);
  } catch (const IoError& e) {
    log << "commute: I/O error: " << e.what() << '\n';
    return kIo;
  }
  if (o.status == kCertificate)
    log << "commute: certificate violated\n";
  return o.status;
}

int main_entry(const std::vector<std::string>& args, std::ostream& out, std::ostream& log) {
  CLI::App app{"Commuting approximations of functions with small volume bracket", "commute"};
  app.set_config("--config", "", "key=value file with option defaults");
  app.require_subcommand(1);

  RunConfig c;
  const auto add_grid = [&](CLI::App* sub) {
    sub->add_option("--in", c.inputs, "FGRID path or expr:<expression>")->required();
    sub->add_option("--dim", c.dim, "torus dimension for expr: inputs")->check(CLI::IsMember({2, 3}));
    sub->add_option("--resolution", c.resolution, "grid points per axis for expr: inputs");
    sub->add_option("--period", c.period, "torus side length for expr: inputs");
  };
  const auto add_collapse = [&](CLI::App* sub) {
    sub->add_option("--eps", c.params.eps, "centre-ball radius cap, (0, 1/6]");
    sub->add_option("--lambda-cap", c.params.lambda_cap, "mollifier sharpness");
    sub->add_option("--flow-steps", c.params.flow_steps, "minimum RK4 steps");
    sub->add_option("--retry-shrink", c.params.retry_shrink, "eps back-off factor");
    sub->add_option("--max-retries", c.params.max_retries, "eps back-off attempts");
  };
  const auto add_voxel = [&](CLI::App* sub) {
    sub->add_option("--voxel-size", c.voxel_size, "voxel side of the image lattice");
    sub->add_option("--dilation", c.dilation, "Chebyshev dilation in voxels");
  };
  const auto add_samples = [&](CLI::App* sub) {
    sub->add_option("--samples", c.samples, "random samples per voxel (>= 8)");
    sub->add_option("--seed", c.seed, "sampling seed");
  };

  CLI::App* bracket_cmd = app.add_subcommand("bracket", "bracket of n fields and its norms");
  add_grid(bracket_cmd);
  bracket_cmd->add_option("--report", c.report, "JSON report path (stdout if omitted)");
  bracket_cmd->add_option("--out", c.out, "write the bracket as FGRID");

  CLI::App* approx_cmd = app.add_subcommand("approximate", "exactly commuting approximation");
  add_grid(approx_cmd);
  add_voxel(approx_cmd);
  add_collapse(approx_cmd);
  approx_cmd->add_option("--out-prefix", c.out_prefix, "write F'_i to <prefix><i>.fgrd");
  approx_cmd->add_option("--voxels-out", c.voxels_out, "write the voxelized image as VOXSET");
  approx_cmd->add_option("--report", c.report, "JSON report path (stdout if omitted)");

  CLI::App* collapse_cmd = app.add_subcommand("collapse", "collapse map of a voxel set");
  collapse_cmd->add_option("--voxels", c.voxels, "VOXSET path")->required();
  add_collapse(collapse_cmd);
  add_samples(collapse_cmd);
  collapse_cmd->add_option("--graph-out", c.graph_out, "CSV of voxel centres and their images");
  collapse_cmd->add_option("--report", c.report, "JSON report path (stdout if omitted)");

  CLI::App* thick_cmd = app.add_subcommand("thickness", "thickness upper bound of a voxel set");
  thick_cmd->add_option("--voxels", c.voxels, "VOXSET path")->required();
  add_collapse(thick_cmd);
  add_samples(thick_cmd);
  thick_cmd->add_option("--report", c.report, "JSON report path (stdout if omitted)");

  CLI::App* seq_cmd = app.add_subcommand("sequence", "approximation of a sequence of pairs");
  seq_cmd->add_option("--manifest", c.manifest, "one 'F ; G' pair per line")->required();
  seq_cmd->add_option("--resolution", c.resolution, "grid points per axis for expr: inputs");
  seq_cmd->add_option("--period", c.period, "torus side length for expr: inputs");
  add_voxel(seq_cmd);
  add_collapse(seq_cmd);
  seq_cmd->add_option("--out-prefix", c.out_prefix, "write pair k to <prefix><k>_<i>.fgrd");
  seq_cmd->add_option("--report", c.report, "JSON report path (stdout if omitted)");

  CLI::App* verify_cmd = app.add_subcommand("verify", "re-run a saved report and compare");
  verify_cmd->add_option("--report", c.report, "saved JSON report")->required();

  std::vector<const char*> argv{"commute"};
  for (const std::string& a : args)
    argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    log << "commute: " << e.what() << '\n';
    return kUsage;
  }
  c.command = app.get_subcommands().front()->get_name();
  return run(c, out, log);
}

} // namespace commute::cli
