#include "depsentry/report.hpp"

#include <chrono>
#include <ctime>
#include <map>
#include <sstream>

#include "depsentry/errors.hpp"
#include "depsentry/scanner.hpp"

namespace depsentry {

using nlohmann::json;

void Report::finalize() { sort_findings(findings); }

std::string_view to_string(ReportFormat f) {
  switch (f) {
    case ReportFormat::Text: return "text";
    case ReportFormat::Json: return "json";
    case ReportFormat::Sarif: return "sarif";
  }
  return "text";
}

std::optional<ReportFormat> report_format_from_string(std::string_view s) {
  if (s == "text") return ReportFormat::Text;
  if (s == "json") return ReportFormat::Json;
  if (s == "sarif") return ReportFormat::Sarif;
  return std::nullopt;
}

std::string current_timestamp() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

namespace {

[[noreturn]] void malformed(const std::string& what) {
  throw Error(ErrorCode::ConfigInvalid, "malformed report: " + what);
}

template <typename T, typename F>
T parse_enum(const json& j, F&& from_string, const char* what) {
  if (!j.is_string()) malformed(std::string(what) + " is not a string");
  auto v = from_string(j.get<std::string>());
  if (!v) malformed(std::string("unknown ") + what + " \"" + j.get<std::string>() + "\"");
  return *v;
}

json coords_json(const PackageCoordinates& c) {
  return json{{"ecosystem", to_string(c.ecosystem)}, {"name", c.name}, {"version", c.version}};
}

PackageCoordinates coords_from(const json& j) {
  PackageCoordinates c;
  c.ecosystem = parse_enum<Ecosystem>(j.at("ecosystem"), ecosystem_from_string, "ecosystem");
  c.name = j.at("name").get<std::string>();
  c.version = j.at("version").get<std::string>();
  return c;
}

json edge_json(const DependencyEdge& e) {
  return json{{"from", coords_json(e.from)}, {"to", coords_json(e.to)}, {"kind", to_string(e.kind)}};
}

DependencyEdge edge_from(const json& j) {
  DependencyEdge e;
  e.from = coords_from(j.at("from"));
  e.to = coords_from(j.at("to"));
  const auto kind = j.at("kind").get<std::string>();
  if (kind != "direct" && kind != "transitive") malformed("unknown edge kind \"" + kind + "\"");
  e.kind = kind == "direct" ? EdgeKind::Direct : EdgeKind::Transitive;
  return e;
}

json rollup_json(const RollUp& r) {
  json ids = json::array();
  for (auto id : r.techniques) ids.push_back(to_string(id));
  return json{{"id", to_string(r.id)},           {"severity", to_string(r.severity)},
              {"confidence", to_string(r.confidence)}, {"package", r.package},
              {"depth", r.depth},                {"techniques", ids},
              {"message", r.message}};
}

RollUp rollup_from(const json& j) {
  RollUp r;
  r.id = parse_enum<TechniqueId>(j.at("id"), technique_from_string, "technique");
  r.severity = parse_enum<Severity>(j.at("severity"), severity_from_string, "severity");
  r.confidence = parse_enum<Confidence>(j.at("confidence"), confidence_from_string, "confidence");
  r.package = j.at("package").get<std::string>();
  r.depth = j.at("depth").get<int>();
  for (const auto& t : j.at("techniques")) r.techniques.push_back(parse_enum<TechniqueId>(t, technique_from_string, "technique"));
  r.message = j.at("message").get<std::string>();
  return r;
}

}  // namespace

json to_json(const Finding& f) {
  json props = json::array();
  for (const auto& [k, v] : f.properties) props.push_back(json{{"name", k}, {"value", v}});
  json j{{"id", to_string(f.id)},
         {"severity", to_string(f.severity)},
         {"confidence", to_string(f.confidence)},
         {"location",
          {{"path", f.location.path},
           {"line_start", f.location.line_start},
           {"line_end", f.location.line_end},
           {"byte_start", f.location.byte_start},
           {"byte_end", f.location.byte_end}}},
         {"manifest_key", f.manifest_key},
         {"evidence", f.evidence},
         {"message", f.message},
         {"remediation_ref", f.remediation_ref},
         {"properties", props}};
  if (!f.package.empty()) j["package"] = f.package;
  if (f.depth) j["depth"] = *f.depth;
  return j;
}

Finding finding_from_json(const json& j) {
  try {
    Finding f;
    f.id = parse_enum<TechniqueId>(j.at("id"), technique_from_string, "technique");
    f.severity = parse_enum<Severity>(j.at("severity"), severity_from_string, "severity");
    f.confidence = parse_enum<Confidence>(j.at("confidence"), confidence_from_string, "confidence");
    const json& loc = j.at("location");
    f.location.path = loc.at("path").get<std::string>();
    f.location.line_start = loc.at("line_start").get<std::uint32_t>();
    f.location.line_end = loc.at("line_end").get<std::uint32_t>();
    f.location.byte_start = loc.at("byte_start").get<std::uint64_t>();
    f.location.byte_end = loc.at("byte_end").get<std::uint64_t>();
    f.manifest_key = j.value("manifest_key", "");
    f.evidence = j.at("evidence").get<std::string>();
    f.message = j.at("message").get<std::string>();
    f.remediation_ref = j.value("remediation_ref", "");
    f.package = j.value("package", "");
    if (j.contains("depth")) f.depth = j.at("depth").get<int>();
    for (const auto& p : j.value("properties", json::array()))
      f.properties.emplace_back(p.at("name").get<std::string>(), p.at("value").get<std::string>());
    return f;
  } catch (const json::exception& e) {
    malformed(e.what());
  }
}

json to_json(const SimulationReport& s) {
  json rows = json::array();
  for (const auto& r : s.rows)
    rows.push_back(json{{"phase", to_string(r.execution.phase)},
                        {"hook_or_file", r.execution.hook_or_file},
                        {"command_text", r.execution.command_text},
                        {"source", r.execution.source},
                        {"suppressed_by", r.suppressed_by}});
  return json{{"package", coords_json(s.package)},
              {"context",
               {{"command", to_string(s.context.command)},
                {"ignore_scripts", s.context.ignore_scripts},
                {"only_binary_all", s.context.only_binary_all},
                {"no_autoloader", s.context.no_autoloader},
                {"lockfile_present", s.context.lockfile_present}}},
              {"rows", rows},
              {"install_fails", s.install_fails},
              {"notes", s.notes},
              {"unused_flags", s.unused_flags}};
}

SimulationReport simulation_from_json(const json& j) {
  try {
    SimulationReport s;
    s.package = coords_from(j.at("package"));
    const json& c = j.at("context");
    s.context.command = parse_enum<InstallCommand>(c.at("command"), install_command_from_string, "command");
    s.context.ignore_scripts = c.at("ignore_scripts").get<bool>();
    s.context.only_binary_all = c.at("only_binary_all").get<bool>();
    s.context.no_autoloader = c.at("no_autoloader").get<bool>();
    s.context.lockfile_present = c.at("lockfile_present").get<bool>();
    for (const auto& r : j.at("rows")) {
      TriggerRow row;
      row.execution.phase = parse_enum<Phase>(r.at("phase"), phase_from_string, "phase");
      row.execution.hook_or_file = r.at("hook_or_file").get<std::string>();
      row.execution.command_text = r.at("command_text").get<std::string>();
      row.execution.source = r.at("source").get<std::string>();
      row.suppressed_by = r.at("suppressed_by").get<std::string>();
      s.rows.push_back(std::move(row));
    }
    s.install_fails = j.at("install_fails").get<bool>();
    s.notes = j.at("notes").get<std::vector<std::string>>();
    s.unused_flags = j.at("unused_flags").get<std::vector<std::string>>();
    return s;
  } catch (const json::exception& e) {
    malformed(e.what());
  }
}

json to_json(const Report& r) {
  json findings = json::array();
  for (const auto& f : r.findings) findings.push_back(to_json(f));
  json edges = json::array();
  for (const auto& e : r.edges) edges.push_back(edge_json(e));
  json rollups = json::array();
  for (const auto& x : r.rollups) rollups.push_back(rollup_json(x));
  json j{{"tool", {{"name", r.tool}, {"version", r.version}}},
         {"timestamp", r.timestamp},
         {"target", coords_json(r.target)},
         {"findings", findings},
         {"edges", edges},
         {"rollups", rollups},
         {"notes", r.notes},
         {"stats",
          {{"files", r.stats.files}, {"bytes", r.stats.bytes}, {"duration_ms", r.stats.duration_ms}}}};
  j["simulation"] = r.simulation ? to_json(*r.simulation) : json(nullptr);
  return j;
}

Report report_from_json(const json& j) {
  try {
    Report r;
    r.tool = j.at("tool").at("name").get<std::string>();
    r.version = j.at("tool").at("version").get<std::string>();
    r.timestamp = j.at("timestamp").get<std::string>();
    r.target = coords_from(j.at("target"));
    for (const auto& f : j.at("findings")) r.findings.push_back(finding_from_json(f));
    for (const auto& e : j.at("edges")) r.edges.push_back(edge_from(e));
    for (const auto& x : j.at("rollups")) r.rollups.push_back(rollup_from(x));
    r.notes = j.at("notes").get<std::vector<std::string>>();
    const json& st = j.at("stats");
    r.stats.files = st.at("files").get<std::size_t>();
    r.stats.bytes = st.at("bytes").get<std::uint64_t>();
    r.stats.duration_ms = st.at("duration_ms").get<std::int64_t>();
    if (j.contains("simulation") && !j.at("simulation").is_null())
      r.simulation = simulation_from_json(j.at("simulation"));
    return r;
  } catch (const json::exception& e) {
    malformed(e.what());
  }
}

namespace {

std::string_view sarif_level(Severity s) {
  switch (s) {
    case Severity::Critical:
    case Severity::High: return "error";
    case Severity::Medium: return "warning";
    case Severity::Low:
    case Severity::Info: return "note";
  }
  return "note";
}

}  // namespace

json to_sarif(const Report& r) {
  json rules = json::array();
  std::map<TechniqueId, std::size_t> rule_index;
  for (const auto& info : technique_catalog()) {
    rule_index[info.id] = rules.size();
    rules.push_back(json{{"id", to_string(info.id)},
                         {"name", std::string(info.title)},
                         {"shortDescription", {{"text", std::string(info.title)}}},
                         {"fullDescription", {{"text", std::string(info.title)}}},
                         {"help", {{"text", std::string(info.remediation)}}},
                         {"defaultConfiguration", {{"level", sarif_level(info.severity)}}},
                         {"properties",
                          {{"category", std::string(info.category)},
                           {"severity", to_string(info.severity)},
                           {"confidence", to_string(info.confidence)}}}});
  }
  json results = json::array();
  for (const auto& f : r.findings) {
    json region{{"startLine", f.location.line_start},
                {"endLine", f.location.line_end},
                {"byteOffset", f.location.byte_start},
                {"byteLength", f.location.byte_end - f.location.byte_start},
                {"snippet", {{"text", f.evidence}}}};
    json props{{"severity", to_string(f.severity)}, {"confidence", to_string(f.confidence)}};
    if (!f.manifest_key.empty()) props["manifest_key"] = f.manifest_key;
    if (!f.package.empty()) props["package"] = f.package;
    if (f.depth) props["depth"] = *f.depth;
    for (const auto& [k, v] : f.properties) props[k] = v;
    results.push_back(json{
        {"ruleId", to_string(f.id)},
        {"ruleIndex", rule_index.at(f.id)},
        {"level", sarif_level(f.severity)},
        {"message", {{"text", f.message}}},
        {"locations",
         json::array({{{"physicalLocation",
                        {{"artifactLocation", {{"uri", f.location.path}}}, {"region", region}}}}})},
        {"properties", props}});
  }
  json rollups = json::array();
  for (const auto& x : r.rollups) rollups.push_back(rollup_json(x));
  json run{{"tool",
            {{"driver",
              {{"name", r.tool},
               {"version", r.version},
               {"semanticVersion", r.version},
               {"rules", rules}}}}},
           {"results", results},
           {"properties", {{"target", coords_json(r.target)}, {"rollups", rollups}, {"notes", r.notes}}}};
  if (!r.timestamp.empty())
    run["invocations"] = json::array({{{"executionSuccessful", true}, {"startTimeUtc", r.timestamp}}});
  return json{{"$schema", "https://json.schemastore.org/sarif-2.1.0.json"},
              {"version", "2.1.0"},
              {"runs", json::array({run})}};
}

namespace {

std::string upper(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return out;
}

std::string one_line(std::string_view s) {
  std::string out;
  for (char c : s) out += (c == '\n' || c == '\r') ? ' ' : c;
  return out;
}

void render_simulation(std::ostream& os, const SimulationReport& s) {
  os << "\nTriggered executions (" << to_string(s.context.command) << ", " << s.package.display() << ")\n";
  if (s.rows.empty()) os << "  none\n";
  for (const auto& r : s.rows) {
    os << "  " << to_string(r.execution.phase) << "  " << r.execution.hook_or_file;
    if (!r.execution.command_text.empty()) os << "  `" << one_line(r.execution.command_text) << "`";
    os << "  [" << r.execution.source << "]  suppressed by: " << r.suppressed_by << "\n";
  }
  if (s.install_fails) os << "  install fails under this context\n";
  for (const auto& n : s.notes) os << "  note: " << n << "\n";
  for (const auto& f : s.unused_flags) os << "  flag without effect: " << f << "\n";
}

}  // namespace

std::string render(const Report& r, ReportFormat format) {
  switch (format) {
    case ReportFormat::Json: return to_json(r).dump(2) + "\n";
    case ReportFormat::Sarif: return to_sarif(r).dump(2) + "\n";
    case ReportFormat::Text: break;
  }
  std::ostringstream os;
  os << r.tool << " " << r.version << "  target: " << to_string(r.target.ecosystem) << " "
     << r.target.display() << "\n";
  os << r.findings.size() << " finding(s), " << r.stats.files << " file(s), " << r.stats.bytes << " byte(s)\n";
  for (Severity sev : {Severity::Critical, Severity::High, Severity::Medium, Severity::Low, Severity::Info}) {
    std::size_t n = 0;
    for (const auto& f : r.findings) n += f.severity == sev ? 1 : 0;
    if (n == 0) continue;
    os << "\n" << upper(to_string(sev)) << " (" << n << ")\n";
    for (const auto& f : r.findings) {
      if (f.severity != sev) continue;
      os << "  " << to_string(f.id) << "  " << to_string(f.confidence) << "  " << f.location.path << ":"
         << f.location.line_start;
      if (!f.package.empty()) os << "  (" << f.package << ", depth " << f.depth.value_or(0) << ")";
      os << "\n    " << one_line(f.message) << "\n";
      if (!f.evidence.empty()) os << "    evidence: " << one_line(f.evidence) << "\n";
    }
  }
  if (!r.edges.empty()) {
    os << "\nDependency edges\n";
    for (const auto& e : r.edges)
      os << "  " << e.from.display() << " -> " << e.to.display() << "  (" << to_string(e.kind) << ")\n";
  }
  if (!r.rollups.empty()) {
    os << "\nDependency tree findings\n";
    for (const auto& x : r.rollups)
      os << "  " << to_string(x.id) << "  " << to_string(x.confidence) << "  " << x.message << "\n";
  }
  if (r.simulation) render_simulation(os, *r.simulation);
  if (!r.notes.empty()) {
    os << "\nNotes\n";
    for (const auto& n : r.notes) os << "  " << n << "\n";
  }
  return os.str();
}

int exit_code(const Report& r, Severity fail_on) {
  for (const auto& f : r.findings)
    if (f.severity >= fail_on) return 1;
  return 0;
}

json catalog_json() {
  json out = json::array();
  for (const auto& info : technique_catalog()) {
    json applicable = json::array();
    if (is_ace_technique(info.id))
      for (Ecosystem e : kAllEcosystems)
        if (applicability(e, info.id)) applicable.push_back(to_string(e));
    out.push_back(json{{"id", to_string(info.id)},
                       {"title", std::string(info.title)},
                       {"category", std::string(info.category)},
                       {"severity", to_string(info.severity)},
                       {"confidence", to_string(info.confidence)},
                       {"remediation", std::string(info.remediation)},
                       {"ecosystems", applicable}});
  }
  return out;
}

}  // namespace depsentry
