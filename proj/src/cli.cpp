#include "bigthick/cli.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "bigthick/catalog.hpp"
#include "bigthick/error.hpp"

namespace bigthick {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

json bbox_json(const BoundingBox& b) {
  return {{"min_lat", b.min_lat}, {"max_lat", b.max_lat}, {"min_lon", b.min_lon}, {"max_lon", b.max_lon}};
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError(fmt::format("cannot open '{}'", path));
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw ValidationError(fmt::format("'{}' is not valid JSON: {}", path, e.what()));
  }
}

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError(fmt::format("cannot open '{}'", path));
  return in;
}

std::ofstream open_out(const fs::path& path) {
  std::error_code ec;
  if (path.has_parent_path()) fs::create_directories(path.parent_path(), ec);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError(fmt::format("cannot write '{}'", path.string()));
  return out;
}

void finish(std::ofstream& out, const fs::path& path) {
  out.flush();
  if (!out) throw IoError(fmt::format("failed writing '{}'", path.string()));
}

template <class Fn>
void write_file(const fs::path& path, Fn&& fn) {
  auto out = open_out(path);
  fn(out);
  finish(out, path);
}

std::shared_ptr<const Teleontology> schema_or(const std::string& path, Teleontology fallback) {
  if (path.empty()) return std::make_shared<const Teleontology>(std::move(fallback));
  return std::make_shared<const Teleontology>(teleontology_from_json(read_json_file(path)));
}

}  // namespace

void RunConfig::validate() const {
  if (!bbox.valid()) throw ValidationError("config bbox is not a valid bounding box");
  if (!period.well_formed() || period.length() <= 0) {
    throw ValidationError(fmt::format("config period '{}' is empty", format_interval(period)));
  }
  if (personal_period && (!personal_period->well_formed() || personal_period->length() <= 0)) {
    throw ValidationError(fmt::format("config personal_period '{}' is empty", format_interval(*personal_period)));
  }
  if (!(place_near_m > 0.0)) throw ValidationError("place_near_m must be positive");
  if (position.window_s <= 0) throw ValidationError("position.window_minutes must be positive");
  if (!(position.eps_m > 0.0)) throw ValidationError("position.eps_m must be positive");
  if (position.min_pts == 0) throw ValidationError("position.min_pts must be positive");
  if (schedule.spacing_s.empty()) throw ValidationError("spacing_minutes is empty");
  for (auto s : schedule.spacing_s)
    if (s <= 0) throw ValidationError("spacing_minutes entries must be positive");
  if (workers == 0) throw ValidationError("workers must be positive");
  unification.validate();
}

RunConfig RunConfig::from_json(const json& j) {
  RunConfig c;
  try {
    c.places = j.value("places", c.places);
    c.batteries = j.value("batteries", c.batteries);
    c.gps = j.value("gps", c.gps);
    c.out_dir = j.value("out_dir", c.out_dir);
    c.label = j.value("label", c.label);
    if (j.contains("bbox")) {
      const auto& b = j["bbox"];
      c.bbox = {b.at("min_lat").get<double>(), b.at("max_lat").get<double>(), b.at("min_lon").get<double>(),
                b.at("max_lon").get<double>()};
    }
    if (j.contains("period")) c.period = parse_interval(j["period"].get<std::string>());
    if (j.contains("personal_period") && !j["personal_period"].is_null()) {
      c.personal_period = parse_interval(j["personal_period"].get<std::string>());
    }
    c.reference_ktlo = j.value("reference_ktlo", c.reference_ktlo);
    c.reference_etg = j.value("reference_etg", c.reference_etg);
    c.personal_etg = j.value("personal_etg", c.personal_etg);
    c.mapping = j.value("mapping", c.mapping);
    c.vocabulary = j.value("vocabulary", c.vocabulary);
    c.place_near_m = j.value("place_near_m", c.place_near_m);
    if (j.contains("position")) {
      const auto& p = j["position"];
      c.position.window_s = p.value("window_minutes", c.position.window_s / kMinute) * kMinute;
      c.position.eps_m = p.value("eps_m", c.position.eps_m);
      c.position.min_pts = p.value("min_pts", c.position.min_pts);
    }
    if (j.contains("spacing_minutes")) {
      c.schedule.spacing_s.clear();
      for (const auto& m : j["spacing_minutes"]) c.schedule.spacing_s.push_back(m.get<std::int64_t>() * kMinute);
    }
    c.workers = j.value("workers", c.workers);
    if (j.contains("unification")) {
      json u = j["unification"];
      if (!u.contains("workers")) u["workers"] = c.workers;
      c.unification = UnificationParams::from_json(u);
    } else {
      c.unification.workers = c.workers;
    }
    if (j.contains("synth")) c.synth = SynthSpec::from_json(j["synth"]);
  } catch (const json::exception& e) {
    throw ValidationError(fmt::format("malformed config: {}", e.what()));
  }
  c.validate();
  return c;
}

json RunConfig::to_json() const {
  json spacing = json::array();
  for (auto s : schedule.spacing_s) spacing.push_back(s / kMinute);
  return {{"places", places},
          {"batteries", batteries},
          {"gps", gps},
          {"out_dir", out_dir},
          {"label", label},
          {"bbox", bbox_json(bbox)},
          {"period", format_interval(period)},
          {"personal_period", personal_period ? json(format_interval(*personal_period)) : json(nullptr)},
          {"reference_ktlo", reference_ktlo},
          {"reference_etg", reference_etg},
          {"personal_etg", personal_etg},
          {"mapping", mapping},
          {"vocabulary", vocabulary},
          {"place_near_m", place_near_m},
          {"position",
           {{"window_minutes", position.window_s / kMinute}, {"eps_m", position.eps_m}, {"min_pts", position.min_pts}}},
          {"spacing_minutes", spacing},
          {"unification", unification.to_json()},
          {"workers", workers},
          {"synth", synth.to_json()}};
}

void apply_override(json& config, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw ValidationError(fmt::format("override '{}' is not key=value", assignment));
  }
  const std::string key = assignment.substr(0, eq);
  const std::string text = assignment.substr(eq + 1);
  json value = json::parse(text, nullptr, false);
  if (value.is_discarded()) value = text;
  json* node = &config;
  std::stringstream parts(key);
  std::string part;
  std::vector<std::string> path;
  while (std::getline(parts, part, '.')) path.push_back(part);
  for (std::size_t i = 0; i + 1 < path.size(); ++i) {
    if (!node->is_object()) throw ValidationError(fmt::format("override '{}' walks into a non-object", key));
    node = &(*node)[path[i]];
    if (node->is_null()) *node = json::object();
  }
  if (!node->is_object()) throw ValidationError(fmt::format("override '{}' walks into a non-object", key));
  (*node)[path.back()] = std::move(value);
}

Pipeline load_reference(const RunConfig& cfg) {
  if (cfg.places.empty()) throw ValidationError("config has no places input");
  Pipeline p;
  if (cfg.reference_etg.empty()) {
    p.reference_ktlo = schema_or(cfg.reference_ktlo, reference_ktlo());
    p.reference_etg = std::make_shared<const Teleontology>(
        cfg.reference_ktlo.empty() ? reference_etg() : flatten(*p.reference_ktlo));
  } else {
    p.reference_etg = schema_or(cfg.reference_etg, {});
    if (!cfg.reference_ktlo.empty()) p.reference_ktlo = schema_or(cfg.reference_ktlo, {});
  }
  p.personal_etg = schema_or(cfg.personal_etg, personal_etg());
  auto ingest = ingest_reference(read_places_file(cfg.places), cfg.bbox, cfg.period, p.reference_etg, cfg.label);
  ingest.graph = compute_near(compute_partin(std::move(ingest.graph)), cfg.place_near_m,
                              cfg.unification.cell_size_m);
  p.reference = std::move(ingest);
  return p;
}

void load_personal(const RunConfig& cfg, Pipeline& p) {
  p.streams.clear();
  if (cfg.batteries.empty()) return;
  const DiaryVocabulary vocab =
      cfg.vocabulary.empty() ? DiaryVocabulary::standard() : DiaryVocabulary::from_json(read_json_file(cfg.vocabulary));
  auto bin = open_in(cfg.batteries);
  const auto batteries = read_batteries_csv(bin);
  std::vector<GpsSample> gps;
  if (!cfg.gps.empty()) {
    auto gin = open_in(cfg.gps);
    gps = read_gps_csv(gin);
  }
  p.streams = build_streams(batteries, gps, cfg.personal_period.value_or(cfg.period), cfg.schedule, cfg.position, vocab, cfg.workers);
}

ObservationContext run_unification(const RunConfig& cfg, const Pipeline& p) {
  const MappingConfig mapping = cfg.mapping.empty() ? default_mapping() : MappingConfig::from_json(read_json_file(cfg.mapping));
  const Alignment alignment = epu_align(*p.personal_etg, *p.reference_etg, mapping, p.reference_ktlo);
  auto ref = std::make_shared<const EntityGraph>(p.reference.graph);
  return unify(std::move(ref), p.streams, cfg.unification, alignment);
}

namespace {

ObservationContext observe(const RunConfig& cfg) {
  Pipeline p = load_reference(cfg);
  load_personal(cfg, p);
  return run_unification(cfg, p);
}

void cmd_ingest_reference(const RunConfig& cfg, std::ostream& out) {
  const Pipeline p = load_reference(cfg);
  const fs::path dir = fs::path(cfg.out_dir) / "reference";
  write_file(dir / "entities.jsonl", [&](std::ostream& o) { write_entities_jsonl(o, p.reference.graph); });
  write_file(dir / "triples.jsonl", [&](std::ostream& o) { write_triples_jsonl(o, p.reference.graph.triples()); });
  write_file(dir / "etg.json", [&](std::ostream& o) { o << to_json(*p.reference_etg).dump(2) << '\n'; });
  out << json{{"entities", p.reference.graph.entities().size()},
              {"triples", p.reference.graph.triples().size()},
              {"dropped_outside", p.reference.dropped_outside},
              {"defaulted_class", p.reference.defaulted_class}}
             .dump(2)
      << '\n';
}

void cmd_ingest_personal(const RunConfig& cfg, std::ostream& out) {
  Pipeline p;
  load_personal(cfg, p);
  const fs::path dir = fs::path(cfg.out_dir) / "personal";
  write_file(dir / "streams.jsonl", [&](std::ostream& o) { write_streams_jsonl(o, p.streams); });
  std::size_t contexts = 0, positioned = 0;
  for (const auto& s : p.streams) {
    contexts += s.contexts.size();
    for (const auto& c : s.contexts) positioned += c.position ? 1 : 0;
  }
  out << json{{"streams", p.streams.size()}, {"timed_contexts", contexts}, {"positioned_contexts", positioned}}.dump(2)
      << '\n';
}

void cmd_unify(const RunConfig& cfg, std::ostream& out) {
  const ObservationContext obs = observe(cfg);
  const fs::path dir = fs::path(cfg.out_dir) / "observation";
  write_file(dir / "derived.jsonl", [&](std::ostream& o) { write_triples_jsonl(o, obs.derived); });
  write_file(dir / "resolutions.jsonl", [&](std::ostream& o) { write_resolutions_jsonl(o, obs.resolutions); });
  write_file(dir / "unified.jsonl", [&](std::ostream& o) { write_unified_export(o, obs); });
  const std::string report = dataset_stats(obs).to_json().dump(2);
  write_file(dir / "stats.json", [&](std::ostream& o) { o << report << '\n'; });
  out << report << '\n';
}

void cmd_stats(const RunConfig& cfg, std::ostream& out) { out << dataset_stats(observe(cfg)).to_json().dump(2) << '\n'; }

void cmd_enquire(const RunConfig& cfg, const std::string& file, const std::string& dest, std::ostream& out) {
  const Enquiry e = read_enquiry_file(file);
  const ObservationContext obs = observe(cfg);
  const ObservationStore store(obs);
  const EnquiryResult r = store.evaluate(e);
  out << "class: " << to_string(store.classify(e)) << '\n';
  if (dest.empty()) {
    write_result_csv(out, r);
  } else {
    write_file(dest, [&](std::ostream& o) { write_result_csv(o, r); });
    out << "rows: " << r.rows.size() << '\n';
  }
}

void cmd_feasibility(const RunConfig& cfg, const std::string& id, std::ostream& out) {
  const PredictionSpec& spec = prediction_spec(id);
  const ObservationContext obs = observe(cfg);
  for (Source s : {Source::Reference, Source::Personal, Source::Unified}) {
    const bool ok = purpose_feasibility(available_schema(obs, s), spec.target, spec.features);
    out << to_string(s) << ": " << (ok ? "true" : "false") << '\n';
  }
}

void cmd_export_features(const RunConfig& cfg, const std::string& id, const std::string& source,
                         const std::string& dest, std::ostream& out) {
  const ObservationContext obs = observe(cfg);
  const FeatureTable t = export_features(obs, prediction_spec(id), parse_source(source));
  const fs::path path = dest.empty() ? fs::path(cfg.out_dir) / fmt::format("features_{}_{}.csv", id, source) : fs::path(dest);
  write_file(path, [&](std::ostream& o) { write_feature_csv(o, t); });
  out << fmt::format("{} rows -> {}\n", t.rows.size(), path.string());
}

void cmd_synth(const RunConfig& cfg, std::ostream& out) {
  const SynthData d = generate(cfg.synth);
  const fs::path dir = cfg.out_dir;
  write_file(dir / "places.csv", [&](std::ostream& o) { write_places_csv(o, d.places); });
  write_file(dir / "batteries.csv", [&](std::ostream& o) { write_batteries_csv(o, d.batteries); });
  write_file(dir / "gps.csv", [&](std::ostream& o) { write_gps_csv(o, d.gps); });
  json truth = d.truth.to_json();
  truth["period"] = format_interval(d.period);
  write_file(dir / "truth.json", [&](std::ostream& o) { o << truth.dump(2) << '\n'; });

  RunConfig run = cfg;
  run.places = (dir / "places.csv").string();
  run.batteries = (dir / "batteries.csv").string();
  run.gps = (dir / "gps.csv").string();
  run.out_dir = (dir / "run").string();
  run.bbox = cfg.synth.bbox;
  run.period = d.period;
  run.schedule = cfg.synth.schedule;
  write_file(dir / "config.json", [&](std::ostream& o) { o << run.to_json().dump(2) << '\n'; });
  out << fmt::format("{} places, {} batteries, {} GPS samples, {} planted visits, {} co-locations -> {}\n",
                     d.places.size(), d.batteries.size(), d.gps.size(), d.truth.resolutions.size(),
                     d.truth.colocations.size(), dir.string());
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Unifies geospatial reference data with personal diary streams"};
  app.require_subcommand(1);
  app.fallthrough();
  std::string config_path;
  std::vector<std::string> overrides;
  std::string out_dir;
  unsigned workers = 0;
  std::string log_level = "warn";
  app.add_option("-c,--config", config_path, "JSON run configuration");
  app.add_option("-s,--set", overrides, "Override a config key, e.g. unification.near_threshold_m=40");
  app.add_option("-o,--out-dir", out_dir, "Output directory");
  app.add_option("-j,--workers", workers, "Worker threads");
  app.add_option("--log-level", log_level, "trace, debug, info, warn, error or off");

  std::string enquiry, dest, source = "unified";
  auto* show = app.add_subcommand("show-config", "Print the effective configuration");
  auto* ingest_ref = app.add_subcommand("ingest-reference", "Build the reference entity graph");
  auto* ingest_per = app.add_subcommand("ingest-personal", "Build the personal context streams");
  auto* uni = app.add_subcommand("unify", "Unify the sources and write the observation context");
  auto* stats = app.add_subcommand("stats", "Print dataset statistics");
  auto* enq = app.add_subcommand("enquire", "Evaluate and classify an enquiry pattern file");
  enq->add_option("enquiry", enquiry, "Enquiry pattern file")->required();
  enq->add_option("--out", dest, "Bindings CSV (default: stdout)");
  auto* feas = app.add_subcommand("feasibility", "Purpose feasibility of E1, E2 or E3 per source");
  feas->add_option("enquiry", enquiry, "E1, E2 or E3")->required();
  auto* exp = app.add_subcommand("export-features", "Write the feature table of a prediction enquiry");
  exp->add_option("enquiry", enquiry, "E1, E2 or E3")->required();
  exp->add_option("--source", source, "reference, personal or unified");
  exp->add_option("--out", dest, "Feature CSV path");
  auto* syn = app.add_subcommand("synth", "Generate a synthetic dataset with ground truth");

  std::vector<std::string> rev(args.rbegin(), args.rend());
  try {
    app.parse(rev);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << e.what() << '\n';
    return 1;
  }

  try {
    if (!spdlog::get("bigthick")) spdlog::set_default_logger(spdlog::stderr_color_mt("bigthick"));
    spdlog::set_level(spdlog::level::from_str(log_level));
    json cj = config_path.empty() ? json::object() : read_json_file(config_path);
    for (const auto& o : overrides) apply_override(cj, o);
    if (!out_dir.empty()) cj["out_dir"] = out_dir;
    if (workers > 0) cj["workers"] = workers;
    const RunConfig cfg = RunConfig::from_json(cj);

    if (*show) out << cfg.to_json().dump(2) << '\n';
    else if (*ingest_ref) cmd_ingest_reference(cfg, out);
    else if (*ingest_per) cmd_ingest_personal(cfg, out);
    else if (*uni) cmd_unify(cfg, out);
    else if (*stats) cmd_stats(cfg, out);
    else if (*enq) cmd_enquire(cfg, enquiry, dest, out);
    else if (*feas) cmd_feasibility(cfg, enquiry, out);
    else if (*exp) cmd_export_features(cfg, enquiry, source, dest, out);
    else if (*syn) cmd_synth(cfg, out);
    return 0;
  } catch (const IoError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace bigthick
