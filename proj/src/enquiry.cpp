#include "bigthick/enquiry.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "bigthick/csv.hpp"
#include "bigthick/error.hpp"
#include "bigthick/reference.hpp"

namespace bigthick {

using nlohmann::json;

namespace {

void note_variable(std::vector<std::string>& vars, const std::string& text) {
  if (Term{text}.is_variable() && std::find(vars.begin(), vars.end(), text) == vars.end()) vars.push_back(text);
}

std::string key_of(std::string_view a, std::string_view b) {
  std::string k(a);
  k.push_back('\x1f');
  k.append(b);
  return k;
}

}  // namespace

std::vector<std::string> Enquiry::variables() const {
  std::vector<std::string> vars;
  for (const auto& p : patterns) {
    note_variable(vars, p.subject.text);
    note_variable(vars, p.predicate.text);
    note_variable(vars, p.object.text);
    if (p.time_var) note_variable(vars, *p.time_var);
  }
  return vars;
}

void Enquiry::validate() const {
  if (patterns.empty()) throw ValidationError(fmt::format("enquiry '{}' has no pattern", id));
  for (const auto& p : patterns) {
    for (const Term* t : {&p.subject, &p.predicate, &p.object}) {
      if (t->text.empty() || t->text == "?") throw ValidationError(fmt::format("enquiry '{}' has an empty term", id));
    }
    if (p.time_var && !Term{*p.time_var}.is_variable()) {
      throw ValidationError(fmt::format("time binding '{}' is not a variable", *p.time_var));
    }
  }
  const auto vars = variables();
  auto known = [&](const std::string& v) { return std::find(vars.begin(), vars.end(), v) != vars.end(); };
  for (const auto& v : select) {
    if (!known(v)) throw ValidationError(fmt::format("selected variable '{}' appears in no pattern", v));
  }
  if (count && !known(*count)) throw ValidationError(fmt::format("counted variable '{}' appears in no pattern", *count));
  for (const auto& i : during) {
    if (!i.well_formed()) throw ValidationError(fmt::format("temporal filter '{}' ends before it starts", format_interval(i)));
  }
  for (int d : days_of_week) {
    if (d < 0 || d > 6) throw ValidationError(fmt::format("day of week {} outside [0, 6]", d));
  }
}

Enquiry Enquiry::from_json(const json& j) {
  Enquiry e;
  try {
    e.id = j.value("id", "");
    for (const auto& p : j.at("patterns")) {
      if (!p.is_array() || p.size() < 3 || p.size() > 4) {
        throw ValidationError(fmt::format("pattern {} must be [s, p, o] or [s, p, o, ?t]", p.dump()));
      }
      Pattern pat{{p[0].get<std::string>()}, {p[1].get<std::string>()}, {p[2].get<std::string>()}, std::nullopt};
      if (p.size() == 4) pat.time_var = p[3].get<std::string>();
      e.patterns.push_back(std::move(pat));
    }
    e.select = j.value("select", std::vector<std::string>{});
    if (j.contains("count") && !j["count"].is_null()) e.count = j["count"].get<std::string>();
    for (const auto& i : j.value("during", std::vector<std::string>{})) e.during.push_back(parse_interval(i));
    for (int d : j.value("days_of_week", std::vector<int>{})) e.days_of_week.insert(d);
    for (int u : j.value("users", std::vector<int>{})) e.users.insert(u);
  } catch (const json::exception& ex) {
    throw ValidationError(fmt::format("malformed enquiry: {}", ex.what()));
  }
  e.validate();
  return e;
}

json Enquiry::to_json() const {
  json pats = json::array();
  for (const auto& p : patterns) {
    json row = {p.subject.text, p.predicate.text, p.object.text};
    if (p.time_var) row.push_back(*p.time_var);
    pats.push_back(std::move(row));
  }
  json during_text = json::array();
  for (const auto& i : during) during_text.push_back(format_interval(i));
  json out = {{"id", id}, {"patterns", pats}, {"select", select}, {"during", during_text},
              {"days_of_week", days_of_week}, {"users", users}};
  out["count"] = count ? json(*count) : json(nullptr);
  return out;
}

Enquiry read_enquiry_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError(fmt::format("cannot open enquiry file '{}'", path));
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& ex) {
    throw ValidationError(fmt::format("enquiry file '{}' is not JSON: {}", path, ex.what()));
  }
  return Enquiry::from_json(j);
}

std::string_view to_string(EnquiryClass c) {
  switch (c) {
    case EnquiryClass::R: return "R";
    case EnquiryClass::P: return "P";
    case EnquiryClass::PR: return "PR";
    case EnquiryClass::RP: return "RP";
  }
  return "?";
}

std::optional<int> owner_of(std::string_view id) {
  if (auto at = id.rfind('@'); at != std::string_view::npos) id = id.substr(at + 1);
  return parse_user_entity_id(id);
}

namespace {

std::vector<int> owners_of(std::string_view s, std::string_view o) {
  std::vector<int> out;
  if (auto u = owner_of(s)) out.push_back(*u);
  if (auto u = owner_of(o); u && (out.empty() || out.front() != *u)) out.push_back(*u);
  return out;
}

Fact fact_of(const Triple& t) {
  return Fact{t.subject, t.predicate, t.object, t.validity, t.provenance, owners_of(t.subject, t.object)};
}

}  // namespace

ObservationStore::ObservationStore(const ObservationContext& obs) {
  if (obs.reference) {
    for (const auto& e : obs.reference->entities()) {
      facts_.push_back({e.id, "etype", e.etype, std::nullopt, Provenance::Reference, {}});
      if (e.name) facts_.push_back({e.id, "name", *e.name, std::nullopt, Provenance::Reference, {}});
      facts_.push_back({e.id, "class", e.cls, std::nullopt, Provenance::Reference, {}});
      for (const auto& [k, v] : e.properties) facts_.push_back({e.id, k, v, std::nullopt, Provenance::Reference, {}});
    }
    for (const auto& t : obs.reference->triples()) facts_.push_back(fact_of(t));
  }
  for (const auto& s : obs.streams) {
    for (const auto& c : s.contexts) {
      for (const auto& a : c.anonymous) {
        facts_.push_back({a.id, "etype", a.etype, c.interval, Provenance::Personal, {s.userid}});
        if (a.name) facts_.push_back({a.id, "name", *a.name, c.interval, Provenance::Personal, {s.userid}});
      }
      for (const auto& t : c.triples) {
        Fact f = fact_of(t);
        if (f.owners.empty()) f.owners.push_back(s.userid);
        facts_.push_back(std::move(f));
      }
    }
  }
  for (const auto& t : obs.derived) facts_.push_back(fact_of(t));

  // Near is symmetric: store the mirrored orientation as well.
  const std::size_t n = facts_.size();
  for (std::size_t i = 0; i < n; ++i) {
    if (facts_[i].predicate == "Near" && facts_[i].subject != facts_[i].object) {
      Fact m = facts_[i];
      std::swap(m.subject, m.object);
      facts_.push_back(std::move(m));
    }
  }
  for (std::size_t i = 0; i < facts_.size(); ++i) {
    const Fact& f = facts_[i];
    by_predicate_[f.predicate].push_back(i);
    by_subject_[key_of(f.predicate, f.subject)].push_back(i);
    by_object_[key_of(f.predicate, f.object)].push_back(i);
  }
}

bool ObservationStore::admits(const Enquiry& e, const Fact& f) {
  if (!e.users.empty() && !f.owners.empty() &&
      std::none_of(f.owners.begin(), f.owners.end(), [&](int u) { return e.users.contains(u); })) {
    return false;
  }
  if (!f.validity) return true;
  const Interval& v = *f.validity;
  if (!e.during.empty() &&
      std::none_of(e.during.begin(), e.during.end(), [&](const Interval& i) { return i.overlaps(v); })) {
    return false;
  }
  if (!e.days_of_week.empty()) {
    auto day_of = [](Timestamp t) { return t.seconds / kDay - (t.seconds % kDay < 0 ? 1 : 0); };
    bool hit = false;
    for (std::int64_t d = day_of(v.start); d <= day_of(v.end) && !hit; ++d) {
      hit = e.days_of_week.contains(weekday(Timestamp{d * kDay}));
    }
    if (!hit) return false;
  }
  return true;
}

std::vector<ObservationStore::Solution> ObservationStore::solve(const Enquiry& e,
                                                               const std::vector<std::string>& vars,
                                                               std::vector<std::string>* warnings) const {
  e.validate();
  for (const auto& p : e.patterns) {
    if (!p.predicate.is_variable() && !knows_predicate(p.predicate.text)) {
      const std::string w = fmt::format("unknown predicate '{}'", p.predicate.text);
      spdlog::warn("enquiry '{}': {}", e.id, w);
      if (warnings) warnings->push_back(w);
      return {};
    }
  }
  std::vector<std::size_t> all(facts_.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;

  auto slot = [&](const std::string& v) {
    return static_cast<std::size_t>(std::find(vars.begin(), vars.end(), v) - vars.begin());
  };
  std::vector<std::string> values(vars.size());
  std::vector<bool> bound(vars.size(), false);
  std::vector<std::size_t> matched(e.patterns.size());
  std::vector<bool> done(e.patterns.size(), false);
  std::vector<Solution> out;

  auto resolved = [&](const Term& t) -> const std::string* {
    if (!t.is_variable()) return &t.text;
    const std::size_t s = slot(t.text);
    return bound[s] ? &values[s] : nullptr;
  };

  static const std::vector<std::size_t> none;
  auto lookup = [](const auto& index, const std::string& key) -> const std::vector<std::size_t>& {
    auto it = index.find(key);
    return it == index.end() ? none : it->second;
  };
  auto pool_for = [&](const Pattern& p) -> const std::vector<std::size_t>& {
    const std::string* pred = resolved(p.predicate);
    if (pred == nullptr) return all;
    if (const std::string* s = resolved(p.subject)) return lookup(by_subject_, key_of(*pred, *s));
    if (const std::string* o = resolved(p.object)) return lookup(by_object_, key_of(*pred, *o));
    return lookup(by_predicate_, *pred);
  };

  auto recurse = [&](auto&& self, std::size_t depth) -> void {
    if (depth == e.patterns.size()) {
      out.push_back({values, matched});
      return;
    }
    // Most selective remaining pattern next.
    std::size_t pick = e.patterns.size();
    std::size_t best = 0;
    for (std::size_t i = 0; i < e.patterns.size(); ++i) {
      if (done[i]) continue;
      const std::size_t n = pool_for(e.patterns[i]).size();
      if (pick == e.patterns.size() || n < best) {
        pick = i;
        best = n;
      }
    }
    const Pattern& p = e.patterns[pick];
    const auto& pool = pool_for(p);
    done[pick] = true;
    for (std::size_t fi : pool) {
      const Fact& f = facts_[fi];
      if (p.time_var && !f.validity) continue;
      if (!admits(e, f)) continue;
      const std::string time_text = f.validity ? format_interval(*f.validity) : std::string{};
      std::vector<std::size_t> newly;
      bool ok = true;
      auto unify_term = [&](const std::string& term, const std::string& value) {
        if (!ok) return;
        if (!Term{term}.is_variable()) {
          ok = term == value;
          return;
        }
        const std::size_t s = slot(term);
        if (bound[s]) {
          ok = values[s] == value;
        } else {
          bound[s] = true;
          values[s] = value;
          newly.push_back(s);
        }
      };
      unify_term(p.subject.text, f.subject);
      unify_term(p.predicate.text, f.predicate);
      unify_term(p.object.text, f.object);
      if (p.time_var) unify_term(*p.time_var, time_text);
      if (ok) {
        matched[pick] = fi;
        self(self, depth + 1);
      }
      for (std::size_t s : newly) bound[s] = false;
    }
    done[pick] = false;
  };
  recurse(recurse, 0);
  return out;
}

EnquiryResult ObservationStore::evaluate(const Enquiry& e) const {
  const auto vars = e.variables();
  EnquiryResult r;
  const auto sols = solve(e, vars, &r.warnings);

  std::vector<std::size_t> proj;
  const auto& keep = e.select.empty() ? vars : e.select;
  for (const auto& v : keep) {
    if (e.select.empty() && e.count && v == *e.count) continue;
    proj.push_back(static_cast<std::size_t>(std::find(vars.begin(), vars.end(), v) - vars.begin()));
    r.columns.push_back(v);
  }
  if (!e.count) {
    for (const auto& s : sols) {
      std::vector<std::string> row;
      for (std::size_t k : proj) row.push_back(s.values[k]);
      r.rows.push_back(std::move(row));
    }
  } else {
    const std::size_t c = static_cast<std::size_t>(std::find(vars.begin(), vars.end(), *e.count) - vars.begin());
    std::map<std::vector<std::string>, std::set<std::string>> groups;
    for (const auto& s : sols) {
      std::vector<std::string> key;
      for (std::size_t k : proj) key.push_back(s.values[k]);
      groups[key].insert(s.values[c]);
    }
    if (groups.empty() && proj.empty()) groups[{}];
    r.columns.push_back("count(" + *e.count + ")");
    for (auto& [key, members] : groups) {
      auto row = key;
      row.push_back(std::to_string(members.size()));
      r.rows.push_back(std::move(row));
    }
  }
  std::sort(r.rows.begin(), r.rows.end());
  r.rows.erase(std::unique(r.rows.begin(), r.rows.end()), r.rows.end());
  return r;
}

EnquiryClass ObservationStore::classify(const Enquiry& e) const {
  const auto vars = e.variables();
  const auto sols = solve(e, vars, nullptr);

  std::set<Provenance> provs;
  std::set<int> users;
  std::set<std::string> personal_vars;
  auto account = [&](const Pattern& p, const Fact& f) {
    provs.insert(f.provenance);
    if (f.provenance == Provenance::Personal) {
      users.insert(f.owners.begin(), f.owners.end());
      for (const std::string* t : {&p.subject.text, &p.predicate.text, &p.object.text}) {
        if (Term{*t}.is_variable()) personal_vars.insert(*t);
      }
      if (p.time_var) personal_vars.insert(*p.time_var);
    }
  };
  if (!sols.empty()) {
    for (const auto& s : sols)
      for (std::size_t i = 0; i < e.patterns.size(); ++i) account(e.patterns[i], facts_[s.matched[i]]);
  } else {
    // No answer: fall back to what each pattern could match on its own.
    for (const auto& p : e.patterns) {
      for (const auto& f : facts_) {
        if (!admits(e, f)) continue;
        if (!p.subject.is_variable() && p.subject.text != f.subject) continue;
        if (!p.predicate.is_variable() && p.predicate.text != f.predicate) continue;
        if (!p.object.is_variable() && p.object.text != f.object) continue;
        if (p.time_var && !f.validity) continue;
        account(p, f);
      }
    }
  }

  const bool reference = provs.contains(Provenance::Reference);
  const bool personal = provs.contains(Provenance::Personal);
  const bool derived = provs.contains(Provenance::Derived);
  if (!personal && !derived) return EnquiryClass::R;
  if (personal && !reference && !derived) return users.size() <= 1 ? EnquiryClass::P : EnquiryClass::RP;

  std::vector<std::string> projected = e.select.empty() ? vars : e.select;
  if (e.count) projected.push_back(*e.count);
  const bool answer_is_personal = std::any_of(projected.begin(), projected.end(),
                                              [&](const std::string& v) { return personal_vars.contains(v); });
  return answer_is_personal ? EnquiryClass::RP : EnquiryClass::PR;
}

EnquiryResult evaluate(const Enquiry& e, const ObservationContext& obs) { return ObservationStore(obs).evaluate(e); }

EnquiryClass classify_enquiry(const Enquiry& e, const ObservationContext& obs) {
  return ObservationStore(obs).classify(e);
}

void write_result_csv(std::ostream& out, const EnquiryResult& r) {
  csv::write_row(out, r.columns);
  for (const auto& row : r.rows) csv::write_row(out, row);
}

std::string_view to_string(Source s) {
  switch (s) {
    case Source::Reference: return "reference";
    case Source::Personal: return "personal";
    case Source::Unified: return "unified";
  }
  return "?";
}

Source parse_source(std::string_view s) {
  if (s == "reference") return Source::Reference;
  if (s == "personal") return Source::Personal;
  if (s == "unified") return Source::Unified;
  throw ValidationError(fmt::format("unknown source '{}'", s));
}

namespace {

PropertySchema reference_schema(const ObservationContext& obs) {
  PropertySchema s;
  if (!obs.reference || obs.reference->entities().empty()) return s;
  s.insert({"id", "name", "class", "coordinates", "geometry"});
  for (const auto& e : obs.reference->entities())
    for (const auto& [k, _] : e.properties) s.insert(k);
  return s;
}

PropertySchema personal_schema(const ObservationContext& obs) {
  PropertySchema s;
  for (const auto& st : obs.streams) {
    for (const auto& c : st.contexts) {
      s.insert({"userid", "timestamp", "day_of_week", "time_of_day"});
      if (c.position) s.insert("coordinates");
      if (c.answers.where) s.insert("where");
      if (c.answers.what) s.insert("what");
      if (c.answers.with_whom) s.insert("withWhom");
      if (c.answers.mood) s.insert("mood");
    }
  }
  return s;
}

}  // namespace

PropertySchema available_schema(const ObservationContext& obs, Source s) {
  switch (s) {
    case Source::Reference: return reference_schema(obs);
    case Source::Personal: return personal_schema(obs);
    case Source::Unified: {
      if (obs.resolutions.empty()) return {};
      PropertySchema u = reference_schema(obs);
      u.merge(personal_schema(obs));
      return u;
    }
  }
  return {};
}

bool purpose_feasibility(const PropertySchema& schema, std::string_view target, const std::set<std::string>& features) {
  return schema.contains(target) &&
         std::all_of(features.begin(), features.end(), [&](const std::string& f) { return schema.contains(f); });
}

const PredictionSpec& prediction_spec(std::string_view id) {
  static const std::vector<PredictionSpec> specs{
      {"E1", "type", {"day_of_week", "time_of_day", "name", "class"}, {"name", "class"},
       {"apartments", "house", "residential"}},
      {"E2", "where", {"what", "withWhom", "mood", "name", "class"}, {"what", "withWhom", "mood"},
       {"Home", "Relatives Home", "House (friends, others)"}},
      {"E3", "class", {"what", "where", "withWhom", "mood"}, {"what", "where", "withWhom", "mood"}, {"bank"}},
  };
  for (const auto& s : specs)
    if (s.id == id) return s;
  throw ValidationError(fmt::format("unknown prediction enquiry '{}'", id));
}

std::vector<std::string> prediction_ids() { return {"E1", "E2", "E3"}; }

namespace {

std::string answer_value(const TimedPersonalContext& c, std::string_view column) {
  const QuestionBattery& b = c.answers;
  if (column == "what") return b.what.value_or("");
  if (column == "where") return b.where.value_or("");
  if (column == "withWhom") return b.with_whom.value_or("");
  if (column == "mood") return b.mood ? std::to_string(*b.mood) : "";
  if (column == "day_of_week") return std::string(weekday_name(c.center));
  if (column == "time_of_day") return std::string(time_of_day(c.center));
  return {};
}

std::string entity_value(const Entity& e, std::string_view column) {
  if (column == "name") return e.name.value_or("");
  if (column == "class") return e.cls;
  if (auto it = e.properties.find(std::string(column)); it != e.properties.end()) return it->second;
  return {};
}

bool is_entity_column(std::string_view c) { return c == "name" || c == "class" || c == "type"; }

}  // namespace

FeatureTable export_features(const ObservationContext& obs, const PredictionSpec& spec, Source source) {
  const PropertySchema schema = available_schema(obs, source);
  if (!schema.contains(spec.target)) {
    throw ValidationError(fmt::format("{} is infeasible on the {} source: missing target property '{}'", spec.id,
                                      to_string(source), spec.target));
  }
  for (const auto& f : spec.features) {
    if (!schema.contains(f)) {
      throw ValidationError(fmt::format("{} is infeasible on the {} source: missing feature property '{}'", spec.id,
                                        to_string(source), f));
    }
  }

  FeatureTable t;
  std::vector<std::string> features;
  for (const auto& f : spec.columns)
    if (schema.contains(f)) features.push_back(f);
  t.columns = features;
  t.columns.push_back("target");

  const bool target_on_entity = is_entity_column(spec.target);
  auto label = [&](const std::string& v) { return spec.positive.contains(v) ? "1" : "0"; };

  auto context_row = [&](const TimedPersonalContext& c, const Entity* place) {
    std::vector<std::string> row;
    for (const auto& f : features) row.push_back(is_entity_column(f) ? (place ? entity_value(*place, f) : "") : answer_value(c, f));
    row.push_back(label(target_on_entity ? entity_value(*place, spec.target) : answer_value(c, spec.target)));
    return row;
  };

  if (source == Source::Reference) {
    for (const auto& e : obs.reference->entities()) {
      if (entity_value(e, spec.target).empty()) continue;
      std::vector<std::string> row;
      for (const auto& f : features) row.push_back(entity_value(e, f));
      row.push_back(label(entity_value(e, spec.target)));
      t.rows.push_back(std::move(row));
    }
    return t;
  }

  std::map<std::pair<int, Timestamp>, const Entity*> resolved;
  if (source == Source::Unified) {
    for (const auto& r : obs.resolutions) resolved[{r.userid, r.center}] = obs.reference->find(r.reference_id);
  }
  for (const auto& s : obs.streams) {
    for (const auto& c : s.contexts) {
      auto it = resolved.find({c.userid, c.center});
      const Entity* place = it == resolved.end() ? nullptr : it->second;
      if (target_on_entity) {
        // Rows are visits to places that carry the target property.
        if (place == nullptr || entity_value(*place, spec.target).empty()) continue;
      } else if (answer_value(c, spec.target).empty()) {
        continue;
      }
      t.rows.push_back(context_row(c, place));
    }
  }
  return t;
}

void write_feature_csv(std::ostream& out, const FeatureTable& t) {
  csv::write_row(out, t.columns);
  for (const auto& r : t.rows) csv::write_row(out, r);
}

void write_reference_export(std::ostream& out, const EntityGraph& ref) {
  write_entities_jsonl(out, ref);
  write_triples_jsonl(out, ref.triples());
}

void write_personal_export(std::ostream& out, const ObservationContext& obs) {
  write_streams_jsonl(out, obs.streams);
}

void write_unified_export(std::ostream& out, const ObservationContext& obs) {
  if (!obs.reference) return;
  std::set<std::string> matched;
  std::set<std::pair<int, Interval>> windows;
  for (const auto& r : obs.resolutions) {
    matched.insert(r.reference_id);
    windows.insert({r.userid, r.interval});
  }
  for (const auto& id : matched) out << entity_to_json(*obs.reference->find(id)).dump() << '\n';
  for (const auto& r : obs.resolutions) {
    if (const TimedPersonalContext* c = obs.context_of(r)) out << context_to_json(*c).dump() << '\n';
  }
  for (const auto& t : obs.derived) {
    if (!t.validity) continue;
    const auto owners = owners_of(t.subject, t.object);
    if (std::any_of(owners.begin(), owners.end(), [&](int u) { return windows.contains({u, *t.validity}); })) {
      out << triple_to_json(t).dump() << '\n';
    }
  }
}

json DatasetStats::to_json() const {
  json j = unification.to_json();
  j["reference_triples"] = reference_triples;
  j["personal_triples"] = personal_triples;
  j["reference_export_bytes"] = reference_export_bytes;
  j["personal_export_bytes"] = personal_export_bytes;
  j["unified_export_bytes"] = unified_export_bytes;
  j["compression_ratio"] = compression_ratio;
  return j;
}

DatasetStats dataset_stats(const ObservationContext& obs) {
  DatasetStats d;
  d.unification = compute_stats(obs);
  std::ostringstream ref, per, uni;
  if (obs.reference) {
    d.reference_triples = obs.reference->triples().size();
    write_reference_export(ref, *obs.reference);
  }
  for (const auto& s : obs.streams)
    for (const auto& c : s.contexts) d.personal_triples += c.triples.size();
  write_personal_export(per, obs);
  write_unified_export(uni, obs);
  d.reference_export_bytes = ref.str().size();
  d.personal_export_bytes = per.str().size();
  d.unified_export_bytes = uni.str().size();
  const std::size_t sources = d.reference_export_bytes + d.personal_export_bytes;
  d.compression_ratio = sources == 0 ? 0.0 : static_cast<double>(d.unified_export_bytes) / static_cast<double>(sources);
  return d;
}

}  // namespace bigthick
