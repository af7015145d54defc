#include "bigthick/personal.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <limits>
#include <map>
#include <thread>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "bigthick/csv.hpp"
#include "bigthick/dbscan.hpp"
#include "bigthick/error.hpp"

namespace bigthick {

using nlohmann::json;

std::string user_entity_id(int userid) { return fmt::format("User{}", userid); }

std::optional<int> parse_user_entity_id(std::string_view id) {
  if (!id.starts_with("User") || id.size() == 4) return std::nullopt;
  int v = 0;
  auto [ptr, ec] = std::from_chars(id.data() + 4, id.data() + id.size(), v);
  if (ec != std::errc{} || ptr != id.data() + id.size()) return std::nullopt;
  return v;
}

std::string AnonymousIdSource::next(std::string_view etype) {
  ++counter_;
  if (scope_.empty()) return fmt::format("#{}{}", etype, counter_);
  return fmt::format("#{}{}@{}", etype, counter_, scope_);
}

namespace {

const AnonymousEntity* find_anonymous(const std::vector<AnonymousEntity>& list, std::string_view role_etype,
                                      bool match) {
  auto it = std::find_if(list.begin(), list.end(), [&](const AnonymousEntity& a) {
    return match ? a.etype == role_etype : (a.etype != "Person" && a.etype != "Phone");
  });
  return it == list.end() ? nullptr : &*it;
}

}  // namespace

const AnonymousEntity* TimedPersonalContext::place() const { return find_anonymous(anonymous, "", false); }
const AnonymousEntity* TimedPersonalContext::phone() const { return find_anonymous(anonymous, "Phone", true); }
const AnonymousEntity* TimedPersonalContext::companion() const { return find_anonymous(anonymous, "Person", true); }

std::optional<GeoPoint> estimate_position(std::span<const GpsSample> samples, Timestamp t_q,
                                          const PositionParams& params) {
  if (params.window_s <= 0) throw ValidationError("position window must be positive");
  std::vector<GeoPoint> pts;
  std::vector<std::int64_t> gap;
  for (const auto& s : samples) {
    const std::int64_t d = s.at > t_q ? s.at - t_q : t_q - s.at;
    if (2 * d <= params.window_s) {
      pts.push_back(s.point);
      gap.push_back(d);
    }
  }
  if (pts.empty()) return std::nullopt;

  const Clustering c = dbscan(pts, params.eps_m, params.min_pts);
  if (c.cluster_count == 0) return std::nullopt;
  const auto clusters = c.clusters();

  std::size_t best = 0;
  auto closest = [&](std::size_t k) {
    std::int64_t m = std::numeric_limits<std::int64_t>::max();
    for (auto i : clusters[k]) m = std::min(m, gap[i]);
    return m;
  };
  for (std::size_t k = 1; k < clusters.size(); ++k) {
    if (clusters[k].size() > clusters[best].size() ||
        (clusters[k].size() == clusters[best].size() && closest(k) < closest(best))) {
      best = k;
    }
  }

  GeoPoint mean{0.0, 0.0, std::nullopt};
  double alt = 0.0;
  bool all_alt = true;
  for (auto i : clusters[best]) {
    mean.lat += pts[i].lat;
    mean.lon += pts[i].lon;
    if (pts[i].alt) {
      alt += *pts[i].alt;
    } else {
      all_alt = false;
    }
  }
  const auto n = static_cast<double>(clusters[best].size());
  mean.lat /= n;
  mean.lon /= n;
  if (all_alt) mean.alt = alt / n;
  return mean;
}

TimedPersonalContext battery_to_context(const QuestionBattery& b, const Interval& interval,
                                        const std::optional<GeoPoint>& pos, AnonymousIdSource& ids,
                                        const DiaryVocabulary& vocab) {
  if (!interval.well_formed()) throw ValidationError("context interval ends before it starts");
  const WhereAnswer* where = b.where ? &vocab.where_answer(*b.where) : nullptr;
  const WithWhomAnswer* who = b.with_whom ? &vocab.with_whom_answer(*b.with_whom) : nullptr;
  if (b.what) vocab.check_what(*b.what);
  if (b.mood && (*b.mood < 1 || *b.mood > 5)) {
    throw ValidationError(fmt::format("mood {} outside [1, 5]", *b.mood));
  }

  TimedPersonalContext ctx;
  ctx.userid = b.userid;
  ctx.center = b.at;
  ctx.interval = interval;
  ctx.position = pos;
  ctx.answers = b;
  const std::string me = user_entity_id(b.userid);

  auto timed = [&](std::string s, std::string p, std::string o, bool literal) {
    ctx.triples.push_back(Triple{std::move(s), std::move(p), std::move(o), literal, interval, Provenance::Personal,
                                 std::nullopt});
  };

  if (where) {
    const std::string place = ids.next(where->etype);
    ctx.anonymous.push_back({place, where->etype, std::nullopt});
    timed(me, "Near", place, false);
  }
  if (b.what) timed(me, "Action", *b.what, true);
  if (b.mood) timed(me, "Mood", std::to_string(*b.mood), true);
  if (who) {
    if (who->relation == kAloneRelation) {
      timed(me, kAloneRelation, who->label, true);
    } else {
      const std::string person = ids.next("Person");
      ctx.anonymous.push_back({person, "Person", std::nullopt});
      // Functions hold for the whole event and carry no validity of their own.
      ctx.triples.push_back(
          Triple{person, who->relation, me, false, std::nullopt, Provenance::Personal, std::nullopt});
      timed(me, "WithWhom", person, false);
      timed(me, "Near", person, false);
    }
  }
  if (pos) {
    const std::string phone = ids.next("Phone");
    ctx.anonymous.push_back({phone, "Phone", std::nullopt});
    timed(phone, "PhoneOf", me, false);
  }
  return ctx;
}

std::int64_t QuestionSchedule::spacing_at(const Interval& period, Timestamp t) const {
  if (spacing_s.empty()) throw ValidationError("question schedule is empty");
  const std::int64_t week = std::max<std::int64_t>(0, (t - period.start) / kWeek);
  return spacing_s[static_cast<std::size_t>(std::min<std::int64_t>(week, static_cast<std::int64_t>(spacing_s.size()) - 1))];
}

PersonalStream build_stream(int userid, std::span<const QuestionBattery> batteries,
                            std::span<const GpsSample> samples, const Interval& period,
                            const QuestionSchedule& schedule, const PositionParams& params,
                            const DiaryVocabulary& vocab) {
  for (auto s : schedule.spacing_s)
    if (s <= 0) throw ValidationError("question spacing must be positive");

  std::vector<QuestionBattery> mine;
  for (const auto& b : batteries)
    if (b.userid == userid) mine.push_back(b);
  std::stable_sort(mine.begin(), mine.end(), [](const auto& a, const auto& b) { return a.at < b.at; });

  std::vector<GpsSample> gps;
  for (const auto& s : samples)
    if (s.userid == userid) gps.push_back(s);
  std::stable_sort(gps.begin(), gps.end(), [](const auto& a, const auto& b) { return a.at < b.at; });

  PersonalStream stream{userid, period, {}};
  AnonymousIdSource ids(user_entity_id(userid));
  std::optional<Timestamp> last;
  for (const auto& b : mine) {
    if (!period.contains(b.at)) {
      spdlog::warn("user {}: battery at {} lies outside the observation period, dropped", userid,
                   format_timestamp(b.at));
      continue;
    }
    if (!b.answered()) continue;
    if (last && *last == b.at) {
      spdlog::warn("user {}: second battery at {} dropped", userid, format_timestamp(b.at));
      continue;
    }
    last = b.at;

    const std::int64_t spacing = schedule.spacing_at(period, b.at);
    const Interval dt = Interval{b.at - spacing / 2, b.at + (spacing - spacing / 2)}.intersect(period);

    const auto lo = std::lower_bound(gps.begin(), gps.end(), b.at - params.window_s / 2 - 1,
                                     [](const GpsSample& s, Timestamp t) { return s.at < t; });
    const auto hi = std::upper_bound(gps.begin(), gps.end(), b.at + params.window_s / 2 + 1,
                                     [](Timestamp t, const GpsSample& s) { return t < s.at; });
    const auto window = std::span<const GpsSample>(gps).subspan(static_cast<std::size_t>(lo - gps.begin()),
                                                                 static_cast<std::size_t>(hi - lo));
    const auto pos = estimate_position(window, b.at, params);
    stream.contexts.push_back(battery_to_context(b, dt, pos, ids, vocab));
  }
  return stream;
}

std::vector<PersonalStream> build_streams(std::span<const QuestionBattery> batteries,
                                          std::span<const GpsSample> samples, const Interval& period,
                                          const QuestionSchedule& schedule, const PositionParams& params,
                                          const DiaryVocabulary& vocab, unsigned workers) {
  std::map<int, std::vector<QuestionBattery>> by_user;
  for (const auto& b : batteries) by_user[b.userid].push_back(b);
  std::map<int, std::vector<GpsSample>> gps_by_user;
  for (const auto& s : samples)
    if (by_user.contains(s.userid)) gps_by_user[s.userid].push_back(s);

  std::vector<int> users;
  for (const auto& [u, _] : by_user) users.push_back(u);
  std::vector<PersonalStream> out(users.size());

  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < users.size(); i = next++) {
      const int u = users[i];
      out[i] = build_stream(u, by_user[u], gps_by_user[u], period, schedule, params, vocab);
    }
  };
  const unsigned n = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(users.size())));
  if (n == 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < n; ++w) pool.emplace_back(work);
  }
  return out;
}

namespace {

std::optional<std::string> opt(const std::string& s) {
  if (s.empty()) return std::nullopt;
  return s;
}

int parse_int(const std::string& s, std::string_view what) {
  int v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) {
    throw ValidationError(fmt::format("malformed {} '{}'", what, s));
  }
  return v;
}

double parse_double(const std::string& s, std::string_view what) {
  double v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) {
    throw ValidationError(fmt::format("malformed {} '{}'", what, s));
  }
  return v;
}

json point_json(const GeoPoint& p) {
  json j = {{"lat", p.lat}, {"lon", p.lon}};
  j["alt"] = p.alt ? json(*p.alt) : json(nullptr);
  return j;
}

GeoPoint point_from_json(const json& j) {
  GeoPoint p{j.at("lat").get<double>(), j.at("lon").get<double>(), std::nullopt};
  if (j.contains("alt") && !j["alt"].is_null()) p.alt = j["alt"].get<double>();
  return p;
}

json opt_json(const std::optional<std::string>& s) { return s ? json(*s) : json(nullptr); }

std::optional<std::string> opt_string(const json& j, const char* key) {
  if (!j.contains(key) || j[key].is_null()) return std::nullopt;
  return j[key].get<std::string>();
}

}  // namespace

std::vector<QuestionBattery> read_batteries_csv(std::istream& in) {
  const auto t = csv::Table::read(in);
  const auto cu = t.column("userid"), ct = t.column("timestamp"), cwhere = t.column("where"),
             cwhat = t.column("what"), cwho = t.column("withWhom"), cmood = t.column("mood");
  std::vector<QuestionBattery> out;
  out.reserve(t.rows().size());
  for (const auto& r : t.rows()) {
    QuestionBattery b;
    b.userid = parse_int(r[cu], "userid");
    if (b.userid < 0) throw ValidationError(fmt::format("negative userid {}", b.userid));
    b.at = parse_timestamp(r[ct]);
    b.where = opt(r[cwhere]);
    b.what = opt(r[cwhat]);
    b.with_whom = opt(r[cwho]);
    if (!r[cmood].empty()) {
      b.mood = parse_int(r[cmood], "mood");
      if (*b.mood < 1 || *b.mood > 5) throw ValidationError(fmt::format("mood {} outside [1, 5]", *b.mood));
    }
    out.push_back(std::move(b));
  }
  return out;
}

void write_batteries_csv(std::ostream& out, std::span<const QuestionBattery> batteries) {
  csv::write_row(out, {"userid", "timestamp", "where", "what", "withWhom", "mood"});
  for (const auto& b : batteries) {
    csv::write_row(out, {std::to_string(b.userid), format_timestamp(b.at), b.where.value_or(""), b.what.value_or(""),
                         b.with_whom.value_or(""), b.mood ? std::to_string(*b.mood) : ""});
  }
}

std::vector<GpsSample> read_gps_csv(std::istream& in) {
  const auto t = csv::Table::read(in);
  const auto cu = t.column("userid"), ct = t.column("timestamp"), clat = t.column("lat"), clon = t.column("lon"),
             calt = t.column("alt");
  std::vector<GpsSample> out;
  out.reserve(t.rows().size());
  for (const auto& r : t.rows()) {
    GpsSample s;
    s.userid = parse_int(r[cu], "userid");
    s.at = parse_timestamp(r[ct]);
    s.point.lat = parse_double(r[clat], "latitude");
    s.point.lon = parse_double(r[clon], "longitude");
    if (!r[calt].empty()) s.point.alt = parse_double(r[calt], "altitude");
    if (!s.point.valid()) throw ValidationError(fmt::format("invalid GPS point ({}, {})", r[clat], r[clon]));
    out.push_back(s);
  }
  return out;
}

void write_gps_csv(std::ostream& out, std::span<const GpsSample> samples) {
  csv::write_row(out, {"userid", "timestamp", "lat", "lon", "alt"});
  for (const auto& s : samples) {
    csv::write_row(out, {std::to_string(s.userid), format_timestamp(s.at), fmt::format("{:.7f}", s.point.lat),
                         fmt::format("{:.7f}", s.point.lon), s.point.alt ? fmt::format("{:.1f}", *s.point.alt) : ""});
  }
}

json context_to_json(const TimedPersonalContext& c) {
  json triples = json::array();
  for (const auto& t : c.triples) triples.push_back(triple_to_json(t));
  json anon = json::array();
  for (const auto& a : c.anonymous) anon.push_back({{"id", a.id}, {"etype", a.etype}, {"name", opt_json(a.name)}});
  const auto& b = c.answers;
  json answers = {{"where", opt_json(b.where)},
                  {"what", opt_json(b.what)},
                  {"withWhom", opt_json(b.with_whom)},
                  {"mood", b.mood ? json(*b.mood) : json(nullptr)}};
  return {{"userid", c.userid},
          {"center", format_timestamp(c.center)},
          {"interval", format_interval(c.interval)},
          {"position", c.position ? point_json(*c.position) : json(nullptr)},
          {"triples", std::move(triples)},
          {"anonymous", std::move(anon)},
          {"answers", std::move(answers)}};
}

TimedPersonalContext context_from_json(const json& j) {
  TimedPersonalContext c;
  c.userid = j.at("userid").get<int>();
  c.center = parse_timestamp(j.at("center").get<std::string>());
  c.interval = parse_interval(j.at("interval").get<std::string>());
  if (j.contains("position") && !j["position"].is_null()) c.position = point_from_json(j["position"]);
  for (const auto& t : j.at("triples")) c.triples.push_back(triple_from_json(t));
  for (const auto& a : j.at("anonymous")) {
    c.anonymous.push_back({a.at("id").get<std::string>(), a.at("etype").get<std::string>(), opt_string(a, "name")});
  }
  const auto& ja = j.at("answers");
  c.answers.userid = c.userid;
  c.answers.at = c.center;
  c.answers.where = opt_string(ja, "where");
  c.answers.what = opt_string(ja, "what");
  c.answers.with_whom = opt_string(ja, "withWhom");
  if (ja.contains("mood") && !ja["mood"].is_null()) c.answers.mood = ja["mood"].get<int>();
  return c;
}

void write_streams_jsonl(std::ostream& out, std::span<const PersonalStream> streams) {
  for (const auto& s : streams)
    for (const auto& c : s.contexts) out << context_to_json(c).dump() << '\n';
}

std::vector<PersonalStream> read_streams_jsonl(std::istream& in, const Interval& period) {
  std::map<int, PersonalStream> by_user;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    TimedPersonalContext c;
    try {
      c = context_from_json(json::parse(line));
    } catch (const json::exception& e) {
      throw ValidationError(fmt::format("malformed context line: {}", e.what()));
    }
    auto& s = by_user[c.userid];
    s.userid = c.userid;
    s.period = period;
    s.contexts.push_back(std::move(c));
  }
  std::vector<PersonalStream> out;
  for (auto& [_, s] : by_user) {
    std::stable_sort(s.contexts.begin(), s.contexts.end(),
                     [](const auto& a, const auto& b) { return a.center < b.center; });
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace bigthick
