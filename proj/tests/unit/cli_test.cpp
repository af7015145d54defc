#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "bigthick/cli.hpp"

namespace fs = std::filesystem;
using namespace bigthick;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("bigthick_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  /// Small synthetic dataset; returns the generated config path.
  std::string synth(const std::string& sub) {
    const auto r = cli({"synth", "-o", (dir_ / sub).string(), "-s", "synth.n_places=60", "-s",
                        "synth.n_participants=3", "-s", "synth.weeks=1", "-s", "synth.random_visits=4", "-s",
                        "synth.bbox={\"min_lat\":46.060,\"max_lat\":46.068,\"min_lon\":11.110,\"max_lon\":11.121}"});
    EXPECT_EQ(r.code, 0) << r.err;
    return (dir_ / sub / "config.json").string();
  }

  fs::path dir_;
};

}  // namespace

TEST_F(CliTest, ShowConfigAppliesOverrides) {
  const auto r = cli({"show-config", "-s", "unification.near_threshold_m=40", "-j", "3"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_EQ(j["unification"]["near_threshold_m"], 40.0);
  EXPECT_EQ(j["workers"], 3);
}

TEST_F(CliTest, BadOverrideIsAValidationError) {
  EXPECT_EQ(cli({"show-config", "-s", "unification.near_threshold_m=-1"}).code, 1);
  EXPECT_EQ(cli({"show-config", "-s", "nonsense"}).code, 1);
  EXPECT_EQ(cli({"no-such-command"}).code, 1);
}

TEST_F(CliTest, PipelineRerunIsByteIdentical) {
  const std::string cfg = synth("data");
  const std::string cfg2 = synth("data2");
  EXPECT_EQ(slurp(dir_ / "data" / "gps.csv"), slurp(dir_ / "data2" / "gps.csv"));
  for (const char* o : {"a", "b"}) {
    const auto r = cli({"unify", "-c", cfg, "-o", (dir_ / o).string(), "-j", o[0] == 'a' ? "1" : "4"});
    ASSERT_EQ(r.code, 0) << r.err;
  }
  for (const char* f : {"derived.jsonl", "resolutions.jsonl", "unified.jsonl", "stats.json"}) {
    const auto a = slurp(dir_ / "a" / "observation" / f);
    EXPECT_FALSE(a.empty()) << f;
    EXPECT_EQ(a, slurp(dir_ / "b" / "observation" / f)) << f;
  }
  (void)cfg2;
}

TEST_F(CliTest, IngestEnquireAndExport) {
  const std::string cfg = synth("data");
  ASSERT_EQ(cli({"ingest-reference", "-c", cfg}).code, 0);
  ASSERT_EQ(cli({"ingest-personal", "-c", cfg}).code, 0);
  EXPECT_TRUE(fs::exists(dir_ / "data" / "run" / "reference" / "entities.jsonl"));
  EXPECT_TRUE(fs::exists(dir_ / "data" / "run" / "personal" / "streams.jsonl"));

  std::ofstream(dir_ / "q.json") << R"({"id": "q", "patterns": [["?u", "Mood", "?m"]], "count": "?u"})";
  const auto q = cli({"enquire", (dir_ / "q.json").string(), "-c", cfg});
  ASSERT_EQ(q.code, 0) << q.err;
  EXPECT_EQ(q.out.rfind("class: RP\n", 0), 0u) << q.out;

  const auto f = cli({"feasibility", "E2", "-c", cfg});
  ASSERT_EQ(f.code, 0) << f.err;
  EXPECT_EQ(f.out, "reference: false\npersonal: true\nunified: true\n");

  const fs::path csv = dir_ / "e2.csv";
  const auto x = cli({"export-features", "E2", "--source", "personal", "--out", csv.string(), "-c", cfg});
  ASSERT_EQ(x.code, 0) << x.err;
  EXPECT_EQ(slurp(csv).substr(0, slurp(csv).find('\n')), "what,withWhom,mood,target");
  EXPECT_EQ(cli({"export-features", "E3", "--source", "personal", "-c", cfg}).code, 1);
}

TEST_F(CliTest, ReferenceOnlyRun) {
  const std::string cfg = synth("data");
  const auto r = cli({"feasibility", "E3", "-c", cfg, "-s", "batteries=", "-s", "gps="});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out, "reference: false\npersonal: false\nunified: false\n");
  const auto e1 = cli({"feasibility", "E1", "-c", cfg, "-s", "batteries="});
  EXPECT_EQ(e1.out.substr(0, e1.out.find('\n')), "reference: true");
}

TEST_F(CliTest, MismatchedPersonalPeriodIsRejected) {
  const std::string cfg = synth("data");
  const auto r = cli({"unify", "-c", cfg, "-s", "personal_period=05-10 00:00:00/05-24 00:00:00"});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("05-10 00:00:00/05-24 00:00:00"), std::string::npos) << r.err;
}

TEST_F(CliTest, MissingInputIsAnIoError) {
  const std::string cfg = synth("data");
  const auto r = cli({"unify", "-c", cfg, "-s", ("places=" + (dir_ / "absent.csv").string())});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("absent.csv"), std::string::npos);
  EXPECT_EQ(cli({"show-config", "-c", (dir_ / "none.json").string()}).code, 2);
}
