#include <gtest/gtest.h>
#include <httplib.h>
#include <signal.h>
#include <spawn.h>
#include <sys/wait.h>
#include <unistd.h>

#include <fcntl.h>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <regex>
#include <thread>

#include <nlohmann/json.hpp>

#include "test_support.hpp"

extern char** environ;

namespace fs = std::filesystem;
using cpsec::testing::fixture;
using cpsec::testing::read_file;

namespace {

struct RunResult {
  int exit_code = -1;
  std::string out;
  std::string err;
};

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("cpsec_cli_" + std::to_string(::getpid()) + "_" +
            ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  static std::string quote(const std::string& s) {
    std::string out = "'";
    for (char c : s) out += c == '\'' ? std::string("'\\''") : std::string(1, c);
    return out + "'";
  }

  RunResult run(const std::vector<std::string>& args) {
    std::string cmd = quote(CPSEC_CLI_PATH);
    for (const auto& a : args) cmd += " " + quote(a);
    auto out = dir_ / "stdout.txt";
    auto err = dir_ / "stderr.txt";
    cmd += " >" + quote(out.string()) + " 2>" + quote(err.string());
    int status = std::system(cmd.c_str());
    RunResult r;
    r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.out = read_file(out);
    r.err = read_file(err);
    return r;
  }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  std::string ingest_full() {
    auto snap = path("full.jsonl");
    auto r = run({"ingest", "--capec", fixture("corpus/capec.xml").string(), "--cwe",
                  fixture("corpus/cwe.xml").string(), "--cve",
                  fixture("corpus/nvd.json").string(), "--out", snap});
    EXPECT_EQ(r.exit_code, 0) << r.err;
    return snap;
  }

  fs::path dir_;
};

std::size_t count_lines(const std::string& s) {
  return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n'));
}

}  // namespace

TEST_F(CliTest, IngestTrioWritesOneLinePerDocument) {
  auto snap = path("trio.jsonl");
  auto r = run({"ingest", "--capec", fixture("corpus/trio/capec.xml").string(), "--cwe",
                fixture("corpus/trio/cwe.xml").string(), "--cve",
                fixture("corpus/trio/nvd.json").string(), "--out", snap});
  ASSERT_EQ(r.exit_code, 0) << r.err;
  EXPECT_EQ(count_lines(read_file(snap)), 3u);
  EXPECT_TRUE(r.out.empty());
  EXPECT_NE(r.err.find("3 documents"), std::string::npos) << r.err;
}

TEST_F(CliTest, IngestWithoutInputsIsUsageError) {
  EXPECT_EQ(run({"ingest", "--out", path("x.jsonl")}).exit_code, 2);
  EXPECT_EQ(run({}).exit_code, 2);
  EXPECT_EQ(run({"bogus"}).exit_code, 2);
  EXPECT_EQ(run({"--help"}).exit_code, 0);
}

TEST_F(CliTest, IngestDuplicateKeepsFirstAndWarns) {
  auto cwe = path("dup.xml");
  std::ofstream(cwe) << "<Weakness_Catalog><Weaknesses>"
                        "<Weakness ID='7' Name='first'><Description>a</Description></Weakness>"
                        "<Weakness ID='7' Name='second'><Description>b</Description></Weakness>"
                        "</Weaknesses></Weakness_Catalog>";
  auto r = run({"ingest", "--cwe", cwe, "--out", path("dup.jsonl")});
  ASSERT_EQ(r.exit_code, 0) << r.err;
  auto snap = read_file(path("dup.jsonl"));
  EXPECT_EQ(count_lines(snap), 1u);
  EXPECT_NE(snap.find("first"), std::string::npos);
  EXPECT_NE(r.err.find("DUPLICATE_ID"), std::string::npos);
}

TEST_F(CliTest, IngestUnreadableInputFails) {
  auto r = run({"ingest", "--cwe", path("missing.xml"), "--out", path("o.jsonl")});
  EXPECT_EQ(r.exit_code, 1);
  EXPECT_FALSE(r.err.empty());
}

TEST_F(CliTest, AnalyzeCsvIsDeterministic) {
  auto snap = ingest_full();
  std::vector<std::string> args = {"analyze", "--model",
                                   fixture("models/scada_centrifuge.graphml").string(),
                                   "--corpus", snap};
  auto a = run(args);
  auto b = run(args);
  ASSERT_EQ(a.exit_code, 0) << a.err;
  EXPECT_EQ(a.out, b.out);
  EXPECT_EQ(a.out.substr(0, a.out.find('\n')),
            "component,attribute,attack_patterns,weaknesses,vulnerabilities,total");
  // 6 component attribute rows + 7 connection protocol rows in the fixture.
  auto model = cpsec::testing::load_model("models/scada_centrifuge.graphml");
  std::size_t attrs = 0;
  for (const auto& c : model.components) attrs += c.attributes.size();
  for (const auto& e : model.connections) attrs += e.attributes.size();
  EXPECT_EQ(count_lines(a.out), attrs + 1);
}

TEST_F(CliTest, AnalyzeJsonAndConfig) {
  auto snap = ingest_full();
  auto cfg = path("cfg.json");
  std::ofstream(cfg) << R"({"top_k": 3, "crossref_depth": 0, "kinds": ["Weakness"]})";
  auto r = run({"analyze", "--model", fixture("models/scada_centrifuge.graphml").string(),
                "--corpus", snap, "--config", cfg, "--format", "json"});
  ASSERT_EQ(r.exit_code, 0) << r.err;
  auto j = nlohmann::json::parse(r.out);
  EXPECT_EQ(j["config"]["top_k"], 3);
  for (const auto& row : j["rows"]) {
    EXPECT_LE(row["total"].get<int>(), 3);
    EXPECT_EQ(row["attack_patterns"], 0);
    EXPECT_EQ(row["vulnerabilities"], 0);
  }
  std::ofstream(cfg) << R"({"top_k": -1})";
  EXPECT_EQ(run({"analyze", "--model", fixture("models/single_node.graphml").string(),
                 "--corpus", snap, "--config", cfg})
                .exit_code,
            1);
  EXPECT_EQ(run({"analyze", "--model", fixture("models/single_node.graphml").string(),
                 "--corpus", snap, "--format", "xml"})
                .exit_code,
            2);
}

TEST_F(CliTest, AnalyzeModelWithoutAttributesIsHeaderOnly) {
  auto snap = ingest_full();
  auto r = run({"analyze", "--model", fixture("models/no_attributes.graphml").string(),
                "--corpus", snap});
  ASSERT_EQ(r.exit_code, 0) << r.err;
  EXPECT_EQ(r.out, "component,attribute,attack_patterns,weaknesses,vulnerabilities,total\n");
}

TEST_F(CliTest, AnalyzeInvalidModelListsViolations) {
  auto snap = ingest_full();
  auto r = run({"analyze", "--model",
                fixture("models/invalid/dangling_edge.graphml").string(), "--corpus", snap});
  EXPECT_EQ(r.exit_code, 1);
  EXPECT_NE(r.err.find("e_missing"), std::string::npos) << r.err;
  EXPECT_TRUE(r.out.empty());
}

TEST_F(CliTest, DiffExitCodes) {
  auto snap = ingest_full();
  auto base = path("base.json");
  auto xp = path("xp.json");
  auto model = cpsec::testing::load_model("models/scada_centrifuge.graphml");
  auto patched = cpsec::apply_mutation(
      model, cpsec::mutation::SetAttribute{{cpsec::OwnerScope::kComponent, "programming_ws"},
                                           {"os", "Windows XP"}});
  std::ofstream(path("xp.graphml")) << cpsec::serialize_model(patched);
  ASSERT_EQ(run({"analyze", "--model", fixture("models/scada_centrifuge.graphml").string(),
                 "--corpus", snap, "--surface-out", base})
                .exit_code,
            0);
  ASSERT_EQ(run({"analyze", "--model", path("xp.graphml"), "--corpus", snap,
                 "--surface-out", xp})
                .exit_code,
            0);

  auto same = run({"diff", "--before", base, "--after", base});
  EXPECT_EQ(same.exit_code, 0);
  EXPECT_EQ(nlohmann::json::parse(same.out)["empty"], true);

  auto changed = run({"diff", "--before", base, "--after", xp});
  EXPECT_EQ(changed.exit_code, 3) << changed.err;
  auto j = nlohmann::json::parse(changed.out);
  EXPECT_GT(j["net_delta"].get<int>(), 0);
  ASSERT_EQ(j["attributes"].size(), 1u);
  EXPECT_EQ(j["attributes"][0]["key"], "os");

  auto trio = path("trio.jsonl");
  ASSERT_EQ(run({"ingest", "--cwe", fixture("corpus/trio/cwe.xml").string(), "--out", trio})
                .exit_code,
            0);
  auto other = path("other.json");
  ASSERT_EQ(run({"analyze", "--model", path("xp.graphml"), "--corpus", trio,
                 "--surface-out", other})
                .exit_code,
            0);
  auto stale = run({"diff", "--before", base, "--after", other});
  EXPECT_EQ(stale.exit_code, 1);
  EXPECT_NE(stale.err.find("STALE_COMPARISON"), std::string::npos);
  EXPECT_EQ(run({"diff", "--before", base}).exit_code, 2);
}

TEST_F(CliTest, ServeMissingSnapshotFails) {
  auto r = run({"serve", "--listen", "127.0.0.1:0", "--corpus", path("none.jsonl")});
  EXPECT_EQ(r.exit_code, 1);
}

TEST_F(CliTest, ServeAnswersHealthAndPersists) {
  auto snap = ingest_full();
  auto persist = dir_ / "persist";
  auto err_path = dir_ / "serve.err";
  std::vector<std::string> args = {CPSEC_CLI_PATH, "serve", "--listen", "127.0.0.1:0",
                                   "--corpus", snap, "--persist", persist.string()};
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  argv.push_back(nullptr);
  posix_spawn_file_actions_t actions;
  posix_spawn_file_actions_init(&actions);
  posix_spawn_file_actions_addopen(&actions, 2, err_path.c_str(),
                                   O_WRONLY | O_CREAT | O_TRUNC, 0644);
  pid_t pid = 0;
  ASSERT_EQ(posix_spawn(&pid, argv[0], &actions, nullptr, argv.data(), environ), 0);
  posix_spawn_file_actions_destroy(&actions);

  int port = 0;
  std::regex port_re(R"(http://[^:]+:(\d+))");
  for (int i = 0; i < 400 && port == 0; ++i) {
    std::smatch m;
    std::string err = fs::exists(err_path) ? read_file(err_path) : "";
    if (std::regex_search(err, m, port_re)) port = std::stoi(m[1]);
    else std::this_thread::sleep_for(std::chrono::milliseconds(10));
  }
  ASSERT_GT(port, 0);
  httplib::Client client("127.0.0.1", port);
  auto h = client.Get("/healthz");
  ASSERT_TRUE(h);
  EXPECT_EQ(h->status, 200);
  auto up = client.Post("/models", read_file(fixture("models/single_node.graphml")),
                        "application/xml");
  ASSERT_TRUE(up);
  EXPECT_EQ(up->status, 201);
  EXPECT_TRUE(fs::exists(persist / "models" / "m1" / "v1.graphml"));

  kill(pid, SIGTERM);
  int status = 0;
  waitpid(pid, &status, 0);
  EXPECT_TRUE(WIFEXITED(status));
  EXPECT_EQ(WEXITSTATUS(status), 0);
}
