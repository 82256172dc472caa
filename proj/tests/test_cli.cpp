#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

namespace fs = std::filesystem;

namespace {

struct Run {
  int code = -1;
  std::string out;
  std::string err;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch() {
  static const fs::path dir = [] {
    auto d = fs::temp_directory_path() / ("rmon_cli_" + std::to_string(::getpid()));
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

Run rmon(const std::string& args) {
  const auto out = scratch() / "stdout", err = scratch() / "stderr";
  const std::string cmd = std::string(RMON_CLI) + " " + args + " >" + out.string() + " 2>" + err.string();
  const int status = std::system(cmd.c_str());
  Run r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = slurp(out);
  r.err = slurp(err);
  return r;
}

std::size_t lines(const std::string& s) {
  std::size_t n = 0;
  for (char c : s) n += c == '\n';
  return n;
}

const std::string data = RMON_TEST_DATA;

}  // namespace

TEST(Cli, Search) {
  const auto r = rmon("search " + data + "/rover.kb dmin");
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(lines(r.out), 4u);
  EXPECT_EQ(r.out.rfind("substitution(dmin,\"/emergency_stop/dmin/data\")\n", 0), 0u);
  EXPECT_NE(r.err.find("warning"), std::string::npos);

  const auto flags = rmon("search --kb " + data + "/rover.kb --variable speed");
  EXPECT_EQ(flags.code, 0);
  EXPECT_EQ(lines(flags.out), 2u);
  EXPECT_EQ(rmon("search --kb " + data + "/rover.kb --variable dmin --max-depth 1").out,
            rmon("search " + data + "/rover.kb dmin --max-depth 1").out);
}

TEST(Cli, Validate) {
  const auto ok = rmon("validate " + data + "/rover.kb");
  EXPECT_EQ(ok.code, 0);
  EXPECT_EQ(ok.out, "ok: 5 variables, 4 relations, 6 signals, 2 implementations\n");
  const auto bad = rmon("validate " + data + "/broken.kb");
  EXPECT_EQ(bad.code, 2);
  EXPECT_EQ(lines(bad.out), 2u);
  EXPECT_NE(bad.err.find("broken.kb:4:1"), std::string::npos) << bad.err;
}

TEST(Cli, UsageErrors) {
  EXPECT_EQ(rmon("").code, 1);
  EXPECT_EQ(rmon("search --bogus").code, 1);
  EXPECT_EQ(rmon("replay").code, 1);
  EXPECT_EQ(rmon("search " + data + "/rover.kb").code, 1);
  EXPECT_EQ(rmon("replay " + data + "/value_faults.yaml --n-buf 0").code, 1);
  EXPECT_EQ(rmon("search " + data + "/missing.kb dmin").code, 2);
  EXPECT_EQ(rmon("search " + data + "/rover.kb nothere").code, 2);
  EXPECT_EQ(rmon("--help").code, 0);
}

TEST(Cli, GenerateInjectReplayReport) {
  const auto dir = scratch();
  const auto clean = dir / "clean.jsonl", faulty = dir / "faulty.jsonl", log = dir / "log.jsonl",
             csv = dir / "report.csv", summary = dir / "summary.json";
  ASSERT_EQ(rmon("generate " + data + "/late_message.yaml --out " + clean.string()).code, 0);
  EXPECT_EQ(lines(slurp(clean)), 30u);
  ASSERT_EQ(rmon("inject " + data + "/late_message.yaml --trace " + clean.string() + " --out " + faulty.string()).code, 0);
  EXPECT_EQ(lines(slurp(faulty)), 30u);
  EXPECT_NE(slurp(faulty), slurp(clean));

  const auto r = rmon("replay " + data + "/late_message.yaml --n-buf 2 --out " + log.string() +
                      " --summary " + summary.string());
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("\"false_alarm_rate\""), std::string::npos);
  EXPECT_EQ(slurp(summary), r.out);
  EXPECT_EQ(lines(slurp(log)), 10u);

  ASSERT_EQ(rmon("report " + log.string() + " --out " + csv.string()).code, 0);
  const auto text = slurp(csv);
  EXPECT_EQ(text.rfind("t,failed,err_0,err_1,err_2\n", 0), 0u);
  EXPECT_EQ(lines(text), 10u);

  const auto to_stdout = rmon("replay " + data + "/late_message.yaml --out -");
  EXPECT_EQ(to_stdout.out.rfind("{\"header\":", 0), 0u);
  EXPECT_EQ(lines(to_stdout.out), 10u);

  std::ofstream(dir / "junk.jsonl") << "{}\n";
  EXPECT_EQ(rmon("report " + (dir / "junk.jsonl").string()).code, 2);
}

TEST(Cli, SeedOverrideIsDeterministic) {
  const auto a = rmon("generate " + data + "/value_faults.yaml --seed 9");
  const auto b = rmon("generate " + data + "/value_faults.yaml --seed 9");
  EXPECT_EQ(a.code, 0);
  EXPECT_EQ(a.out, b.out);
  EXPECT_EQ(lines(a.out), 3u * 62u);
}
