#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "cannonball/exactseq.hpp"
#include "cli/checkpoint.hpp"
#include "cli/config.hpp"
#include "cli/emit.hpp"
#include "cli/run.hpp"
#include "oracle.hpp"

using namespace cannonball;
using namespace cannonball::cli;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "cannonball");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out;
  std::ostringstream err;
  const int code = main_entry(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    out.push_back(line);
  }
  return out;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

class TempDir : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = std::filesystem::temp_directory_path() /
           ("cannonball_test_" + std::to_string(::getpid()) + "_" +
            ::testing::UnitTest::GetInstance()->current_test_info()->name());
    std::filesystem::remove_all(dir_);
    std::filesystem::create_directories(dir_);
  }
  void TearDown() override { std::filesystem::remove_all(dir_); }
  std::filesystem::path dir_;
};

}  // namespace

TEST(Emit, CsvQuotingFollowsRfc4180) {
  EXPECT_EQ(csv_field("plain"), "plain");
  EXPECT_EQ(csv_field("a,b"), "\"a,b\"");
  EXPECT_EQ(csv_field("say \"hi\""), "\"say \"\"hi\"\"\"");
  EXPECT_EQ(csv_field("two\nlines"), "\"two\nlines\"");
}

TEST(Emit, EmptyTables) {
  std::ostringstream csv;
  emit(csv, Format::Csv, {"x", "k"}, {});
  EXPECT_EQ(csv.str(), "x,k\r\n");
  std::ostringstream json;
  emit(json, Format::Json, {"x", "k"}, {});
  EXPECT_EQ(json.str(), "[]\n");
}

TEST(Emit, JsonKeepsColumnOrderAndBigIntegersAsStrings) {
  const BigInt huge = BigInt(1) << 200;
  std::ostringstream json;
  emit(json, Format::Json, {"z", "a", "ok"},
       {{Cell::str(huge.str()), Cell::num(7), Cell::flag(true)}});
  const std::string s = json.str();
  EXPECT_NE(s.find("{\"z\": \"" + huge.str() + "\", \"a\": 7, \"ok\": true}"), std::string::npos)
      << s;
}

TEST(Emit, MismatchedRowThrows) {
  std::ostringstream out;
  RowWriter w(out, Format::Csv, {"a", "b"});
  EXPECT_THROW(w.write({Cell::num(1)}), std::logic_error);
}

TEST(Emit, UnwritablePathIsAnIoError) {
  EXPECT_THROW(emit_to_path("/nonexistent_dir/for/sure/out.csv", Format::Csv, {"a"}, {}), IoError);
}

TEST(Checkpoint, SerializeRoundTrip) {
  Checkpoint cp;
  cp.command = "moments";
  cp.fingerprint = fingerprint("abc");
  cp.last_n = 12345;
  cp.accumulators = {{"M_k", (BigInt(3) << 300).str()}};
  EXPECT_EQ(parse_checkpoint(serialize(cp)), cp);
  EXPECT_EQ(fingerprint("abc").size(), 16u);
  EXPECT_NE(fingerprint("abc"), fingerprint("abd"));
}

TEST(Checkpoint, RejectsOtherSchemaAndGarbage) {
  EXPECT_THROW(parse_checkpoint("not json"), CheckpointError);
  EXPECT_THROW(parse_checkpoint(R"({"schema_version": 99, "command": "x", "fingerprint": "0",
                                    "last_n": 1, "accumulators": []})"),
               CheckpointError);
}

TEST_F(TempDir, CheckpointSaveLoad) {
  const auto path = dir_ / "cp.json";
  EXPECT_FALSE(load_checkpoint(path).has_value());
  Checkpoint cp;
  cp.command = "sandwich";
  cp.fingerprint = fingerprint("q");
  cp.last_n = 9;
  save_checkpoint(path, cp);
  EXPECT_EQ(load_checkpoint(path).value(), cp);
}

TEST(Cli, TermsMatchOracle) {
  const Result r = invoke({"terms", "--range", "1:10"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto rows = lines(r.out);
  ASSERT_EQ(rows.size(), 11u);
  EXPECT_EQ(rows[0], "n,p,f,y,a,side");
  for (std::uint64_t n = 1; n <= 10; ++n) {
    const auto [y, a] = oracle::nearest_square(n);
    const BigInt p = oracle::pyramidal(n);
    const std::string side = y * y <= p ? "below" : "above";
    EXPECT_EQ(rows[n], std::to_string(n) + "," + p.str() + "," + oracle::gmp_sqrt(p).str() + "," +
                           y.str() + "," + a.str() + "," + side);
  }
}

TEST(Cli, MomentsGoldenRow) {
  const Result r = invoke({"moments", "--x", "10000", "--k", "1"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto rows = lines(r.out);
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[0], "x,k,exact,main,residual,normalized");
  EXPECT_EQ(rows[1],
            "10000,1,1154390467,1154700538.379251529018297561,"
            "-310071.379251529018297561003915,-6.68028535845526582143486312696e-05");
}

TEST(Cli, OptimizeReportsExponents) {
  const Result r = invoke({"optimize", "--exponent", "F=x:5/2,K:-1/2;G=x:19/8,K:1/4", "--var", "K"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out.front(), '[');
  EXPECT_NE(r.out.find("\"argmin_exponent\": \"1/6\""), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("\"value_exponent\": \"29/12\""), std::string::npos) << r.out;
}

TEST(Cli, OptimizeChainEndsAtErrorExponent) {
  const Result r = invoke({"optimize", "--chain", "--k", "3", "--format", "csv"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto rows = lines(r.out);
  ASSERT_EQ(rows.size(), 4u);
  EXPECT_EQ(rows[3].rfind("3,K,x:1/6,1/6,x:65/12,65/12,", 0), 0u) << rows[3];
}

TEST(Cli, UsageErrorsNameTheFlag) {
  const std::vector<std::pair<std::vector<std::string>, std::string>> cases = {
      {{"sandwich", "--x", "10", "--L", "7"}, "--L"},
      {{"moments", "--x", "10", "--workers", "0"}, "--workers"},
      {{"moments", "--x", "10", "--k", "13"}, "--k"},
      {{"terms", "--range", "5"}, "--range"},
      {{"terms", "--range", "9:3"}, "--range"},
      {{"histogram", "--x", "10", "--bins", "1"}, "--bins"},
      {{"moments"}, "--x"},
      {{"weyl", "--x", "10", "--bits", "200"}, "--bits"},
      {{"moments", "--x", "10", "--format", "xml"}, "--format"},
  };
  for (const auto& [args, flag] : cases) {
    const Result r = invoke(args);
    EXPECT_EQ(r.code, kExitUsage) << args[0];
    EXPECT_NE(r.err.find(flag), std::string::npos) << r.err;
  }
}

TEST(Cli, BadExponentSpecIsAUsageError) {
  const Result r = invoke({"optimize", "--exponent", "F=x:1;H=x:2"});
  EXPECT_EQ(r.code, kExitUsage);
  EXPECT_NE(r.err.find("--exponent"), std::string::npos) << r.err;
}

TEST(Cli, EveryCommandIsIndependentOfWorkers) {
  const std::vector<std::vector<std::string>> commands = {
      {"terms", "--range", "1:3000"},
      {"moments", "--x", "150000", "--k", "2"},
      {"average", "--x", "150000"},
      {"sandwich", "--x", "150000", "--k", "2", "--L", "20"},
      {"discrepancy", "--x", "150000", "--K", "5,20"},
      {"weyl", "--x", "150000", "--m-max", "3"},
      {"knbound", "--range", "1:150000", "--m-max", "3"},
      {"exceptional", "--x", "150000"},
      {"nearhalf", "--x", "150000"},
      {"histogram", "--x", "150000", "--bins", "10"},
      {"fit", "--xs", "1000,10000,100000,150000"},
  };
  for (auto args : commands) {
    auto one = args;
    one.insert(one.end(), {"--workers", "1"});
    auto eight = args;
    eight.insert(eight.end(), {"--workers", "8", "--chunk", "4099"});
    const Result a = invoke(one);
    const Result b = invoke(eight);
    ASSERT_EQ(a.code, 0) << args[0] << ": " << a.err;
    EXPECT_EQ(a.out, b.out) << args[0];
  }
}

TEST(Cli, WorkersFromEnvironment) {
  ::setenv("CANNONBALL_WORKERS", "0", 1);
  const Result r = invoke({"moments", "--x", "10"});
  ::unsetenv("CANNONBALL_WORKERS");
  EXPECT_EQ(r.code, kExitUsage);
}

TEST_F(TempDir, OutFileMatchesStdout) {
  const Result a = invoke({"sandwich", "--x", "1000", "--format", "json"});
  const auto path = dir_ / "s.json";
  const Result b = invoke({"sandwich", "--x", "1000", "--format", "json", "--out", path.string()});
  ASSERT_EQ(b.code, 0) << b.err;
  EXPECT_TRUE(b.out.empty());
  EXPECT_EQ(slurp(path), a.out);
}

TEST_F(TempDir, UnwritableOutIsIoExit) {
  const Result r = invoke({"moments", "--x", "10", "--out", (dir_ / "no" / "such" / "f").string()});
  EXPECT_EQ(r.code, kExitIo);
}

TEST_F(TempDir, HaltAndResumeIsByteIdentical) {
  for (const std::string cmd : {"moments", "average", "sandwich"}) {
    const std::vector<std::string> base = {cmd, "--x", "200000", "--k", "2"};
    auto args = cmd == "average" ? std::vector<std::string>{cmd, "--x", "200000"} : base;
    const Result full = invoke(args);
    ASSERT_EQ(full.code, 0) << full.err;
    const auto cp = (dir_ / (cmd + ".ckpt")).string();
    auto ck = args;
    ck.insert(ck.end(), {"--checkpoint", cp, "--checkpoint-every", "30000"});
    for (std::uint64_t stop : {30000ull, 90000ull, 180000ull}) {
      auto halted = ck;
      halted.insert(halted.end(), {"--halt-after", std::to_string(stop), "--workers", "3"});
      const Result h = invoke(halted);
      EXPECT_EQ(h.code, kExitHalted) << h.err;
      EXPECT_TRUE(h.out.empty());
    }
    const Result resumed = invoke(ck);
    ASSERT_EQ(resumed.code, 0) << resumed.err;
    EXPECT_EQ(resumed.out, full.out) << cmd;
  }
}

TEST_F(TempDir, MismatchedCheckpointIsRefused) {
  const auto cp = (dir_ / "m.ckpt").string();
  const Result h = invoke({"moments", "--x", "100000", "--k", "1", "--checkpoint", cp,
                           "--checkpoint-every", "10000", "--halt-after", "10000"});
  ASSERT_EQ(h.code, kExitHalted) << h.err;
  const Result r = invoke({"moments", "--x", "100000", "--k", "2", "--checkpoint", cp});
  EXPECT_EQ(r.code, kExitCheckpoint);
  EXPECT_NE(r.err.find("refusing"), std::string::npos) << r.err;
  const Result other = invoke({"sandwich", "--x", "100000", "--checkpoint", cp});
  EXPECT_EQ(other.code, kExitCheckpoint);
}

TEST_F(TempDir, CheckpointDirectoryFromEnvironment) {
  ::setenv("CANNONBALL_CHECKPOINT_DIR", dir_.c_str(), 1);
  const Result r = invoke({"moments", "--x", "5000", "--checkpoint", "rel.ckpt",
                           "--checkpoint-every", "1000", "--halt-after", "1000"});
  ::unsetenv("CANNONBALL_CHECKPOINT_DIR");
  EXPECT_EQ(r.code, kExitHalted);
  EXPECT_TRUE(std::filesystem::exists(dir_ / "rel.ckpt"));
}

TEST(Cli, CheckpointOnlyForReductions) {
  const Result r = invoke({"nearhalf", "--x", "10"});
  EXPECT_EQ(r.code, 0);
  // nearhalf does not even accept the flag.
  EXPECT_EQ(invoke({"nearhalf", "--x", "10", "--checkpoint", "x"}).code, kExitUsage);
}
