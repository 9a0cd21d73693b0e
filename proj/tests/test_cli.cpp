#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "equicalib/cli.hpp"
#include "json.hpp"

using namespace equicalib;
namespace fs = std::filesystem;

namespace {

struct Result {
  int code = 0;
  std::string out;
  std::string err;
};

Result run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

class Cli : public ::testing::Test {
protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("equicalib_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  [[nodiscard]] std::string path(const std::string& name) const { return (dir_ / name).string(); }

  fs::path dir_;
};

std::string slurp(const std::string& p) {
  std::ifstream f(p, std::ios::binary);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string l;
  while (std::getline(ss, l)) out.push_back(l);
  return out;
}

// value column of a name,value table
double value_of(const std::string& text, const std::string& name) {
  for (const auto& l : lines(text)) {
    if (l.rfind(name + ",", 0) == 0) return std::stod(l.substr(name.size() + 1));
  }
  ADD_FAILURE() << "no row " << name << " in\n" << text;
  return std::nan("");
}

// value field of a label,kind,field,value table
double report_value(const std::string& text, const std::string& label) {
  for (const auto& l : lines(text)) {
    if (l.rfind(label + ",", 0) == 0 && l.find(",value,") != std::string::npos) {
      return std::stod(l.substr(l.rfind(',') + 1));
    }
  }
  ADD_FAILURE() << "no row " << label << " in\n" << text;
  return std::nan("");
}

} // namespace

TEST_F(Cli, GenCircleWritesRecordsAndManifest) {
  const auto r = run({"gen", "circle20", "-o", path("c.jsonl")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(lines(slurp(path("c.jsonl"))).size(), 21u);
  const auto m = nlohmann::json::parse(slurp(path("c.jsonl") + ".manifest.json"));
  EXPECT_EQ(m["version"], kVersion);
  EXPECT_TRUE(m.contains("wall_clock_seconds"));
}

TEST_F(Cli, GenSwissCountContract) {
  const auto r = run({"--seed", "7", "gen", "swiss", "--ratio", "0.5", "--n", "500", "-o", path("s.jsonl")});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto ds = io::load_dataset(path("s.jsonl"));
  EXPECT_EQ(ds.size(), 2000u);
  EXPECT_EQ(ds.seed, 7u);
}

TEST_F(Cli, GenToStdoutIsDeterministic) {
  const auto a = run({"--seed", "3", "gen", "vectorfield:spiral", "--n", "50"});
  const auto b = run({"--seed", "3", "gen", "vectorfield:spiral", "--n", "50"});
  ASSERT_EQ(a.code, 0);
  EXPECT_EQ(a.out, b.out);
  EXPECT_EQ(lines(a.out).size(), 51u);
}

TEST_F(Cli, UsageErrorsExitTwo) {
  const auto bogus = run({"gen", "bogus"});
  EXPECT_EQ(bogus.code, 2);
  EXPECT_NE(bogus.err.find("dataset specs:"), std::string::npos);
  EXPECT_EQ(run({}).code, 2);
  EXPECT_EQ(run({"frobnicate"}).code, 2);
  EXPECT_EQ(run({"example", "--id", "9.9"}).code, 2);
  EXPECT_EQ(run({"bound", "nonsense"}).code, 2);
  EXPECT_EQ(run({"bound", "ece-upper"}).code, 2);
  EXPECT_EQ(run({"--format", "xml", "example", "--id", "4.2"}).code, 2);
}

TEST_F(Cli, DataErrorsExitThree) {
  std::ofstream(path("bad.jsonl")) << "not json\n";
  EXPECT_EQ(run({"analyze", "--data", path("bad.jsonl"), "--group", "reflect-x"}).code, 3);
  EXPECT_EQ(run({"analyze", "--data", path("missing.jsonl"), "--group", "reflect-x"}).code, 3);
  ASSERT_EQ(run({"gen", "circle20", "-o", path("c.jsonl")}).code, 0);
  std::ofstream(path("p.jsonl")) << R"({"format":"equicalib-predictions/1"})" << "\n"
                                 << R"({"label":0,"confidence":0.9})" << "\n";
  EXPECT_EQ(run({"metric", "ece", "--pred", path("p.jsonl"), "--truth", path("c.jsonl")}).code, 3);
}

TEST_F(Cli, MetricEceOfPerfectPredictionsIsZero) {
  ASSERT_EQ(run({"gen", "circle20", "-o", path("c.jsonl")}).code, 0);
  const auto ds = io::load_dataset(path("c.jsonl"));
  io::Predictions p;
  for (int l : *ds.labels) p.classes.push_back({l, 1.0});
  std::ofstream f(path("p.jsonl"));
  io::write_predictions(p, f);
  f.close();
  const auto r = run({"metric", "ece", "--bins", "100", "--pred", path("p.jsonl"), "--truth", path("c.jsonl"), "-o",
                      path("bins.csv")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(value_of(r.out, "ece"), 0.0);
  const auto csv = lines(slurp(path("bins.csv")));
  EXPECT_EQ(csv[0].rfind("# manifest ", 0), 0u);
  EXPECT_EQ(csv[1], "bin,lower,upper,count,mass,accuracy,confidence");
}

TEST_F(Cli, MetricGenceOnCalibratedGaussian) {
  ASSERT_EQ(run({"--seed", "5", "gen", "gaussian", "--n", "100000", "--stratified", "-o", path("g.jsonl")}).code, 0);
  const auto r = run({"metric", "gence", "--fibers", "quantile:10", "--truth", path("g.jsonl")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NEAR(value_of(r.out, "gence"), (std::numbers::pi - 2.0) / 2.0, 0.01);
  EXPECT_NEAR(value_of(r.out, "fibers"), 10.0, 0.0);
}

TEST_F(Cli, MetricBleedAgainstZero) {
  ASSERT_EQ(run({"--seed", "2", "gen", "gaussian", "--n", "4", "--dims", "2", "-o", path("g.jsonl")}).code, 0);
  const auto ds = io::load_dataset(path("g.jsonl"));
  io::Predictions p;
  double expected = 0.0;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    Vector v(2);
    v << 0.5 * (i + 1), 0.25;
    p.regressions.push_back({Vector::Zero(2), v});
    expected += ds.weights[i] * v.squaredNorm();
  }
  std::ofstream f(path("p.jsonl"));
  io::write_predictions(p, f);
  f.close();
  const auto r = run({"metric", "bleed", "--zero-truth", "--pred", path("p.jsonl"), "--truth", path("g.jsonl")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NEAR(value_of(r.out, "bleed"), expected, 1e-12);
}

TEST_F(Cli, ExamplesPrintReports) {
  const auto e42 = run({"example", "--id", "4.2"});
  ASSERT_EQ(e42.code, 0);
  EXPECT_NEAR(report_value(e42.out, "4.2 two fibers"), 0.9, 1e-12);
  EXPECT_NEAR(report_value(e42.out, "4.2 one fiber"), 0.7, 1e-12);
  const auto e44 = run({"example", "--id", "4.4"});
  EXPECT_NEAR(report_value(e44.out, "4.4 lower bound (printed coefficient)"), 0.0009375, 1e-12);
  EXPECT_NEAR(report_value(e44.out, "4.4 lower bound (exact K)"), 2.55e-4, 1e-6);
  EXPECT_NE(e44.out.find("flag,coefficient-discrepancy"), std::string::npos);
  const auto e51 = run({"example", "--id", "5.1", "--s1", "2"});
  EXPECT_NEAR(report_value(e51.out, "5.1 printed form"), 1.0 + std::numbers::pi * std::numbers::pi / 32.0, 1e-12);
  EXPECT_EQ(run({"bound", "example", "--id", "4.3"}).code, 0);
}

TEST_F(Cli, BoundsAndJsonl) {
  const auto h = run({"bound", "hoeffding", "--eps", "0.1", "--delta", "0.05"});
  ASSERT_EQ(h.code, 0);
  EXPECT_EQ(report_value(h.out, "hoeffding"), 185.0);
  const auto j = run({"--format", "jsonl", "bound", "ece-upper", "--density", "truncnorm:0.5,0.1,0,1"});
  ASSERT_EQ(j.code, 0);
  const auto rec = nlohmann::json::parse(lines(j.out).at(0));
  EXPECT_NEAR(rec["value"].get<double>(), 0.58, 0.01);
  const auto g = run({"bound", "gence-upper", "--fiber", "0.5,0,1", "--fiber", "0.5,0.39269908169872414,1"});
  EXPECT_NEAR(report_value(g.out, "gence-upper"), 1.0 + std::numbers::pi * std::numbers::pi / 32.0, 1e-12);
  const auto d = run({"bound", "ece-lower-lipschitz", "--deepsets-n", "24", "--m-prime", "0.25"});
  EXPECT_NEAR(report_value(d.out, "ece-lower-lipschitz"), 0.25 * 0.25 / 2.0 / (std::sqrt(24.0) * 25.0), 1e-15);
}

TEST_F(Cli, AnalyzeWritesOrbitTable) {
  ASSERT_EQ(run({"gen", "perm24", "-o", path("p.jsonl")}).code, 0);
  const auto r = run({"analyze", "--data", path("p.jsonl"), "--group", "symmetric:4", "-o", path("orbits.csv")});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto csv = lines(slurp(path("orbits.csv")));
  EXPECT_EQ(csv[1], "orbit,size,mass,k,kappa,V");
  EXPECT_EQ(csv.size(), 3u);
  const auto m = run({"bound", "m-prime", "--data", path("p.jsonl"), "--group", "symmetric:4"});
  EXPECT_EQ(report_value(m.out, "m-prime"), 0.25);
}

TEST_F(Cli, ExperimentOutputsAreByteIdenticalOnRerun) {
  const std::vector<std::string> vf{"--seed", "4", "--out-dir", path("vf"), "experiment", "vectorfield", "--kind",
                                    "spiral", "--seeds", "1", "--n", "80", "--epochs", "3"};
  ASSERT_EQ(run(vf).code, 0);
  const auto results = slurp(path("vf/vectorfield_spiral_results.csv"));
  const auto angles = slurp(path("vf/vectorfield_spiral_angles.csv"));
  ASSERT_EQ(run(vf).code, 0);
  EXPECT_EQ(slurp(path("vf/vectorfield_spiral_results.csv")), results);
  EXPECT_EQ(slurp(path("vf/vectorfield_spiral_angles.csv")), angles);
  const auto al = lines(angles);
  EXPECT_EQ(al[0].rfind("# manifest ", 0), 0u);
  EXPECT_EQ(al[1], "kind,model,sector,angle_lo,angle_hi,mass,mse,beta_nll");
  EXPECT_EQ(al.size(), 2u + 2u * kAngleSectors);
  EXPECT_TRUE(fs::exists(path("vf/vectorfield_spiral_manifest.json")));

  const std::vector<std::string> sw{"--out-dir", path("sw"), "experiment", "swiss", "--ratios", "0,1", "--seeds",
                                    "1",         "--n-per-arm", "20", "--epochs", "2"};
  ASSERT_EQ(run(sw).code, 0);
  const auto swiss = slurp(path("sw/swiss_results.csv"));
  ASSERT_EQ(run(sw).code, 0);
  EXPECT_EQ(slurp(path("sw/swiss_results.csv")), swiss);
  const auto sl = lines(swiss);
  EXPECT_EQ(sl[1], "ratio,seed,model,acc,ece,lb,ub");
  EXPECT_EQ(sl.size(), 2u + 4u);
}

TEST_F(Cli, TrainingDivergenceExitsFour) {
  const auto r = run({"--out-dir", path("d"), "experiment", "vectorfield", "--seeds", "1", "--n", "40", "--epochs",
                      "5", "--lr", "1e300", "--optimizer", "momentum"});
  EXPECT_EQ(r.code, 4) << r.out << r.err;
}

TEST_F(Cli, BinaryExitCodes) {
  const std::string bin = EQUICALIB_CLI_PATH;
  auto status = [&](const std::string& args) {
    const int s = std::system((bin + " " + args + " > " + path("o.txt") + " 2>&1").c_str());
    return WIFEXITED(s) ? WEXITSTATUS(s) : -1;
  };
  EXPECT_EQ(status("example --id 4.3"), 0);
  EXPECT_EQ(status("gen bogus"), 2);
  EXPECT_NE(slurp(path("o.txt")).find("dataset specs:"), std::string::npos);
  EXPECT_EQ(status("analyze --data " + path("none.jsonl") + " --group reflect-x"), 3);
  EXPECT_EQ(status("--help"), 0);
}
