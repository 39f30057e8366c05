#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fmt/format.h>
#include <sstream>

#include "grabit/cli.hpp"
#include "grabit/csv.hpp"
#include "grabit/evaluation.hpp"
#include "grabit/model_io.hpp"
#include "grabit/sigma_select.hpp"
#include "test_util.hpp"

namespace grabit {
namespace {

namespace fs = std::filesystem;

struct Run {
  int code;
  std::string out, err;
};

Run run(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::path(GRABIT_TEST_TMP) / ::testing::UnitTest::GetInstance()->current_test_info()->name();
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  // x1..x3 uniform on (0.1, 2), y = x1 + x2 x3 + noise capped at 2.5, and
  // optionally t = row index as a day count.
  std::string write_data(const std::string& name, std::size_t n, std::uint64_t seed, bool with_time = false) const {
    const Matrix x = testing::random_matrix(n, 3, seed, 0.1, 2.0);
    const auto e = testing::random_vector(n, seed + 1, 0.3);
    std::string csv = with_time ? "x1,x2,x3,y,t\n" : "x1,x2,x3,y\n";
    for (std::size_t r = 0; r < n; ++r) {
      const double y = std::min(x(r, 0) + x(r, 1) * x(r, 2) + e[r], 2.5);
      csv += fmt::format("{},{},{},{}", x(r, 0), x(r, 1), x(r, 2), y);
      csv += with_time ? fmt::format(",{}\n", r) : "\n";
    }
    write_text_file(path(name), csv);
    return path(name);
  }

  fs::path dir_;
};

std::vector<double> column(const std::string& file, const std::string& name) {
  const auto t = read_csv_file(file);
  const auto c = t.column(name);
  std::vector<double> v;
  for (const auto& row : t.rows) v.push_back(std::stod(row[c]));
  return v;
}

TEST_F(Cli, TrainPredictRoundTripIsBitExact) {
  const auto data = write_data("d.csv", 200, 1);
  const auto r = run({"train", "--data", data, "--target", "y", "--model", "grabit", "--upper", "2.5", "--sigma",
                      "0.5", "--trees", "30", "--log-transform", "x2", "--out", path("m.json")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("snapped_to_bounds"), std::string::npos);
  EXPECT_TRUE(fs::exists(path("m.json.report.txt")));
  ASSERT_EQ(run({"predict", "--model", path("m.json"), "--data", data, "--out", path("p.csv"), "--output", "both"}).code,
            0);

  const ModelDocument doc = load_model(path("m.json"));
  Dataset d = table_to_dataset(read_csv_file(data), {"y", ""});
  const auto latent = predict_document(doc, d.features);
  const auto prob = predict_document_prob(doc, d.features);
  EXPECT_EQ(column(path("p.csv"), "latent"), latent);
  EXPECT_EQ(column(path("p.csv"), "prob"), prob);
  for (double p : prob) EXPECT_TRUE(p >= 0.0 && p <= 1.0);
}

TEST_F(Cli, LogOfZeroNamesColumn) {
  write_text_file(path("z.csv"), "income,y\n1,0\n0,1\n2,0.5\n");
  const auto r = run({"train", "--data", path("z.csv"), "--target", "y", "--model", "grabit", "--upper", "1",
                      "--log-transform", "income", "--out", path("m.json")});
  EXPECT_EQ(r.code, kExitNumerical);
  EXPECT_NE(r.err.find("income"), std::string::npos);
}

TEST_F(Cli, SigmaSearchTableMatchesLibrary) {
  const auto data = write_data("d.csv", 120, 3);
  ASSERT_EQ(run({"train", "--data", data, "--target", "y", "--model", "grabit", "--upper", "2.5", "--sigma-search",
                 "--sigma-grid", "0.1,1,10", "--trees", "10", "--out", path("m.json")})
                .code,
            0);
  Dataset d = table_to_dataset(read_csv_file(data), {"y", ""});
  BoostConfig cfg;
  cfg.n_trees = 10;
  cfg.loss = Loss::tobit(CensoringBounds::make(-kInf, 2.5), 1.0);
  SigmaSearchConfig search;
  search.grid = {0.1, 1.0, 10.0};
  const auto sel = select_sigma(d, cfg, search);
  const auto sig = column(path("m.json.sigma.csv"), "sigma");
  const auto ll = column(path("m.json.sigma.csv"), "profile_loglik");
  ASSERT_EQ(sig.size(), 3u);
  for (std::size_t k = 0; k < 3; ++k) {
    EXPECT_EQ(sig[k], sel.trace[k].sigma);
    EXPECT_EQ(ll[k], sel.trace[k].loglik);
  }
  EXPECT_EQ(std::get<BoostedEnsemble>(load_model(path("m.json")).model).loss().sigma(), sel.sigma);
  EXPECT_EQ(run({"train", "--data", data, "--target", "y", "--upper", "2.5", "--sigma-search", "--sigma", "1",
                 "--out", path("x.json")})
                .code,
            kExitUsage);
}

TEST_F(Cli, ProbabilityIsHalfAtTheBound) {
  ModelDocument doc{BoostedEnsemble(Loss::tobit(CensoringBounds::make(-kInf, 3.0), 0.8), 3.0, 0.1, {}, 1), {"x"}, {}};
  save_model(path("m.json"), doc);
  write_text_file(path("d.csv"), "x\n1\n-4\n");
  ASSERT_EQ(run({"predict", "--model", path("m.json"), "--data", path("d.csv"), "--out", path("p.csv"), "--output",
                 "prob"})
                .code,
            0);
  EXPECT_EQ(column(path("p.csv"), "prob"), (std::vector<double>{0.5, 0.5}));
}

TEST_F(Cli, EmptyDataGivesHeaderOnly) {
  const auto data = write_data("d.csv", 50, 5);
  ASSERT_EQ(run({"train", "--data", data, "--target", "y", "--upper", "2.5", "--trees", "5", "--out", path("m.json")})
                .code,
            0);
  write_text_file(path("e.csv"), "x1,x2,x3\n");
  ASSERT_EQ(run({"predict", "--model", path("m.json"), "--data", path("e.csv"), "--out", path("p.csv")}).code, 0);
  const auto t = read_csv_file(path("p.csv"));
  EXPECT_TRUE(t.rows.empty());
  EXPECT_EQ(t.header.front(), "row");
}

TEST_F(Cli, CompareIdenticalScores) {
  write_text_file(path("a.csv"), "score\n0.1\n0.7\n0.3\n0.9\n0.2\n");
  write_text_file(path("l.csv"), "label\n0\n1\n0\n1\n1\n");
  const auto r = run({"compare", "--scores-a", path("a.csv"), "--scores-b", path("a.csv"), "--labels", path("l.csv")});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto t = parse_csv(r.out);
  EXPECT_EQ(t.rows[0][t.column("p_value")], "1");
  EXPECT_EQ(t.rows[0][t.column("z")], "0");
}

TEST_F(Cli, EvaluateConstantAndDelongRow) {
  const auto data = write_data("d.csv", 160, 7, true);
  const auto r = run({"evaluate", "--data", data, "--target", "y", "--time-col", "t", "--models", "constant",
                      "--models", "grabit:upper=2.5,trees=10,sigma=0.5", "--min-train", "100", "--maturity-days", "5",
                      "--label-threshold", "2.5", "--outdir", path("ev")});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto auroc = read_csv_file(path("ev/auroc.csv"));
  EXPECT_EQ(auroc.rows[0][auroc.column("auroc")], "0.5");
  const auto s1 = column(path("ev/scores_m1_constant.csv"), "score");
  const auto s2 = column(path("ev/scores_m2_grabit.csv"), "score");
  const auto lab = column(path("ev/scores_m2_grabit.csv"), "label");
  std::vector<int> labels(lab.begin(), lab.end());
  const auto d = delong_test(s1, s2, labels);
  const auto dl = read_csv_file(path("ev/delong.csv"));
  ASSERT_EQ(dl.rows.size(), 1u);
  EXPECT_EQ(std::stod(dl.rows[0][dl.column("p_value")]), d.p_value);
  EXPECT_EQ(run({"evaluate", "--data", data, "--target", "y", "--time-col", "when", "--models", "constant",
                 "--outdir", path("ev2")})
                .code,
            kExitSchema);
}

TEST_F(Cli, ExplainOutputs) {
  const auto data = write_data("d.csv", 150, 9);
  ASSERT_EQ(run({"train", "--data", data, "--target", "y", "--upper", "2.5", "--trees", "5", "--depth", "0", "--out",
                 path("stump.json")})
                .code,
            0);
  ASSERT_EQ(run({"explain", "--model", path("stump.json"), "--importance", "--outdir", path("imp")}).code, 0);
  for (double v : column(path("imp/importance.csv"), "importance")) EXPECT_EQ(v, 0.0);

  ASSERT_EQ(run({"train", "--data", data, "--target", "y", "--upper", "2.5", "--trees", "20", "--out", path("m.json")})
                .code,
            0);
  const auto r = run({"explain", "--model", path("m.json"), "--data", data, "--local", "4", "--var", "x2", "--outdir",
                      path("loc")});
  ASSERT_EQ(r.code, 0) << r.err;
  const ModelDocument doc = load_model(path("m.json"));
  Dataset d = table_to_dataset(read_csv_file(data), {"y", ""});
  const double f = predict_document(doc, d.features)[3];
  const auto pred = column(path("loc/local.csv"), "prediction");
  const auto mark = column(path("loc/local.csv"), "is_observation");
  const auto at = static_cast<std::size_t>(std::find(mark.begin(), mark.end(), 1.0) - mark.begin());
  EXPECT_EQ(pred[at], f);
  EXPECT_TRUE(fs::exists(path("loc/local_importance.csv")));
  EXPECT_TRUE(fs::exists(path("loc/local.svg")));

  ASSERT_EQ(run({"explain", "--model", path("stump.json"), "--data", data, "--pd", "x1", "--outdir", path("pd")}).code,
            0);
  const auto pd = column(path("pd/pd.csv"), "partial_dependence");
  for (double v : pd) EXPECT_EQ(v, pd[0]);
  EXPECT_EQ(run({"explain", "--model", path("m.json"), "--outdir", path("x")}).code, kExitUsage);
}

TEST_F(Cli, ExitCodes) {
  const auto data = write_data("d.csv", 40, 11);
  EXPECT_EQ(run({}).code, kExitUsage);
  EXPECT_EQ(run({"train"}).code, kExitUsage);
  EXPECT_EQ(run({"bogus"}).code, kExitUsage);
  EXPECT_EQ(run({"--help"}).code, kExitOk);
  EXPECT_EQ(run({"train", "--data", path("none.csv"), "--target", "y", "--upper", "1", "--out", path("m.json")}).code,
            kExitIo);
  write_text_file(path("bad.csv"), "x,y\n1,2,3\n");
  EXPECT_EQ(run({"train", "--data", path("bad.csv"), "--target", "y", "--upper", "1", "--out", path("m.json")}).code,
            kExitSchema);
  EXPECT_EQ(run({"train", "--data", data, "--target", "y", "--upper", "1", "--out", path("m.json")}).code, kExitBounds);
  EXPECT_EQ(run({"train", "--data", data, "--target", "y", "--out", path("m.json")}).code, kExitUsage);
  EXPECT_EQ(run({"simulate", "--preset", "nope", "--outdir", path("s")}).code, kExitUsage);
  EXPECT_EQ(run({"predict", "--model", data, "--data", data, "--out", path("p.csv")}).code, kExitSchema);
}

TEST_F(Cli, SimulateIsDeterministicAndLegendMatchesCsv) {
  const std::vector<std::string> base{"simulate", "--preset", "corr0.5", "--replications", "2", "--seed", "7",
                                      "--trees", "10,50", "--shrinkage", "0.1", "--depth", "2", "--sigma", "1"};
  auto a = base;
  a.insert(a.end(), {"--outdir", path("a")});
  auto b = base;
  b.insert(b.end(), {"--outdir", path("b")});
  ASSERT_EQ(run(a).code, 0);
  ASSERT_EQ(run(b).code, 0);
  for (const auto& f : {"auroc_summary.csv", "selections.csv", "roc.svg", "roc_band_Grabit.csv", "study_report.txt"}) {
    EXPECT_EQ(read_text_file(path(std::string("a/") + f)), read_text_file(path(std::string("b/") + f))) << f;
  }
  const auto summary = read_csv_file(path("a/auroc_summary.csv"));
  const std::string svg = read_text_file(path("a/roc.svg"));
  ASSERT_EQ(summary.rows.size(), 4u);
  for (const auto& row : summary.rows) {
    const std::string legend = fmt::format("{}: AUROC {} [{}, {}]", row[0], row[1], row[2], row[3]);
    EXPECT_NE(svg.find(legend), std::string::npos) << legend;
  }
}

}  // namespace
}  // namespace grabit
