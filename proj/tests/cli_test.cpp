#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include <json.hpp>

#include "cli.hpp"

namespace cantm::cli {
namespace {

namespace fs = std::filesystem;

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() / ("cantm_cli_test_" + std::to_string(::getpid()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
    write_corpus(dir_ / "records.jsonl");
  }
  void TearDown() override { fs::remove_all(dir_); }

  static void write_corpus(const fs::path& p) {
    const std::vector<std::pair<std::string, std::vector<std::string>>> classes = {
        {"Vacc", {"vaccine", "injection", "dose", "trial"}},
        {"Consp", {"laboratory", "engineered", "secret", "plot"}},
        {"MedAdv", {"garlic", "lemon", "remedy", "cure"}}};
    const std::vector<std::string> filler = {"people", "claim", "shared", "message", "online", "video", "image"};
    std::mt19937_64 rng(1);
    std::ofstream out(p);
    for (int i = 0; i < 45; ++i) {
      const auto& [cat, words] = classes[i % 3];
      std::string claim;
      for (int k = 0; k < 5; ++k) claim += words[rng() % words.size()] + " " + filler[rng() % filler.size()] + " ";
      nlohmann::ordered_json j = {{"id", "doc" + std::to_string(i)},
                                  {"debunk_date", "2020-04-" + std::string(i % 28 < 9 ? "0" : "") +
                                                      std::to_string(i % 28 + 1)},
                                  {"claim", claim},
                                  {"explanation", "Fact checkers found no evidence."},
                                  {"platform", i % 2 ? "Facebook" : "Twitter, WhatsApp"},
                                  {"media_type", i % 4 ? "Text" : "Image"},
                                  {"category", cat}};
      out << j.dump() << '\n';
    }
  }

  int run_cli(std::vector<std::string> args) {
    out_.str("");
    err_.str("");
    return run(args, out_, err_);
  }

  std::string path(const char* name) const { return (dir_ / name).string(); }

  fs::path dir_;
  std::ostringstream out_, err_;
};

const std::vector<std::string> kFast = {"--epochs", "2", "--batch-size", "16", "--samples", "1"};

std::vector<std::string> concat(std::vector<std::string> a, const std::vector<std::string>& b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

TEST_F(CliTest, UsageErrorsExitOne) {
  EXPECT_EQ(run_cli({}), kExitValidation);
  EXPECT_EQ(run_cli({"frobnicate"}), kExitValidation);
  EXPECT_EQ(run_cli({"ingest", "--input", path("missing.jsonl"), "--out", path("x.jsonl")}), kExitValidation);
  EXPECT_EQ(run_cli({"ingest", "--input", path("records.jsonl")}), kExitValidation);
  EXPECT_EQ(run_cli({"--version"}), kExitOk);
  EXPECT_EQ(run_cli({"--help"}), kExitOk);
}

TEST_F(CliTest, MalformedRecordsExitOne) {
  std::ofstream(dir_ / "bad.jsonl") << "{\"id\":\"a\",\"claim\":\"x\"}\n";
  EXPECT_EQ(run_cli({"ingest", "--input", path("bad.jsonl"), "--out", path("o.jsonl")}), kExitValidation);
  EXPECT_NE(err_.str().find("bad.jsonl:1"), std::string::npos) << err_.str();
}

TEST_F(CliTest, IngestWritesRecordsAndManifest) {
  ASSERT_EQ(run_cli({"--quiet", "ingest", "--input", path("records.jsonl"), "--out", path("clean.jsonl")}), kExitOk)
      << err_.str();
  std::ifstream in(path("clean.jsonl"));
  int lines = 0;
  for (std::string l; std::getline(in, l);) ++lines;
  EXPECT_EQ(lines, 45);
  const auto manifest = nlohmann::json::parse(slurp(dir_ / "clean.jsonl.manifest.json"));
  EXPECT_EQ(manifest.at("command"), "ingest");
  EXPECT_TRUE(manifest.contains("version"));
  EXPECT_TRUE(manifest.contains("args"));
}

TEST_F(CliTest, TrainPredictAndTopics) {
  ASSERT_EQ(run_cli(concat({"--quiet", "--seed", "3", "train", "--data", path("records.jsonl"), "--out",
                            path("model.bin"), "--history", path("history.json")},
                           kFast)),
            kExitOk)
      << err_.str();
  const auto history = nlohmann::json::parse(slurp(dir_ / "history.json"));
  EXPECT_EQ(history.at("epochs").size(), 2u);

  std::ofstream(dir_ / "docs.jsonl") << "{\"id\":\"q1\",\"claim\":\"garlic remedy cure\"}\n"
                                     << "{\"doc_id\":\"q2\",\"text\":\"nothing in vocabulary\"}\n";
  ASSERT_EQ(run_cli({"--quiet", "predict", "--model", path("model.bin"), "--input", path("docs.jsonl"), "--out",
                     path("pred.jsonl")}),
            kExitOk)
      << err_.str();
  std::ifstream in(path("pred.jsonl"));
  std::vector<nlohmann::json> rows;
  for (std::string l; std::getline(in, l);) rows.push_back(nlohmann::json::parse(l));
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[0].at("doc_id"), "q1");
  EXPECT_EQ(rows[1].at("doc_id"), "q2");
  for (const auto& r : rows) {
    ASSERT_TRUE(r.at("category").is_string());
    double sum = 0;
    for (const auto& [k, v] : r.at("distribution").items()) sum += v.get<double>();
    EXPECT_EQ(r.at("distribution").size(), 10u);
    EXPECT_NEAR(sum, 1.0, 1e-9);
  }

  ASSERT_EQ(run_cli({"--quiet", "topics", "--model", path("model.bin"), "-k", "5", "--out", path("topics.json")}),
            kExitOk)
      << err_.str();
  const auto t = nlohmann::json::parse(slurp(dir_ / "topics.json"));
  EXPECT_TRUE(t.contains("latent"));
  EXPECT_EQ(t.at("class_associated").at("topics").size(), 10u);

  // Second stage: M2 on top of the trained M1.
  ASSERT_EQ(run_cli(concat({"--quiet", "train", "--data", path("records.jsonl"), "--mode", "m2_only",
                            "--m1-checkpoint", path("model.bin"), "--out", path("m2.bin")},
                           kFast)),
            kExitOk)
      << err_.str();
}

TEST_F(CliTest, M2OnlyWithoutCheckpointExitsOne) {
  EXPECT_EQ(run_cli(concat({"--quiet", "train", "--data", path("records.jsonl"), "--mode", "m2_only", "--out",
                            path("m2.bin")},
                           kFast)),
            kExitValidation);
}

TEST_F(CliTest, EvaluateIsDeterministicAndReplayable) {
  const auto args = concat({"--seed", "7", "evaluate", "--data", path("records.jsonl"), "--folds", "3", "--out",
                            path("cv.json"), "--confusion", path("confusion.csv")},
                           kFast);
  ASSERT_EQ(run_cli(args), kExitOk) << err_.str();
  EXPECT_NE(out_.str().find("| Acc. | F-1 | Perp."), std::string::npos);
  EXPECT_NE(out_.str().find("CANTM | "), std::string::npos);
  const auto first = slurp(dir_ / "cv.json");
  const auto confusion = slurp(dir_ / "confusion.csv");
  EXPECT_EQ(confusion.substr(0, 10), "predicted,");
  const auto cv = nlohmann::json::parse(first);
  EXPECT_EQ(cv.at("k"), 3);
  EXPECT_EQ(cv.at("std_convention"), "sample");

  ASSERT_EQ(run_cli(args), kExitOk);
  EXPECT_EQ(slurp(dir_ / "cv.json"), first);

  fs::remove(dir_ / "cv.json");
  fs::remove(dir_ / "confusion.csv");
  ASSERT_EQ(run_cli({"--replay", path("cv.json.manifest.json")}), kExitOk) << err_.str();
  EXPECT_EQ(slurp(dir_ / "cv.json"), first);
  EXPECT_EQ(slurp(dir_ / "confusion.csv"), confusion);
}

TEST_F(CliTest, EvaluateNvdmReportsPerplexityOnly) {
  ASSERT_EQ(run_cli(concat({"evaluate", "--data", path("records.jsonl"), "--folds", "2", "--variant", "nvdm",
                            "--out", path("nv.json")},
                           kFast)),
            kExitOk)
      << err_.str();
  EXPECT_NE(out_.str().find("NVDM | n/a | n/a | "), std::string::npos) << out_.str();
}

TEST_F(CliTest, AnalyzeWritesTablesAndPlots) {
  ASSERT_EQ(run_cli({"--quiet", "analyze", "--input", path("records.jsonl"), "--from", "2020-04-01", "--to",
                     "2020-04-30", "--out", path("analysis")}),
            kExitOk)
      << err_.str();
  for (const char* f : {"trend.csv", "trend.svg", "counts.json", "breakdown_media_type_by_category.csv",
                        "breakdown_platform_by_category.svg", "manifest.json"}) {
    EXPECT_TRUE(fs::exists(dir_ / "analysis" / f)) << f;
  }
  EXPECT_EQ(run_cli({"--quiet", "analyze", "--input", path("records.jsonl"), "--from", "April", "--out",
                     path("analysis")}),
            kExitValidation);
  EXPECT_EQ(run_cli({"--quiet", "analyze", "--input", path("records.jsonl"), "--breakdown", "category:category",
                     "--out", path("analysis")}),
            kExitValidation);
}

TEST_F(CliTest, MergeAnnotationsReportsAgreement) {
  std::ofstream a(dir_ / "ann.jsonl");
  const char* rows[] = {
      R"({"doc_id":"doc0","annotator_id":"a","category":"Vacc","confidence":9})",
      R"({"doc_id":"doc0","annotator_id":"b","category":"Vacc","confidence":8})",
      R"({"doc_id":"doc1","annotator_id":"a","category":"Consp","confidence":9})",
      R"({"doc_id":"doc1","annotator_id":"c","category":"MedAdv","confidence":7})",
      R"({"doc_id":"doc2","annotator_id":"b","category":"MedAdv","confidence":2})"};
  for (const char* r : rows) a << r << '\n';
  a.close();
  ASSERT_EQ(run_cli({"--quiet", "merge-annotations", "--annotations", path("ann.jsonl"), "--report",
                     path("report.json"), "--out", path("labels.jsonl")}),
            kExitOk)
      << err_.str();
  const auto report = nlohmann::json::parse(slurp(dir_ / "report.json"));
  EXPECT_TRUE(report.dump().find("kappa") != std::string::npos);
  std::ifstream in(path("labels.jsonl"));
  int n = 0;
  for (std::string l; std::getline(in, l);) ++n;
  EXPECT_EQ(n, 2);  // doc2 falls below the default confidence threshold
}

}  // namespace
}  // namespace cantm::cli
