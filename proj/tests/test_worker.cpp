#include <fstream>
#include <set>

#include "bow_features.hpp"
#include "doctest.h"
#include "json.hpp"
#include "stc/classifier.hpp"
#include "stc/error.hpp"
#include "stc/worker.hpp"
#include "synth.hpp"

using namespace stc;

namespace {

ExternalClassifierConfig config_for(const std::string& command, double timeout = 20.0) {
  ExternalClassifierConfig cfg;
  cfg.command = command;
  cfg.timeout_s = timeout;
  return cfg;
}

std::vector<LabeledText> some_train() { return {{0, "alpha one", 2}, {1, "alpha two", 2}, {2, "bravo", 0}}; }
std::vector<UnlabeledText> some_test() { return {{5, "alpha three"}, {3, "bravo two"}, {9, "x"}}; }

Errc failure_code(const std::string& mode, double timeout = 20.0) {
  try {
    ExternalClassifier c(config_for(stc::testing::stub("faulty_worker") + " --mode " + mode, timeout), 3);
    c.train_predict(some_train(), some_test(), 1);
  } catch (const Error& e) {
    CHECK(e.category() == ErrorCategory::Worker);
    return e.code();
  }
  FAIL("worker failure not detected");
  return Errc::BadConfig;
}

}  // namespace

TEST_CASE("majority worker round trip") {
  ExternalClassifier c(config_for(stc::testing::stub("majority_worker")), 3);
  const auto preds = c.train_predict(some_train(), some_test(), 1);
  REQUIRE(preds.size() == 3);
  CHECK(preds[0].id == 5);
  CHECK(preds[1].id == 3);
  CHECK(preds[2].id == 9);
  for (const auto& p : preds) CHECK(p.label == 2);
  c.shutdown();
}

TEST_CASE("worker failures map to distinct errors") {
  CHECK(failure_code("drop") == Errc::IncompleteResponse);
  CHECK(failure_code("exit") == Errc::WorkerExit);
  CHECK(failure_code("error") == Errc::WorkerReported);
  CHECK(failure_code("garbage") == Errc::WorkerMalformed);
  CHECK(failure_code("hang", 0.5) == Errc::WorkerTimeout);
}

TEST_CASE("a missing worker binary is reported") {
  CHECK_THROWS_AS(ExternalClassifier(config_for(stc::testing::stub("no_such_worker")), 2), Error);
}

TEST_CASE("requests carry the documented fields") {
  stc::testing::TempDir dir;
  const auto log = dir.file("requests.jsonl");
  auto cfg = config_for(stc::testing::stub("faulty_worker") + " --mode record --record " + log);
  cfg.reset_weights = false;
  cfg.epochs_per_iteration = 3;
  cfg.learning_rate = 1e-4;
  {
    ExternalClassifier c(cfg, 3);
    c.train_predict(some_train(), some_test(), 1);
    c.train_predict(some_train(), some_test(), 2);
    c.shutdown();
  }
  std::ifstream in(log);
  std::vector<nlohmann::json> msgs;
  for (std::string line; std::getline(in, line);) msgs.push_back(nlohmann::json::parse(line));
  REQUIRE(msgs.size() == 2);
  for (int t = 0; t < 2; ++t) {
    const auto& m = msgs[static_cast<std::size_t>(t)];
    CHECK(m["cmd"] == "train_predict");
    CHECK(m["iteration"] == t + 1);
    CHECK(m["reset_weights"] == false);
    CHECK(m["hyper"]["epochs"] == 3);
    CHECK(m["hyper"]["learning_rate"].get<double>() == 1e-4);
    std::set<int> train_ids, test_ids;
    for (const auto& e : m["train"]) train_ids.insert(e["id"].get<int>());
    for (const auto& e : m["test"]) test_ids.insert(e["id"].get<int>());
    CHECK(train_ids == std::set<int>{0, 1, 2});
    CHECK(test_ids == std::set<int>{3, 5, 9});
    CHECK(m["train"][0]["label"] == 2);
    CHECK(m["train"][0]["text"] == "alpha one");
  }
}

TEST_CASE("hello message") {
  const auto hello = nlohmann::json::parse(make_hello(4));
  CHECK(hello["cmd"] == "hello");
  CHECK(hello["num_classes"] == 4);
}

TEST_CASE("response validation") {
  const auto test = some_test();
  CHECK(parse_predictions(R"({"status":"ok","predictions":[{"id":9,"label":1},{"id":5,"label":0},{"id":3,"label":2}]})", test, 3)[0].label == 0);
  auto code = [&](const std::string& response) {
    try {
      parse_predictions(response, test, 3);
    } catch (const Error& e) {
      return e.code();
    }
    return Errc::BadConfig;
  };
  CHECK(code(R"({"status":"ok","predictions":[{"id":9,"label":1},{"id":5,"label":0}]})") == Errc::IncompleteResponse);
  CHECK(code(R"({"status":"ok","predictions":[{"id":9,"label":1},{"id":5,"label":0},{"id":4,"label":0}]})") == Errc::WorkerMalformed);
  CHECK(code(R"({"status":"ok","predictions":[{"id":9,"label":1},{"id":9,"label":1},{"id":5,"label":0},{"id":3,"label":0}]})") == Errc::WorkerMalformed);
  CHECK(code(R"({"status":"ok","predictions":[{"id":9,"label":3},{"id":5,"label":0},{"id":3,"label":0}]})") == Errc::WorkerMalformed);
  CHECK(code(R"({"status":"ok"})") == Errc::WorkerMalformed);
  CHECK(code(R"({"status":"error","message":"boom"})") == Errc::WorkerReported);
  CHECK(code("[1,2]") == Errc::WorkerMalformed);

  try {
    parse_predictions(R"({"status":"ok","predictions":[{"id":9,"label":1},{"id":5,"label":0}]})", test, 3);
  } catch (const Error& e) {
    CHECK(std::string(e.what()) == "IncompleteResponse: no prediction for id 3");
  }
}

TEST_CASE("bag-of-words worker matches the in-process classifier") {
  const std::vector<LabeledText> train{{0, "red apple", 0}, {1, "green apple", 0}, {2, "blue sky", 1},
                                       {3, "grey sky", 1},  {4, "red car", 2},     {5, "fast car", 2}};
  const std::vector<UnlabeledText> test{{6, "apple pie"}, {7, "sky high"}, {8, "car wash"}, {9, "unknown words"}};
  ExternalClassifier c(config_for(stc::testing::stub("bow_worker")), 3);
  const auto preds = c.train_predict(train, test, 1);
  c.shutdown();

  std::vector<std::string> train_texts, test_texts;
  std::vector<int> y;
  for (const auto& t : train) {
    train_texts.push_back(t.text);
    y.push_back(t.label);
  }
  for (const auto& t : test) test_texts.push_back(t.text);
  const stub::Vocabulary vocab(train_texts);
  const auto expected = mlr_predict(mlr_train(vocab.features(train_texts), y, 3), vocab.features(test_texts));
  REQUIRE(preds.size() == expected.size());
  for (std::size_t i = 0; i < preds.size(); ++i) CHECK(preds[i].label == expected[i]);
  CHECK(preds[0].label == 0);
  CHECK(preds[1].label == 1);
  CHECK(preds[2].label == 2);
}

TEST_CASE("external classifier configuration is validated") {
  auto cfg = config_for("");
  CHECK_THROWS_AS(cfg.validate(), Error);
  cfg = config_for("true");
  cfg.epochs_per_iteration = 0;
  CHECK_THROWS_AS(cfg.validate(), Error);
  cfg = config_for("true");
  cfg.timeout_s = 0;
  CHECK_THROWS_AS(cfg.validate(), Error);
}
