// Multinomial logistic regression over bag-of-words counts of the raw texts.
#include <set>

#include "bow_features.hpp"
#include "stc/classifier.hpp"
#include "stub_io.hpp"

int main() {
  return stub::serve([](const stub::json& msg) {
    std::vector<std::string> train_texts, test_texts;
    std::vector<int> raw;
    for (const auto& t : msg.at("train")) {
      train_texts.push_back(t.at("text"));
      raw.push_back(t.at("label"));
    }
    for (const auto& t : msg.at("test")) test_texts.push_back(t.at("text"));
    // Compact labels so absent classes do not trip the trainer.
    std::set<int> present(raw.begin(), raw.end());
    std::vector<int> classes(present.begin(), present.end());
    std::vector<int> y;
    for (int label : raw) y.push_back(static_cast<int>(std::lower_bound(classes.begin(), classes.end(), label) - classes.begin()));

    stub::json preds = stub::json::array();
    const stub::Vocabulary vocab(train_texts);
    std::vector<int> predicted(test_texts.size(), classes.front());
    if (classes.size() > 1) {
      const auto model = stc::mlr_train(vocab.features(train_texts), y, static_cast<int>(classes.size()));
      predicted = stc::mlr_predict(model, vocab.features(test_texts));
      for (int& p : predicted) p = classes[static_cast<std::size_t>(p)];
    }
    std::size_t r = 0;
    for (const auto& t : msg.at("test")) preds.push_back({{"id", t.at("id")}, {"label", predicted[r++]}});
    return stub::json{{"status", "ok"}, {"predictions", preds}};
  });
}
