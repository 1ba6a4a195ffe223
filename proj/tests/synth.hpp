// Synthetic fixtures shared by the unit and acceptance suites.
#pragma once

#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "stc/corpus.hpp"
#include "stc/labeling.hpp"
#include "stc/rng.hpp"

namespace stc::testing {

struct Blobs {
  RowMatrix x;
  std::vector<int> labels;
};

// k isotropic Gaussian blobs of per_cluster points each; centers are drawn
// with coordinates ~ N(0, separation^2), points around them ~ N(0, spread^2).
inline Blobs make_blobs(int per_cluster, int k, int d, double spread, double separation, std::uint64_t seed) {
  Rng rng(seed);
  RowMatrix centers(k, d);
  for (int c = 0; c < k; ++c) {
    for (int j = 0; j < d; ++j) centers(c, j) = separation * rng.normal();
  }
  Blobs b;
  b.x.resize(per_cluster * k, d);
  for (int c = 0; c < k; ++c) {
    for (int p = 0; p < per_cluster; ++p) {
      const int i = c * per_cluster + p;
      for (int j = 0; j < d; ++j) b.x(i, j) = centers(c, j) + spread * rng.normal();
      b.labels.push_back(c);
    }
  }
  return b;
}

// Exactly round(fraction * n) distinct samples get a different, uniformly
// chosen label.
inline std::vector<int> corrupt(const std::vector<int>& labels, int k, double fraction, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<int> order(labels.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
  const auto count = static_cast<std::size_t>(std::lround(fraction * static_cast<double>(labels.size())));
  for (std::size_t i = 0; i < count; ++i) {
    std::swap(order[i], order[i + rng.below(order.size() - i)]);
  }
  std::vector<int> out = labels;
  for (std::size_t i = 0; i < count; ++i) {
    const int idx = order[i];
    out[static_cast<std::size_t>(idx)] =
        (labels[static_cast<std::size_t>(idx)] + 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(k - 1)))) % k;
  }
  return out;
}

// Texts carry a per-class keyword so text-based workers can separate classes.
inline Corpus make_corpus(const std::vector<int>& labels, std::optional<int> k = std::nullopt) {
  static const char* kWords[] = {"alpha", "bravo", "charlie", "delta", "echo", "foxtrot", "golf", "hotel"};
  std::vector<Document> docs;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    Document doc;
    doc.id = static_cast<int>(i);
    doc.gold_label = labels[i];
    doc.text = std::string(kWords[labels[i] % 8]) + " item " + std::to_string(i);
    docs.push_back(std::move(doc));
  }
  return Corpus(std::move(docs), k);
}

class TempDir {
 public:
  TempDir() {
    auto base = std::filesystem::temp_directory_path();
    std::random_device rd;
    for (int attempt = 0;; ++attempt) {
      path_ = base / ("stc-test-" + std::to_string(rd()) + "-" + std::to_string(attempt));
      if (std::filesystem::create_directory(path_)) break;
    }
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::string file(const std::string& name) const { return (path_ / name).string(); }

 private:
  std::filesystem::path path_;
};

struct DatasetFiles {
  std::string corpus;
  std::string embeddings;
};

inline DatasetFiles write_dataset(const TempDir& dir, const Blobs& blobs, const std::string& stem = "data") {
  DatasetFiles files{dir.file(stem + ".tsv"), dir.file(stem + ".emb")};
  save_corpus(make_corpus(blobs.labels), files.corpus);
  save_embeddings(EmbeddingMatrix(blobs.x), files.embeddings);
  return files;
}

inline std::string stub(const std::string& name) { return std::string(STC_STUB_DIR) + "/" + name; }

}  // namespace stc::testing
