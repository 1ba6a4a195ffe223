#pragma once

#include <Eigen/Dense>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace stc {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct Document {
  int id = 0;
  std::optional<int> gold_label;
  std::string text;
};

// A validated set of short texts. Items are stored in id order, so items[i].id == i.
class Corpus {
 public:
  Corpus() = default;
  // Validates ids, texts and gold labels; gold labels are densified to
  // 0..K_gold-1 in order of first appearance (in the given item order).
  // When k is absent it defaults to the number of distinct gold labels.
  Corpus(std::vector<Document> items, std::optional<int> k);

  int size() const { return static_cast<int>(items_.size()); }
  int k() const { return k_; }
  bool has_gold() const { return has_gold_; }
  const std::vector<Document>& items() const { return items_; }
  const Document& operator[](int id) const { return items_[static_cast<std::size_t>(id)]; }
  // Dense gold labels; empty when the corpus is unlabeled.
  std::vector<int> gold_labels() const;
  int gold_classes() const { return gold_classes_; }

 private:
  std::vector<Document> items_;
  int k_ = 0;
  int gold_classes_ = 0;
  bool has_gold_ = false;
};

struct CorpusStats {
  int k = 0;
  int n = 0;
  double m = 0.0;  // mean whitespace tokens per document
};

// N x D row-major matrix; row i belongs to corpus id i.
class EmbeddingMatrix {
 public:
  EmbeddingMatrix() = default;
  // Rejects non-finite entries and all-zero rows.
  explicit EmbeddingMatrix(RowMatrix data);

  int n() const { return static_cast<int>(data_.rows()); }
  int d() const { return static_cast<int>(data_.cols()); }
  const RowMatrix& data() const { return data_; }
  auto row(int i) const { return data_.row(i); }

  // Copy with every row scaled to unit Euclidean norm.
  EmbeddingMatrix normalized() const;

 private:
  RowMatrix data_;
};

Corpus load_corpus(const std::filesystem::path& path, std::optional<int> k = std::nullopt);
void save_corpus(const Corpus& corpus, const std::filesystem::path& path);

EmbeddingMatrix load_embeddings(const std::filesystem::path& path, const Corpus& corpus);
// Without a corpus the row count is taken from the header.
EmbeddingMatrix load_embeddings(const std::filesystem::path& path);
void save_embeddings(const EmbeddingMatrix& x, const std::filesystem::path& path);

int count_tokens(const std::string& text);
CorpusStats corpus_stats(const Corpus& corpus);
// "K=<k> N=<n> M=<m rounded to one decimal>"
std::string format_stats(const CorpusStats& stats);

}  // namespace stc
