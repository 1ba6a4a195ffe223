#include "stc/corpus.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <map>
#include <set>
#include <sstream>

#include "stc/error.hpp"

namespace stc {
namespace fs = std::filesystem;

namespace {

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }

bool blank(const std::string& s) {
  for (char c : s) {
    if (!is_space(c)) return false;
  }
  return true;
}

int parse_int(const std::string& field, int line_no, const fs::path& path) {
  int value = 0;
  const char* first = field.data();
  const char* last = field.data() + field.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last) {
    throw Error(Errc::RaggedRow, path.string() + ":" + std::to_string(line_no) +
                                     ": expected integer, got '" + field + "'");
  }
  return value;
}

std::ifstream open_input(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::FileNotFound, "cannot open " + path.string());
  return in;
}

}  // namespace

Corpus::Corpus(std::vector<Document> items, std::optional<int> k) {
  const int n = static_cast<int>(items.size());
  if (n == 0) throw Error(Errc::OutOfRange, "corpus is empty");

  int labeled = 0;
  std::map<int, int> dense;  // raw label -> dense label
  for (auto& doc : items) {
    if (doc.gold_label) {
      ++labeled;
      auto it = dense.find(*doc.gold_label);
      if (it == dense.end()) {
        const int next = static_cast<int>(dense.size());
        dense.emplace(*doc.gold_label, next);
        doc.gold_label = next;
      } else {
        doc.gold_label = it->second;
      }
    }
    if (blank(doc.text)) {
      throw Error(Errc::EmptyText, "empty text for id " + std::to_string(doc.id));
    }
  }
  if (labeled != 0 && labeled != n) {
    throw Error(Errc::MixedGoldLabels,
                std::to_string(labeled) + " of " + std::to_string(n) + " documents carry gold labels");
  }
  has_gold_ = labeled == n;
  gold_classes_ = static_cast<int>(dense.size());
  if (has_gold_ && gold_classes_ < 2) {
    throw Error(Errc::MixedGoldLabels, "gold labels must span at least 2 classes");
  }

  // Duplicates are checked before contiguity so a repeated id is reported as such.
  std::set<int> ids;
  for (const auto& doc : items) {
    if (!ids.insert(doc.id).second) {
      throw Error(Errc::DuplicateId, "DuplicateId(" + std::to_string(doc.id) + ")");
    }
  }

  items_.resize(static_cast<std::size_t>(n));
  for (auto& doc : items) {
    if (doc.id < 0 || doc.id >= n) {
      throw Error(Errc::NonContiguousIds, "id " + std::to_string(doc.id) + " outside 0.." + std::to_string(n - 1));
    }
    items_[static_cast<std::size_t>(doc.id)] = std::move(doc);
  }

  k_ = k.value_or(gold_classes_);
  if (k_ < 2) throw Error(Errc::OutOfRange, "cluster count k must be at least 2 (declare it when the corpus is unlabeled)");
  if (k_ > n) throw Error(Errc::OutOfRange, "cluster count k exceeds corpus size");
}

std::vector<int> Corpus::gold_labels() const {
  std::vector<int> out;
  if (!has_gold_) return out;
  out.reserve(items_.size());
  for (const auto& doc : items_) out.push_back(*doc.gold_label);
  return out;
}

Corpus load_corpus(const fs::path& path, std::optional<int> k) {
  auto in = open_input(path);
  std::vector<Document> items;
  std::vector<int> first_line;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto tab1 = line.find('\t');
    const auto tab2 = tab1 == std::string::npos ? std::string::npos : line.find('\t', tab1 + 1);
    if (tab2 == std::string::npos) {
      throw Error(Errc::RaggedRow, path.string() + ":" + std::to_string(line_no) + ": expected id<TAB>label<TAB>text");
    }
    Document doc;
    doc.id = parse_int(line.substr(0, tab1), line_no, path);
    const int label = parse_int(line.substr(tab1 + 1, tab2 - tab1 - 1), line_no, path);
    if (label < -1) {
      throw Error(Errc::RaggedRow, path.string() + ":" + std::to_string(line_no) + ": negative gold label");
    }
    if (label >= 0) doc.gold_label = label;
    doc.text = line.substr(tab2 + 1);
    items.push_back(std::move(doc));
  }
  return Corpus(std::move(items), k);
}

void save_corpus(const Corpus& corpus, const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(Errc::FileNotFound, "cannot write " + path.string());
  for (const auto& doc : corpus.items()) {
    if (doc.text.find('\n') != std::string::npos) {
      throw Error(Errc::RaggedRow, "text for id " + std::to_string(doc.id) + " contains a newline");
    }
    out << doc.id << '\t' << (doc.gold_label ? *doc.gold_label : -1) << '\t' << doc.text << '\n';
  }
}

EmbeddingMatrix::EmbeddingMatrix(RowMatrix data) : data_(std::move(data)) {
  for (Eigen::Index i = 0; i < data_.rows(); ++i) {
    bool nonzero = false;
    for (Eigen::Index j = 0; j < data_.cols(); ++j) {
      const double v = data_(i, j);
      if (!std::isfinite(v)) {
        throw Error(Errc::NonFinite, "NonFinite(" + std::to_string(i) + ", " + std::to_string(j) + ")");
      }
      nonzero = nonzero || v != 0.0;
    }
    if (!nonzero) throw Error(Errc::ZeroRow, "embedding row " + std::to_string(i) + " is all zeros");
  }
}

EmbeddingMatrix EmbeddingMatrix::normalized() const {
  RowMatrix out = data_;
  out.rowwise().normalize();
  return EmbeddingMatrix(std::move(out));
}

namespace {

EmbeddingMatrix read_embeddings(const fs::path& path, std::optional<int> expected_n) {
  auto in = open_input(path);
  std::string line;
  if (!std::getline(in, line)) throw Error(Errc::BadHeader, path.string() + ": missing header");
  std::istringstream header(line);
  std::string magic, version;
  long long n = -1, d = -1;
  header >> magic >> version >> n >> d;
  if (!header || magic != "EMB" || version != "v1" || n <= 0 || d <= 0) {
    throw Error(Errc::BadHeader, path.string() + ": expected header 'EMB v1 <N> <D>'");
  }
  if (expected_n && n != *expected_n) {
    throw Error(Errc::CountMismatch, "CountMismatch: header declares N=" + std::to_string(n) +
                                        " but corpus has " + std::to_string(*expected_n) + " documents");
  }

  RowMatrix data(n, d);
  long long row = 0;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (row >= n) throw Error(Errc::CountMismatch, "CountMismatch: more than " + std::to_string(n) + " rows");
    const auto tab = line.find('\t');
    if (tab == std::string::npos) {
      throw Error(Errc::RaggedRow, path.string() + ": row " + std::to_string(row) + " lacks id<TAB>");
    }
    const int id = parse_int(line.substr(0, tab), static_cast<int>(row + 2), path);
    if (id != row) {
      throw Error(Errc::NonContiguousIds, "embedding row " + std::to_string(row) + " has id " + std::to_string(id));
    }
    const char* p = line.c_str() + tab + 1;
    long long col = 0;
    while (true) {
      while (*p == ' ' || *p == '\t') ++p;
      if (*p == '\0') break;
      char* end = nullptr;
      const double v = std::strtod(p, &end);
      if (end == p) {
        throw Error(Errc::RaggedRow, "row " + std::to_string(row) + ": unparsable value");
      }
      if (col >= d) {
        throw Error(Errc::DimensionMismatch, "row " + std::to_string(row) + " has more than D=" + std::to_string(d) + " values");
      }
      if (!std::isfinite(v)) {
        throw Error(Errc::NonFinite, "NonFinite(" + std::to_string(row) + ", " + std::to_string(col) + ")");
      }
      data(row, col++) = v;
      p = end;
    }
    if (col != d) {
      throw Error(Errc::DimensionMismatch, "row " + std::to_string(row) + " has " + std::to_string(col) +
                                               " values, expected " + std::to_string(d));
    }
    ++row;
  }
  if (row != n) {
    throw Error(Errc::CountMismatch, "CountMismatch: header declares " + std::to_string(n) + " rows, found " + std::to_string(row));
  }
  return EmbeddingMatrix(std::move(data));
}

}  // namespace

EmbeddingMatrix load_embeddings(const fs::path& path, const Corpus& corpus) {
  return read_embeddings(path, corpus.size());
}

EmbeddingMatrix load_embeddings(const fs::path& path) { return read_embeddings(path, std::nullopt); }

void save_embeddings(const EmbeddingMatrix& x, const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(Errc::FileNotFound, "cannot write " + path.string());
  out << "EMB v1 " << x.n() << ' ' << x.d() << '\n';
  out << std::setprecision(17);
  for (int i = 0; i < x.n(); ++i) {
    out << i << '\t';
    for (int j = 0; j < x.d(); ++j) {
      if (j) out << ' ';
      out << x.data()(i, j);
    }
    out << '\n';
  }
}

int count_tokens(const std::string& text) {
  int count = 0;
  bool in_token = false;
  for (char c : text) {
    const bool space = is_space(c);
    if (!space && !in_token) ++count;
    in_token = !space;
  }
  return count;
}

CorpusStats corpus_stats(const Corpus& corpus) {
  long long tokens = 0;
  for (const auto& doc : corpus.items()) tokens += count_tokens(doc.text);
  return {corpus.k(), corpus.size(), static_cast<double>(tokens) / corpus.size()};
}

std::string format_stats(const CorpusStats& stats) {
  char buf[96];
  std::snprintf(buf, sizeof buf, "K=%d N=%d M=%.1f", stats.k, stats.n, stats.m);
  return buf;
}

}  // namespace stc
