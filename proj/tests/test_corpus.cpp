#include <fstream>

#include "doctest.h"
#include "stc/corpus.hpp"
#include "stc/error.hpp"
#include "synth.hpp"

using namespace stc;
using stc::testing::TempDir;

namespace {

std::string write(const TempDir& dir, const std::string& name, const std::string& content) {
  const auto path = dir.file(name);
  std::ofstream(path) << content;
  return path;
}

Errc code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an stc::Error");
  return Errc::BadConfig;
}

}  // namespace

TEST_CASE("gold labels are densified in order of first appearance") {
  TempDir dir;
  const auto path = write(dir, "c.tsv", "0\t2\ta b\n1\t2\tc\n2\t5\td\n3\t5\te f\n");
  const Corpus c = load_corpus(path);
  CHECK(c.size() == 4);
  CHECK(c.k() == 2);
  CHECK(c.gold_labels() == std::vector<int>{0, 0, 1, 1});

  // First appearance is file order, not label order.
  const auto path2 = write(dir, "c2.tsv", "0\t9\ta\n1\t3\tb\n2\t9\tc\n");
  CHECK(load_corpus(path2).gold_labels() == std::vector<int>{0, 1, 0});
}

TEST_CASE("records may appear out of id order") {
  TempDir dir;
  const Corpus c = load_corpus(write(dir, "c.tsv", "1\t0\tsecond\n0\t1\tfirst\n"));
  CHECK(c[0].text == "first");
  CHECK(c[1].text == "second");
  // Densified in file order: raw 0 (id 1) comes first.
  CHECK(c.gold_labels() == std::vector<int>{1, 0});
}

TEST_CASE("text keeps embedded tabs after the second field") {
  TempDir dir;
  const Corpus c = load_corpus(write(dir, "c.tsv", "0\t-1\ta\tb\n1\t-1\tc\n"), 2);
  CHECK(c[0].text == "a\tb");
  CHECK_FALSE(c.has_gold());
  CHECK(c.k() == 2);
}

TEST_CASE("corpus validation errors") {
  TempDir dir;
  CHECK(code_of([&] { load_corpus(write(dir, "dup.tsv", "0\t0\ta\n3\t1\tb\n3\t1\tc\n")); }) == Errc::DuplicateId);
  CHECK(code_of([&] { load_corpus(write(dir, "gap.tsv", "0\t0\ta\n2\t1\tb\n")); }) == Errc::NonContiguousIds);
  CHECK(code_of([&] { load_corpus(write(dir, "rag.tsv", "0\t0\ta\n1\t1\n")); }) == Errc::RaggedRow);
  CHECK(code_of([&] { load_corpus(write(dir, "empty.tsv", "0\t0\ta\n1\t1\t   \n")); }) == Errc::EmptyText);
  CHECK(code_of([&] { load_corpus(write(dir, "mixed.tsv", "0\t0\ta\n1\t-1\tb\n")); }) == Errc::MixedGoldLabels);
  CHECK(code_of([&] { load_corpus(write(dir, "one.tsv", "0\t0\ta\n1\t0\tb\n")); }) == Errc::MixedGoldLabels);
  CHECK(code_of([&] { load_corpus(write(dir, "nok.tsv", "0\t-1\ta\n1\t-1\tb\n")); }) == Errc::OutOfRange);
  CHECK(code_of([&] { load_corpus(dir.file("missing.tsv")); }) == Errc::FileNotFound);

  try {
    load_corpus(write(dir, "dup3.tsv", "0\t0\ta\n1\t1\tb\n3\t0\tc\n3\t1\td\n"));
  } catch (const Error& e) {
    CHECK(std::string(e.what()) == "DuplicateId(3)");
  }
}

TEST_CASE("save_corpus then load_corpus is the identity on valid corpora") {
  TempDir dir;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    Rng rng(seed);
    std::vector<int> labels;
    const int n = 5 + static_cast<int>(rng.below(30));
    for (int i = 0; i < n; ++i) labels.push_back(static_cast<int>(rng.below(4)));
    labels[0] = 0;
    labels[1] = 1;  // at least two classes
    const Corpus original = stc::testing::make_corpus(labels);
    save_corpus(original, dir.file("rt.tsv"));
    const Corpus back = load_corpus(dir.file("rt.tsv"));
    REQUIRE(back.size() == original.size());
    CHECK(back.k() == original.k());
    CHECK(back.gold_labels() == original.gold_labels());
    for (int i = 0; i < n; ++i) CHECK(back[i].text == original[i].text);
  }
}

TEST_CASE("embedding loading") {
  TempDir dir;
  const Corpus two = load_corpus(write(dir, "two.tsv", "0\t0\ta\n1\t1\tb\n"));
  const auto x = load_embeddings(write(dir, "ok.emb", "EMB v1 2 3\n0\t1 2 3\n1\t-0.5 0 1e-3\n"), two);
  CHECK(x.n() == 2);
  CHECK(x.d() == 3);
  CHECK(x.data()(1, 2) == doctest::Approx(1e-3));

  const Corpus four = load_corpus(write(dir, "four.tsv", "0\t0\ta\n1\t1\tb\n2\t0\tc\n3\t1\td\n"));
  CHECK(code_of([&] { load_embeddings(write(dir, "n5.emb", "EMB v1 5 1\n0\t1\n1\t1\n2\t1\n3\t1\n4\t1\n"), four); }) ==
        Errc::CountMismatch);
  CHECK(code_of([&] { load_embeddings(write(dir, "short.emb", "EMB v1 2 2\n0\t1 2\n"), two); }) == Errc::CountMismatch);
  CHECK(code_of([&] { load_embeddings(write(dir, "dim.emb", "EMB v1 2 2\n0\t1 2\n1\t1\n"), two); }) ==
        Errc::DimensionMismatch);
  CHECK(code_of([&] { load_embeddings(write(dir, "zero.emb", "EMB v1 2 2\n0\t1 2\n1\t0 0\n"), two); }) == Errc::ZeroRow);
  CHECK(code_of([&] { load_embeddings(write(dir, "hdr.emb", "EMB v2 2 2\n"), two); }) == Errc::BadHeader);
  CHECK(code_of([&] { load_embeddings(write(dir, "ids.emb", "EMB v1 2 1\n1\t1\n0\t1\n"), two); }) == Errc::NonContiguousIds);

  try {
    load_embeddings(write(dir, "nan.emb", "EMB v1 2 2\n0\t1 2\n1\t3 nan\n"), two);
    FAIL("nan accepted");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::NonFinite);
    CHECK(std::string(e.what()) == "NonFinite(1, 1)");
  }
}

TEST_CASE("embedding round trip is exact") {
  TempDir dir;
  const auto blobs = stc::testing::make_blobs(5, 2, 4, 1.0, 3.0, 11);
  save_embeddings(EmbeddingMatrix(blobs.x), dir.file("x.emb"));
  const auto back = load_embeddings(dir.file("x.emb"));
  CHECK(back.data() == blobs.x);
}

TEST_CASE("corpus statistics") {
  const auto docs = [](std::vector<std::string> texts) {
    std::vector<Document> out;
    for (std::size_t i = 0; i < texts.size(); ++i) out.push_back({static_cast<int>(i), static_cast<int>(i % 2), texts[i]});
    return out;
  };
  CHECK(corpus_stats(Corpus(docs({"a b", "c d e f"}), std::nullopt)).m == 3.0);
  CHECK(format_stats(corpus_stats(Corpus(docs({"a b", "c d e f"}), std::nullopt))) == "K=2 N=2 M=3.0");

  std::vector<Document> single{{0, std::nullopt, "hello"}, {1, std::nullopt, "hello"}};
  CHECK(corpus_stats(Corpus(single, 2)).m == 1.0);

  // Token-count oracle: split on any whitespace run.
  const std::string messy = "  leading\tand  trailing \n x ";
  CHECK(count_tokens(messy) == 4);
  CHECK(count_tokens("") == 0);

  // Unrounded internally, rounded for display.
  const auto s = corpus_stats(Corpus(docs({"a", "b c", "d e f"}), std::nullopt));
  CHECK(s.m == doctest::Approx(2.0));
  const auto t = corpus_stats(Corpus(docs({"a", "b", "c d"}), std::nullopt));
  CHECK(t.m == doctest::Approx(4.0 / 3.0).epsilon(1e-15));
  CHECK(format_stats(t) == "K=2 N=3 M=1.3");
}
