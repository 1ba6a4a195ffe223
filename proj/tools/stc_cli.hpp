#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>

#include "stc/cluster.hpp"
#include "stc/ecic.hpp"

namespace stc::cli {

enum class Algo { KMeans, Hac, Spectral };
enum class Sparsifier { None, Knn, SimDist };

// Everything one invocation needs; loaded from a JSON file, then overridden
// by command-line flags.
struct RunConfig {
  std::string corpus;
  std::string embeddings;
  std::string initial;  // optional initial labeling for enhance
  std::optional<int> k;

  Algo algo = Algo::KMeans;
  int n_init = 10;
  int kmeans_max_iter = 300;
  bool normalize = false;
  Linkage linkage = Linkage::Average;
  Sparsifier sparsifier = Sparsifier::Knn;

  EcicConfig ecic;
  bool t_max_set = false;
  bool stopping_set = false;

  std::uint64_t seed = 0;
  int threads = 1;
  int runs = 1;
  std::string out;
  std::string report;
};

// Reads the JSON config; unknown keys are rejected.
RunConfig load_run_config(const std::string& path);

// Labeling produced by the configured initial clustering.
Labeling initial_clustering(const RunConfig& cfg, const EmbeddingMatrix& x, int k, std::uint64_t seed);

// Entry point; returns the process exit code (0 ok, 2 input, 3 numeric, 4 worker).
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace stc::cli
