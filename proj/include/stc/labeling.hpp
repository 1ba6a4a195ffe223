#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <vector>

namespace stc {

// A partition of N samples into k clusters; labels[i] is in [0, k).
struct Labeling {
  std::vector<int> labels;
  int k = 0;

  Labeling() = default;
  // Validates k >= 2 and the label range.
  Labeling(std::vector<int> labels, int k);

  int size() const { return static_cast<int>(labels.size()); }
  int operator[](int i) const { return labels[static_cast<std::size_t>(i)]; }
  // Size of every cluster 0..k-1 (absent clusters count 0).
  std::vector<int> cluster_sizes() const;

  friend bool operator==(const Labeling&, const Labeling&) = default;
};

// TSV "id<TAB>label", no header, ids 0..N-1 in order.
void save_labeling(const Labeling& labeling, const std::filesystem::path& path);
// k defaults to max label + 1 (at least 2).
Labeling load_labeling(const std::filesystem::path& path, std::optional<int> k = std::nullopt);

}  // namespace stc
