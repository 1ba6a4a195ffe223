#include "stc/labeling.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <string>

#include "stc/error.hpp"

namespace stc {

Labeling::Labeling(std::vector<int> labels_in, int k_in) : labels(std::move(labels_in)), k(k_in) {
  if (k < 2) throw Error(Errc::OutOfRange, "labeling needs k >= 2, got " + std::to_string(k));
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] < 0 || labels[i] >= k) {
      throw Error(Errc::OutOfRange, "label " + std::to_string(labels[i]) + " of sample " + std::to_string(i) +
                                        " outside [0, " + std::to_string(k) + ")");
    }
  }
}

std::vector<int> Labeling::cluster_sizes() const {
  std::vector<int> sizes(static_cast<std::size_t>(k), 0);
  for (int l : labels) ++sizes[static_cast<std::size_t>(l)];
  return sizes;
}

void save_labeling(const Labeling& labeling, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(Errc::FileNotFound, "cannot write " + path.string());
  for (int i = 0; i < labeling.size(); ++i) out << i << '\t' << labeling[i] << '\n';
}

Labeling load_labeling(const std::filesystem::path& path, std::optional<int> k) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::FileNotFound, "cannot open " + path.string());
  std::vector<int> labels;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::istringstream fields(line);
    long long id = -1, label = -1;
    std::string extra;
    if (!(fields >> id >> label) || (fields >> extra)) {
      throw Error(Errc::RaggedRow, path.string() + ": expected id<TAB>label, got '" + line + "'");
    }
    if (id != static_cast<long long>(labels.size())) {
      throw Error(Errc::NonContiguousIds, path.string() + ": expected id " + std::to_string(labels.size()) +
                                              ", got " + std::to_string(id));
    }
    if (label < 0 || label > 1'000'000'000) throw Error(Errc::OutOfRange, path.string() + ": bad label " + std::to_string(label));
    labels.push_back(static_cast<int>(label));
  }
  if (labels.empty()) throw Error(Errc::CountMismatch, path.string() + ": no labels");
  const int max_label = *std::max_element(labels.begin(), labels.end());
  return Labeling(std::move(labels), k.value_or(std::max(2, max_label + 1)));
}

}  // namespace stc
