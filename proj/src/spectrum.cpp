#include "specsense/spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "specsense/rng.hpp"

namespace specsense {

int CategoryPartition::subsection_of(int bin) const {
  if (bin < 1 || bin > n_bins) throw std::invalid_argument("bin index out of range: " + std::to_string(bin));
  return bin_to_subsection_[static_cast<size_t>(bin)];
}

std::vector<int> CategoryPartition::category_bins(int category) const {
  std::vector<int> bins;
  for (size_t k = 0; k < subsections.size(); ++k) {
    if (category_of[k] != category) continue;
    for (int b = subsections[k].first; b <= subsections[k].last; ++b) bins.push_back(b);
  }
  return bins;
}

std::vector<int> SpectrumVector::support() const {
  std::vector<int> s;
  for (size_t i = 0; i < values.size(); ++i) {
    if (values[i] != 0.0) s.push_back(static_cast<int>(i) + 1);
  }
  return s;
}

CategoryPartition build_partition(int n_bins, const std::vector<int>& boundaries,
                                  const std::vector<int>& categories) {
  if (n_bins <= 0) throw std::invalid_argument("n_bins must be positive");
  int prev = 0;
  for (int b : boundaries) {
    if (b <= prev) throw std::invalid_argument("boundaries must be strictly increasing");
    if (b >= n_bins) throw std::invalid_argument("boundary " + std::to_string(b) + " must be < n_bins");
    prev = b;
  }
  if (categories.size() != boundaries.size() + 1)
    throw std::invalid_argument("need one category per subsection (len(boundaries)+1)");
  for (int c : categories) {
    if (c < 1 || c > 3) throw std::invalid_argument("category must be 1, 2 or 3");
  }

  CategoryPartition p;
  p.n_bins = n_bins;
  p.boundaries = boundaries;
  p.category_of = categories;
  p.bin_to_subsection_.assign(static_cast<size_t>(n_bins) + 1, -1);
  int first = 1;
  for (size_t k = 0; k <= boundaries.size(); ++k) {
    const int last = k < boundaries.size() ? boundaries[k] : n_bins;
    p.subsections.push_back({first, last});
    for (int b = first; b <= last; ++b) p.bin_to_subsection_[static_cast<size_t>(b)] = static_cast<int>(k);
    first = last + 1;
  }
  return p;
}

CategoryPartition paper_scenario() {
  constexpr int kNBins = 1000;

  // Category-1 subsections (always occupied).
  const std::vector<Subsection> s1 = {{11, 20}, {265, 274}, {276, 285}, {601, 610}, {701, 710}};
  // Category-2 subsections: width-11 blocks starting at 100 + 11(i-1) for
  // i in 1..15 and 18..40 (blocks 16 and 17 give way to the two category-1
  // subsections around bin 275).
  std::vector<Subsection> s2;
  for (int i = 1; i <= 40; ++i) {
    if (i == 16 || i == 17) continue;
    const int first = 100 + 11 * (i - 1);
    s2.push_back({first, first + 10});
  }

  std::vector<std::pair<Subsection, int>> marked;
  for (const auto& u : s1) marked.emplace_back(u, 1);
  for (const auto& u : s2) marked.emplace_back(u, 2);
  std::sort(marked.begin(), marked.end(),
            [](const auto& a, const auto& b) { return a.first.first < b.first.first; });

  // Category 3 is the complement; every maximal leftover run is one subsection.
  std::vector<std::pair<Subsection, int>> all;
  int cursor = 1;
  for (const auto& [u, cat] : marked) {
    if (u.first > cursor) all.push_back({{cursor, u.first - 1}, 3});
    all.push_back({u, cat});
    cursor = u.last + 1;
  }
  if (cursor <= kNBins) all.push_back({{cursor, kNBins}, 3});

  std::vector<int> boundaries;
  std::vector<int> categories;
  for (size_t k = 0; k < all.size(); ++k) {
    if (k + 1 < all.size()) boundaries.push_back(all[k].first.last);
    categories.push_back(all[k].second);
  }
  return build_partition(kNBins, boundaries, categories);
}

namespace {

// Occupies `quota` bins of one category. Category 2 fills shuffled whole
// subsections (the last one partially when the quota is not a multiple of the
// subsection size); categories 1 and 3 sample bins uniformly.
void occupy_category(const CategoryPartition& partition, int category, double fill,
                     bool block_wise, Rng& rng, std::vector<char>& occupied) {
  if (fill < 0.0 || fill > 1.0) throw std::invalid_argument("occupancy fraction must be in [0, 1]");
  const std::vector<int> bins = partition.category_bins(category);
  if (bins.empty()) return;
  int quota = static_cast<int>(std::floor(fill * static_cast<double>(bins.size())));
  if (fill == 1.0) quota = static_cast<int>(bins.size());
  if (quota <= 0) return;

  if (!block_wise) {
    const std::vector<int> picks = sample_without_replacement(static_cast<int>(bins.size()), quota, rng);
    for (int p : picks) occupied[static_cast<size_t>(bins[static_cast<size_t>(p)])] = 1;
    return;
  }

  std::vector<int> block_ids;
  for (size_t k = 0; k < partition.subsections.size(); ++k) {
    if (partition.category_of[k] == category) block_ids.push_back(static_cast<int>(k));
  }
  const std::vector<int> order =
      sample_without_replacement(static_cast<int>(block_ids.size()), static_cast<int>(block_ids.size()), rng);
  for (int o : order) {
    if (quota <= 0) break;
    const Subsection& u = partition.subsections[static_cast<size_t>(block_ids[static_cast<size_t>(o)])];
    if (u.size() <= quota) {
      for (int b = u.first; b <= u.last; ++b) occupied[static_cast<size_t>(b)] = 1;
      quota -= u.size();
    } else {
      const std::vector<int> picks = sample_without_replacement(u.size(), quota, rng);
      for (int p : picks) occupied[static_cast<size_t>(u.first + p)] = 1;
      quota = 0;
    }
  }
}

}  // namespace

SpectrumVector generate_spectrum(const CategoryPartition& partition, const OccupancyRule& rule,
                                 uint64_t seed) {
  Rng rng(seed);
  std::vector<char> occupied(static_cast<size_t>(partition.n_bins) + 1, 0);
  occupy_category(partition, 1, rule.s1_fill, /*block_wise=*/false, rng, occupied);
  occupy_category(partition, 2, rule.s2_fill, /*block_wise=*/true, rng, occupied);
  occupy_category(partition, 3, rule.s3_fill, /*block_wise=*/false, rng, occupied);

  SpectrumVector f;
  f.values.assign(static_cast<size_t>(partition.n_bins), 0.0);
  for (int b = 1; b <= partition.n_bins; ++b) {
    if (!occupied[static_cast<size_t>(b)]) continue;
    double a = rule.amplitude.low;
    if (rule.amplitude.kind == AmplitudeRule::Kind::kUniform)
      a = rng.uniform(rule.amplitude.low, rule.amplitude.high);
    f.values[static_cast<size_t>(b - 1)] = a;
  }
  return f;
}

double utilization(const SpectrumVector& f) {
  if (f.values.empty()) return 0.0;
  size_t nnz = 0;
  for (double v : f.values) nnz += v != 0.0 ? 1 : 0;
  return static_cast<double>(nnz) / static_cast<double>(f.values.size());
}

}  // namespace specsense
