#pragma once

#include <cstdint>
#include <vector>

namespace specsense {

// Discrete wideband spectrum model: N frequency bins split at fixed boundary
// indices into consecutive subsections, each assigned to one of three usage
// categories:
//   1 - always occupied (e.g. broadcast bands)
//   2 - rarely occupied, and when occupied a whole subsection lights up
//   3 - partially and randomly occupied, bin by bin
//
// Bin and boundary indices are 1-based throughout the public data model and
// in every file format; amplitude vectors are stored 0-based internally
// (values[i] is bin i+1).

// Inclusive 1-based bin range.
struct Subsection {
  int first = 0;
  int last = 0;
  int size() const { return last - first + 1; }
};

struct CategoryPartition {
  int n_bins = 0;
  std::vector<int> boundaries;        // strictly increasing, each < n_bins
  std::vector<Subsection> subsections;
  std::vector<int> category_of;       // per subsection, in {1, 2, 3}

  // bin (1-based) -> index into subsections
  int subsection_of(int bin) const;
  int category_of_bin(int bin) const { return category_of[static_cast<size_t>(subsection_of(bin))]; }

  // All bins of one category, ascending 1-based.
  std::vector<int> category_bins(int category) const;

 private:
  friend CategoryPartition build_partition(int, const std::vector<int>&, const std::vector<int>&);
  std::vector<int> bin_to_subsection_;  // size n_bins + 1, [1..n_bins]
};

struct SpectrumVector {
  std::vector<double> values;  // length N, values[i] is bin i+1

  std::vector<int> support() const;  // 1-based indices of nonzero bins
};

struct AmplitudeRule {
  enum class Kind { kConstant, kUniform };
  Kind kind = Kind::kConstant;
  double low = 1.0;
  double high = 1.0;
};

struct OccupancyRule {
  double s1_fill = 1.0;   // fraction of category-1 bins occupied (scenario default: all)
  double s2_fill = 0.0;   // fraction of category-2 bins occupied, whole subsections first
  double s3_fill = 0.0;   // fraction of category-3 bins occupied, bin by bin
  AmplitudeRule amplitude;
};

// Builds and validates a partition. Subsection k spans (b_{k-1}+1 .. b_k) with
// b_0 = 0 and b_K = n_bins; `categories` has one entry per subsection.
// Throws std::invalid_argument on non-increasing boundaries, boundaries
// >= n_bins, or categories outside {1,2,3}.
CategoryPartition build_partition(int n_bins, const std::vector<int>& boundaries,
                                  const std::vector<int>& categories);

// The built-in 1000-bin benchmark scenario: five 10-bin category-1 subsections,
// 38 category-2 subsections of width 11, and category-3 filling the gaps (each
// maximal leftover run is its own subsection).
CategoryPartition paper_scenario();

// Draws one spectrum realization. Category-1 bins are all occupied when
// s1_fill = 1 (fewer, sampled bin-wise, otherwise). Category 2 is filled a
// whole subsection at a time, in shuffled subsection order, until exactly
// floor(s2_fill * |S2|) bins are occupied; the last subsection may be filled
// partially to hit the count. Category 3 bins are sampled uniformly without
// replacement until floor(s3_fill * |S3|) bins are occupied. Deterministic
// given the seed.
SpectrumVector generate_spectrum(const CategoryPartition& partition, const OccupancyRule& rule,
                                 uint64_t seed);

// |support| / N.
double utilization(const SpectrumVector& f);

}  // namespace specsense
