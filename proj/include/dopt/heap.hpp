#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "dopt/design.hpp"

namespace dopt {

/// Stored gain upper bound for a pair, stamped with the iteration it was computed at.
struct HeapEntry {
  double gain = 0.0;
  std::uint32_t stamp = 0;
  ComparisonId pair;
};

/// Heap order: larger gain first, smaller pair first among equal gains.
inline bool ranks_before(const HeapEntry& a, const HeapEntry& b) {
  if (a.gain != b.gain) return a.gain > b.gain;
  return a.pair < b.pair;
}

/// Array-backed binary max-heap of HeapEntry. Deterministic: the tie rule makes
/// the order total for distinct pairs.
class LazyHeap {
 public:
  LazyHeap() = default;
  /// Bottom-up construction in O(n).
  explicit LazyHeap(std::vector<HeapEntry> items);

  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }

  const HeapEntry& peek() const;
  HeapEntry extract_max();
  void insert(const HeapEntry& entry);
  /// Overwrites the top and restores order with a single sift-down.
  void replace_top(const HeapEntry& entry);
  /// Best entry below the top (the better child of the root). Requires size() >= 2.
  const HeapEntry& peek_second() const;

  /// Exhaustive heap-property check; O(n).
  bool is_heap() const;
  const std::vector<HeapEntry>& entries() const { return entries_; }

 private:
  void sift_down(std::size_t i);
  void sift_up(std::size_t i);

  std::vector<HeapEntry> entries_;
};

LazyHeap heap_build(std::vector<HeapEntry> items);

}  // namespace dopt
