#include "dopt/heap.hpp"

#include <utility>

#include "dopt/error.hpp"

namespace dopt {

LazyHeap::LazyHeap(std::vector<HeapEntry> items) : entries_(std::move(items)) {
  for (std::size_t i = entries_.size() / 2; i-- > 0;) sift_down(i);
}

LazyHeap heap_build(std::vector<HeapEntry> items) { return LazyHeap(std::move(items)); }

const HeapEntry& LazyHeap::peek() const {
  if (entries_.empty()) throw Error(Errc::empty_heap, "peek on empty heap");
  return entries_.front();
}

const HeapEntry& LazyHeap::peek_second() const {
  if (entries_.size() < 2) throw Error(Errc::empty_heap, "heap has no second entry");
  if (entries_.size() == 2 || ranks_before(entries_[1], entries_[2])) return entries_[1];
  return entries_[2];
}

HeapEntry LazyHeap::extract_max() {
  if (entries_.empty()) throw Error(Errc::empty_heap, "extract from empty heap");
  HeapEntry top = entries_.front();
  entries_.front() = entries_.back();
  entries_.pop_back();
  if (!entries_.empty()) sift_down(0);
  return top;
}

void LazyHeap::insert(const HeapEntry& entry) {
  entries_.push_back(entry);
  sift_up(entries_.size() - 1);
}

void LazyHeap::replace_top(const HeapEntry& entry) {
  if (entries_.empty()) throw Error(Errc::empty_heap, "replace_top on empty heap");
  entries_.front() = entry;
  sift_down(0);
}

void LazyHeap::sift_down(std::size_t i) {
  const std::size_t n = entries_.size();
  HeapEntry moving = entries_[i];
  while (true) {
    const std::size_t left = 2 * i + 1;
    if (left >= n) break;
    std::size_t best = left;
    if (left + 1 < n && ranks_before(entries_[left + 1], entries_[left])) best = left + 1;
    if (!ranks_before(entries_[best], moving)) break;
    entries_[i] = entries_[best];
    i = best;
  }
  entries_[i] = moving;
}

void LazyHeap::sift_up(std::size_t i) {
  HeapEntry moving = entries_[i];
  while (i > 0) {
    const std::size_t parent = (i - 1) / 2;
    if (!ranks_before(moving, entries_[parent])) break;
    entries_[i] = entries_[parent];
    i = parent;
  }
  entries_[i] = moving;
}

bool LazyHeap::is_heap() const {
  for (std::size_t i = 1; i < entries_.size(); ++i) {
    if (ranks_before(entries_[i], entries_[(i - 1) / 2])) return false;
  }
  return true;
}

}  // namespace dopt
