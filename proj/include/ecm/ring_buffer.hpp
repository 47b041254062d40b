#pragma once

#include <cassert>
#include <cstddef>
#include <vector>

namespace ecm {

// Fixed-capacity FIFO over a contiguous array. Index 0 is the oldest element.
// Used for the per-level bucket groups, which never exceed a known bound.
template <typename T>
class RingBuffer {
 public:
  RingBuffer() = default;
  explicit RingBuffer(std::size_t capacity) : slots_(capacity) {}

  std::size_t size() const { return size_; }
  std::size_t capacity() const { return slots_.size(); }
  bool empty() const { return size_ == 0; }
  bool full() const { return size_ == slots_.size(); }

  const T& operator[](std::size_t i) const {
    assert(i < size_);
    return slots_[wrap(head_ + i)];
  }
  const T& front() const { return (*this)[0]; }
  const T& back() const { return (*this)[size_ - 1]; }

  void push_back(const T& value) {
    assert(!full());
    slots_[wrap(head_ + size_)] = value;
    ++size_;
  }

  T pop_front() {
    assert(!empty());
    T out = slots_[head_];
    head_ = wrap(head_ + 1);
    --size_;
    return out;
  }

  // Index of the first element for which `pred` is false, assuming the
  // elements are partitioned (pred true for a prefix).
  template <typename Pred>
  std::size_t partition_point(Pred pred) const {
    std::size_t lo = 0;
    std::size_t hi = size_;
    while (lo < hi) {
      std::size_t mid = lo + (hi - lo) / 2;
      if (pred((*this)[mid])) {
        lo = mid + 1;
      } else {
        hi = mid;
      }
    }
    return lo;
  }

  friend bool operator==(const RingBuffer& a, const RingBuffer& b) {
    if (a.size_ != b.size_) return false;
    for (std::size_t i = 0; i < a.size_; ++i) {
      if (!(a[i] == b[i])) return false;
    }
    return true;
  }

 private:
  std::size_t wrap(std::size_t i) const {
    return i >= slots_.size() ? i - slots_.size() : i;
  }

  std::vector<T> slots_;
  std::size_t head_ = 0;
  std::size_t size_ = 0;
};

}  // namespace ecm
