#include "sic/algo/trajectory.hpp"

#include <algorithm>

namespace sic {

ReplayBuffer::ReplayBuffer(int capacity) : capacity_(capacity) {
  if (capacity < 1) throw ParameterError("ReplayBuffer: capacity must be >= 1");
}

void ReplayBuffer::add(Transition t) {
  if (static_cast<int>(items_.size()) < capacity_) {
    items_.push_back(std::move(t));
  } else {
    items_[static_cast<size_t>(next_)] = std::move(t);
  }
  next_ = (next_ + 1) % capacity_;
  inserted_ += 1;
}

void ReplayBuffer::restore(std::vector<Transition> items, int next, int64_t inserted) {
  if (static_cast<int>(items.size()) > capacity_ || next < 0 || next >= std::max(capacity_, 1))
    throw ParameterError("ReplayBuffer: restore state exceeds capacity");
  items_ = std::move(items);
  next_ = next;
  inserted_ = inserted;
}

std::vector<int> ReplayBuffer::sample_indices(int batch, Rng& rng) const {
  if (batch < 1) throw ParameterError("ReplayBuffer: batch must be >= 1");
  if (size() < batch) throw NotReadyError("ReplayBuffer: not enough transitions for a batch");

  // Floyd's algorithm: a streaming no-replacement sample using one draw per
  // selected element, independent of the buffer size.
  int n = size();
  std::vector<int> out;
  out.reserve(static_cast<size_t>(batch));
  std::vector<bool> chosen(static_cast<size_t>(n), false);
  for (int j = n - batch; j < n; ++j) {
    int t = rng.uniform_int(j + 1);
    if (chosen[static_cast<size_t>(t)]) t = j;
    chosen[static_cast<size_t>(t)] = true;
    out.push_back(t);
  }
  return out;
}

}  // namespace sic
