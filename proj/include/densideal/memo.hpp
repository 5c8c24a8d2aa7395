#pragma once

#include <functional>
#include <mutex>
#include <vector>

namespace densideal {

// Lazily extended prefix of a recursively defined sequence: term i may read
// terms 0..i-1. Shared between copies; callers only ever observe values.
template <class T>
class PrefixMemo {
 public:
  using Step = std::function<T(std::size_t, const std::vector<T>&)>;

  explicit PrefixMemo(Step step) : step_(std::move(step)) {}

  T at(std::size_t i) {
    std::lock_guard<std::mutex> lock(mu_);
    while (values_.size() <= i) values_.push_back(step_(values_.size(), values_));
    return values_[i];
  }

 private:
  Step step_;
  std::mutex mu_;
  std::vector<T> values_;
};

}  // namespace densideal
