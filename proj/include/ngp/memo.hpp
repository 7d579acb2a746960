#pragma once

#include <map>
#include <mutex>
#include <shared_mutex>

namespace ngp {

// Read-mostly memo: concurrent reads, exclusive insertion. Values are computed
// outside the lock; a racing duplicate computation is harmless because every
// computation here is deterministic.
template <typename Key, typename Value>
class MemoCache {
  public:
    template <typename Fn>
    const Value& get_or_compute(const Key& key, Fn&& fn) {
        {
            std::shared_lock lock(mutex_);
            auto it = map_.find(key);
            if (it != map_.end()) return it->second;
        }
        Value v = fn();
        std::unique_lock lock(mutex_);
        auto [it, inserted] = map_.emplace(key, std::move(v));
        return it->second;
    }

    void clear() {
        std::unique_lock lock(mutex_);
        map_.clear();
    }

  private:
    std::shared_mutex mutex_;
    std::map<Key, Value> map_;
};

}  // namespace ngp
