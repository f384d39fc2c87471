#pragma once

#include <cstddef>
#include <vector>

#include "qid/bitstring.hpp"

namespace qid {

// Shared secret store with a monotone consumption pointer. Bits before the
// pointer have been handed out once and are never returned again.
class SecretPool {
 public:
  SecretPool() = default;
  explicit SecretPool(BitString store) : store_(std::move(store)) {}

  std::size_t pointer() const noexcept { return pointer_; }
  std::size_t size() const noexcept { return store_.size(); }
  std::size_t remaining() const noexcept { return store_.size() - pointer_; }

  // Throws PoolExhausted when fewer than n bits remain.
  BitString consume(std::size_t n);
  // Next n unused bits without advancing the pointer.
  BitString peek(std::size_t n) const;
  // Moves the pointer forward; a target behind the pointer is ignored.
  void advance_to(std::size_t target);
  // Refuel: new secret bits go after everything already stored.
  void append(const BitString& bits) { store_.append(bits); }

  const BitString& store() const noexcept { return store_; }

 private:
  BitString store_;
  std::size_t pointer_ = 0;
};

inline BitString pool_consume(SecretPool& pool, std::size_t n) { return pool.consume(n); }

// Both parties announce their pointer and continue from the higher one.
constexpr std::size_t pointer_sync(std::size_t local, std::size_t remote) noexcept {
  return local > remote ? local : remote;
}

enum class Role { Alice, Bob };

struct Triad {
  BitString is1;
  BitString is2;
  BitString is3;

  std::size_t length() const noexcept { return is1.size(); }
  bool well_formed() const noexcept { return is1.size() == is2.size() && is2.size() == is3.size(); }
};

}  // namespace qid
