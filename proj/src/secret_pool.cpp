#include "qid/secret_pool.hpp"

#include <string>

#include "qid/errors.hpp"

namespace qid {

BitString SecretPool::consume(std::size_t n) {
  BitString out = peek(n);
  pointer_ += n;
  return out;
}

BitString SecretPool::peek(std::size_t n) const {
  if (n > remaining())
    throw Error(Errc::PoolExhausted,
                "requested " + std::to_string(n) + " bits, " + std::to_string(remaining()) + " remain");
  return store_.slice(pointer_, n);
}

void SecretPool::advance_to(std::size_t target) {
  if (target > store_.size()) throw Error(Errc::PoolExhausted, "pointer beyond end of pool");
  if (target > pointer_) pointer_ = target;
}

}  // namespace qid
