#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <utility>

namespace hftp {

/// Fisher-Yates shuffle drawing directly from the 64-bit engine.
template <class T>
void shuffle_in_place(std::span<T> x, std::mt19937_64& rng) {
  for (std::size_t i = x.size(); i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(rng() % i);
    std::swap(x[i - 1], x[j]);
  }
}

}  // namespace hftp
