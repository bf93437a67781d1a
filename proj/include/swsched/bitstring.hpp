#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace swsched {

/// Binary assignment over the model variables. Variable p maps to bit p of
/// the basis-state index (qubit p of the statevector), and to character p of
/// the textual form, so "110" sets variables 0 and 1.
class Bitstring {
 public:
  Bitstring() = default;
  explicit Bitstring(std::size_t size) : bits_(size, 0) {}
  explicit Bitstring(std::vector<std::uint8_t> bits);

  static Bitstring from_index(std::uint64_t index, std::size_t size);
  static Bitstring parse(std::string_view text);

  std::size_t size() const { return bits_.size(); }
  bool operator[](std::size_t p) const { return bits_[p] != 0; }
  void set(std::size_t p, bool value) { bits_[p] = value ? 1 : 0; }
  std::size_t count() const;

  std::uint64_t index() const;
  std::string to_string() const;
  const std::vector<std::uint8_t>& bits() const { return bits_; }

  /// Spin form, z_p = +1 for x_p = 0 and -1 for x_p = 1.
  std::vector<int> spins() const;

  friend bool operator==(const Bitstring&, const Bitstring&) = default;

 private:
  std::vector<std::uint8_t> bits_;
};

/// Orders by basis-state index, the convention used for argmin listings.
bool index_less(const Bitstring& a, const Bitstring& b);

}  // namespace swsched
