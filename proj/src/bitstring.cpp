#include "swsched/bitstring.hpp"

#include <algorithm>
#include <stdexcept>

namespace swsched {

Bitstring::Bitstring(std::vector<std::uint8_t> bits) : bits_(std::move(bits)) {
  for (auto& b : bits_) b = b ? 1 : 0;
}

Bitstring Bitstring::from_index(std::uint64_t index, std::size_t size) {
  if (size > 64) throw std::invalid_argument("bitstring wider than 64 bits cannot be built from an index");
  Bitstring out(size);
  for (std::size_t p = 0; p < size; ++p) out.bits_[p] = (index >> p) & 1U;
  return out;
}

Bitstring Bitstring::parse(std::string_view text) {
  Bitstring out;
  out.bits_.reserve(text.size());
  for (char c : text) {
    if (c == '0' || c == '1') {
      out.bits_.push_back(c == '1' ? 1 : 0);
    } else if (c != ' ' && c != '[' && c != ']' && c != ',') {
      throw std::invalid_argument(std::string("invalid bitstring character '") + c + "'");
    }
  }
  return out;
}

std::size_t Bitstring::count() const {
  return static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), std::uint8_t{1}));
}

std::uint64_t Bitstring::index() const {
  if (bits_.size() > 64) throw std::out_of_range("bitstring wider than 64 bits has no index");
  std::uint64_t idx = 0;
  for (std::size_t p = 0; p < bits_.size(); ++p)
    if (bits_[p]) idx |= std::uint64_t{1} << p;
  return idx;
}

std::string Bitstring::to_string() const {
  std::string s(bits_.size(), '0');
  for (std::size_t p = 0; p < bits_.size(); ++p)
    if (bits_[p]) s[p] = '1';
  return s;
}

std::vector<int> Bitstring::spins() const {
  std::vector<int> z(bits_.size());
  for (std::size_t p = 0; p < bits_.size(); ++p) z[p] = bits_[p] ? -1 : 1;
  return z;
}

bool index_less(const Bitstring& a, const Bitstring& b) {
  if (a.size() != b.size()) return a.size() < b.size();
  for (std::size_t p = a.size(); p-- > 0;) {
    if (a[p] != b[p]) return b[p];
  }
  return false;
}

}  // namespace swsched
