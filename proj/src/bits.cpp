#include "d1lc/bits.hpp"

#include <bit>
#include <stdexcept>

namespace d1lc {

void BitString::resize(std::size_t nbits) {
    words_.resize((nbits + 63) / 64, 0);
    if (nbits < size_ && (nbits & 63) != 0) words_.back() &= (std::uint64_t{1} << (nbits & 63)) - 1;
    size_ = nbits;
}

void BitString::set_bit(std::size_t i, bool v) {
    if (i >= size_) throw std::out_of_range("BitString::set_bit");
    std::uint64_t m = std::uint64_t{1} << (i & 63);
    if (v) words_[i >> 6] |= m;
    else words_[i >> 6] &= ~m;
}

void BitString::push(std::uint64_t value, int width) {
    if (width < 0 || width > 64) throw std::invalid_argument("BitString::push width");
    if (width == 0) return;
    if (width < 64) value &= (std::uint64_t{1} << width) - 1;
    std::size_t pos = size_;
    resize(size_ + static_cast<std::size_t>(width));
    std::size_t w = pos >> 6;
    int off = static_cast<int>(pos & 63);
    words_[w] |= value << off;
    if (off != 0 && off + width > 64) words_[w + 1] |= value >> (64 - off);
}

void BitString::append(const BitString& other) {
    std::size_t full = other.size_ / 64;
    for (std::size_t i = 0; i < full; ++i) push(other.words_[i], 64);
    int rest = static_cast<int>(other.size_ & 63);
    if (rest) push(other.words_[full], rest);
}

void BitString::pad_to_byte() {
    if (size_ % 8) resize(size_ + (8 - size_ % 8));
}

std::uint64_t BitString::get(std::size_t pos, int width) const {
    if (width == 0) return 0;
    if (width < 0 || width > 64 || pos + static_cast<std::size_t>(width) > size_)
        throw std::out_of_range("BitString::get");
    std::size_t w = pos >> 6;
    int off = static_cast<int>(pos & 63);
    std::uint64_t v = words_[w] >> off;
    if (off != 0 && off + width > 64) v |= words_[w + 1] << (64 - off);
    if (width < 64) v &= (std::uint64_t{1} << width) - 1;
    return v;
}

std::size_t BitString::popcount() const {
    std::size_t c = 0;
    for (auto w : words_) c += static_cast<std::size_t>(std::popcount(w));
    return c;
}

std::size_t BitString::and_popcount(const BitString& other) const {
    std::size_t n = std::min(words_.size(), other.words_.size());
    std::size_t c = 0;
    for (std::size_t i = 0; i < n; ++i) c += static_cast<std::size_t>(std::popcount(words_[i] & other.words_[i]));
    return c;
}

bool BitString::operator==(const BitString& o) const {
    if (size_ != o.size_) return false;
    for (std::size_t i = 0; i < words_.size(); ++i)
        if (words_[i] != o.words_[i]) return false;
    return true;
}

std::string BitString::to_string() const {
    std::string s(size_, '0');
    for (std::size_t i = 0; i < size_; ++i)
        if (bit(i)) s[i] = '1';
    return s;
}

std::uint64_t BitReader::read(int width) {
    std::uint64_t v = s_.get(pos_, width);
    pos_ += static_cast<std::size_t>(width);
    return v;
}

}  // namespace d1lc
