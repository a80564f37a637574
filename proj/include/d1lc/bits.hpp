#pragma once

#include <boost/container/small_vector.hpp>

#include <cstdint>
#include <string>

namespace d1lc {

// Growable little-endian bit string: bit i lives in word i/64 at position i%64.
class BitString {
public:
    BitString() = default;
    explicit BitString(std::size_t nbits) { resize(nbits); }

    std::size_t size() const { return size_; }
    bool empty() const { return size_ == 0; }

    void resize(std::size_t nbits);
    void clear() { words_.clear(); size_ = 0; }

    bool bit(std::size_t i) const { return (words_[i >> 6] >> (i & 63)) & 1u; }
    void set_bit(std::size_t i, bool v = true);

    // Appends the low `width` bits of `value` (width <= 64).
    void push(std::uint64_t value, int width);
    void push_bit(bool v) { push(v ? 1 : 0, 1); }
    void append(const BitString& other);
    void pad_to_byte();

    // Reads `width` bits starting at `pos`.
    std::uint64_t get(std::size_t pos, int width) const;

    std::size_t popcount() const;
    std::size_t and_popcount(const BitString& other) const;

    const std::uint64_t* data() const { return words_.data(); }
    std::uint64_t* data() { return words_.data(); }
    std::size_t word_count() const { return words_.size(); }

    bool operator==(const BitString& o) const;
    std::string to_string() const;

private:
    boost::container::small_vector<std::uint64_t, 2> words_;
    std::size_t size_ = 0;
};

class BitReader {
public:
    explicit BitReader(const BitString& s) : s_(s) {}
    std::uint64_t read(int width);
    bool read_bit() { return read(1) != 0; }
    std::size_t position() const { return pos_; }
    std::size_t remaining() const { return s_.size() - pos_; }

private:
    const BitString& s_;
    std::size_t pos_ = 0;
};

}  // namespace d1lc
