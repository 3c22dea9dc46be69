#pragma once

#include <cstdint>
#include <cstring>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace microcash {

//! Canonical byte encoding used for everything that is hashed or signed.
//! All integers are big-endian; doubles travel as their IEEE-754 bit pattern.
class ByteWriter {
public:
    void u8(std::uint8_t v) { buf_.push_back(v); }

    void u16be(std::uint16_t v) {
        buf_.push_back(static_cast<std::uint8_t>(v >> 8));
        buf_.push_back(static_cast<std::uint8_t>(v));
    }

    void u64be(std::uint64_t v) {
        for (int shift = 56; shift >= 0; shift -= 8)
            buf_.push_back(static_cast<std::uint8_t>(v >> shift));
    }

    void i64be(std::int64_t v) { u64be(static_cast<std::uint64_t>(v)); }

    void f64bits(double v) {
        std::uint64_t bits;
        std::memcpy(&bits, &v, sizeof(bits));
        u64be(bits);
    }

    void raw(std::span<const std::uint8_t> data) {
        buf_.insert(buf_.end(), data.begin(), data.end());
    }

    const std::vector<std::uint8_t>& bytes() const { return buf_; }
    std::vector<std::uint8_t> take() { return std::move(buf_); }

private:
    std::vector<std::uint8_t> buf_;
};

class ByteReader {
public:
    explicit ByteReader(std::span<const std::uint8_t> data) : data_(data) {}

    std::optional<std::uint8_t> u8() {
        if (pos_ + 1 > data_.size()) return std::nullopt;
        return data_[pos_++];
    }

    std::optional<std::uint16_t> u16be() {
        if (pos_ + 2 > data_.size()) return std::nullopt;
        std::uint16_t v = static_cast<std::uint16_t>(data_[pos_] << 8 | data_[pos_ + 1]);
        pos_ += 2;
        return v;
    }

    std::optional<std::uint64_t> u64be() {
        if (pos_ + 8 > data_.size()) return std::nullopt;
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v = v << 8 | data_[pos_ + i];
        pos_ += 8;
        return v;
    }

    std::optional<std::int64_t> i64be() {
        auto v = u64be();
        if (!v) return std::nullopt;
        return static_cast<std::int64_t>(*v);
    }

    std::optional<double> f64bits() {
        auto bits = u64be();
        if (!bits) return std::nullopt;
        double v;
        std::memcpy(&v, &*bits, sizeof(v));
        return v;
    }

    bool raw(std::span<std::uint8_t> out) {
        if (pos_ + out.size() > data_.size()) return false;
        std::memcpy(out.data(), data_.data() + pos_, out.size());
        pos_ += out.size();
        return true;
    }

    std::size_t remaining() const { return data_.size() - pos_; }
    bool done() const { return pos_ == data_.size(); }

private:
    std::span<const std::uint8_t> data_;
    std::size_t pos_ = 0;
};

std::string to_hex(std::span<const std::uint8_t> data);
std::optional<std::vector<std::uint8_t>> from_hex(const std::string& hex);

}  // namespace microcash
