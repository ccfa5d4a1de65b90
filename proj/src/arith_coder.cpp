#include "mauc/arith_coder.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "mauc/error.hpp"

namespace mauc {

namespace {

using u128 = unsigned __int128;

constexpr int kWindowBits = 62;
constexpr std::uint64_t kWindow = std::uint64_t{1} << kWindowBits;
constexpr std::uint64_t kHalf = kWindow >> 1;

std::uint64_t scale(std::uint64_t range, std::uint64_t cum) {
    return static_cast<std::uint64_t>((static_cast<u128>(range) * cum) >> kFrequencyBits);
}

} // namespace

void quantize(std::span<const double> probs, std::span<std::uint64_t> cum) {
    const std::size_t k = probs.size();
    if (k == 0 || cum.size() != k + 1) throw InvalidParameter("quantize: size mismatch");
    const double budget = static_cast<double>(kFrequencyTotal - k);
    std::int64_t sum = 0;
    std::size_t top = 0;
    for (std::size_t s = 0; s < k; ++s) {
        const double p = std::clamp(probs[s], 0.0, 1.0);
        const auto f = 1 + static_cast<std::int64_t>(std::floor(p * budget));
        cum[s + 1] = static_cast<std::uint64_t>(f);
        sum += f;
        if (probs[s] > probs[top]) top = s;
    }
    const std::int64_t residual = static_cast<std::int64_t>(kFrequencyTotal) - sum;
    cum[top + 1] = static_cast<std::uint64_t>(static_cast<std::int64_t>(cum[top + 1]) + residual);
    cum[0] = 0;
    for (std::size_t s = 0; s < k; ++s) cum[s + 1] += cum[s];
}

void ArithmeticEncoder::emit(int bit) { bits_.push_back(static_cast<std::uint8_t>(bit)); }

void ArithmeticEncoder::carry() {
    auto it = bits_.rbegin();
    while (it != bits_.rend() && *it == 1) {
        *it = 0;
        ++it;
    }
    if (it == bits_.rend()) throw std::logic_error("arithmetic encoder carry out of the code interval");
    *it = 1;
}

void ArithmeticEncoder::encode(std::uint64_t cum_low, std::uint64_t cum_high) {
    const std::uint64_t lo = scale(range_, cum_low);
    const std::uint64_t hi = scale(range_, cum_high);
    low_ += lo;
    range_ = hi - lo;
    if (low_ >= kWindow) {
        low_ -= kWindow;
        carry();
    }
    while (range_ <= kHalf) {
        emit(static_cast<int>(low_ >> (kWindowBits - 1)));
        low_ = (low_ << 1) & (kWindow - 1);
        range_ <<= 1;
    }
}

ArithmeticEncoder::Output ArithmeticEncoder::finish() {
    // Shortest j such that a dyadic cell of size 2^(62-j) fits in [low, low+range).
    for (int j = 0; j <= kWindowBits; ++j) {
        const std::uint64_t cell = std::uint64_t{1} << (kWindowBits - j);
        const std::uint64_t start = (low_ + cell - 1) / cell * cell;
        if (start + cell > low_ + range_) continue;
        std::uint64_t value = start;
        if (value >= kWindow) {
            value -= kWindow;
            carry();
        }
        for (int i = 0; i < j; ++i) emit(static_cast<int>((value >> (kWindowBits - 1 - i)) & 1));
        break;
    }
    Output out;
    out.bit_count = bits_.size();
    out.bytes.assign((bits_.size() + 7) / 8, 0);
    for (std::size_t i = 0; i < bits_.size(); ++i)
        if (bits_[i]) out.bytes[i / 8] |= static_cast<std::uint8_t>(0x80u >> (i % 8));
    low_ = 0;
    range_ = kWindow;
    bits_.clear();
    return out;
}

ArithmeticDecoder::ArithmeticDecoder(std::span<const std::uint8_t> bytes, std::uint64_t bit_count)
    : bytes_(bytes), bit_count_(bit_count) {
    if (bytes.size() < (bit_count + 7) / 8) throw FormatError("payload shorter than its declared bit count");
    for (int i = 0; i < kWindowBits; ++i) offset_ = (offset_ << 1) | static_cast<std::uint64_t>(next_bit());
}

int ArithmeticDecoder::next_bit() {
    if (position_ >= bit_count_) {
        ++position_;
        return 0;
    }
    const int bit = (bytes_[position_ / 8] >> (7 - position_ % 8)) & 1;
    ++position_;
    return bit;
}

std::size_t ArithmeticDecoder::decode(std::span<const std::uint64_t> cum) {
    const std::size_t k = cum.size() - 1;
    const auto target = static_cast<std::uint64_t>(
        ((static_cast<u128>(offset_) + 1) * kFrequencyTotal - 1) / range_);
    auto it = std::upper_bound(cum.begin(), cum.end(), target);
    const auto s = static_cast<std::size_t>(it - cum.begin()) - 1;
    if (s >= k) throw FormatError("arithmetic decoder left the code interval");
    const std::uint64_t lo = scale(range_, cum[s]);
    const std::uint64_t hi = scale(range_, cum[s + 1]);
    offset_ -= lo;
    range_ = hi - lo;
    while (range_ <= kHalf) {
        offset_ = (offset_ << 1) | static_cast<std::uint64_t>(next_bit());
        range_ <<= 1;
    }
    return s;
}

} // namespace mauc
