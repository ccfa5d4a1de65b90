#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace mauc {

// Frequencies are quantized to a total of 2^32 with a floor of 1 per symbol.
inline constexpr int kFrequencyBits = 32;
inline constexpr std::uint64_t kFrequencyTotal = std::uint64_t{1} << kFrequencyBits;

/// Quantize a probability vector into cumulative frequencies `cum` (size k+1,
/// cum[0] = 0, cum[k] = kFrequencyTotal). Every symbol gets at least 1.
/// Encoder and decoder must call this on bit-identical inputs.
void quantize(std::span<const double> probs, std::span<std::uint64_t> cum);

/// Binary arithmetic encoder with a 62-bit window and carry propagation into
/// the already emitted bits. Termination emits the shortest codeword whose
/// dyadic interval lies inside the final interval, so the payload is at most
/// ceil(-log2 P) + 1 bits and at least -log2 P bits.
class ArithmeticEncoder {
public:
    void encode(std::uint64_t cum_low, std::uint64_t cum_high);

    struct Output {
        std::vector<std::uint8_t> bytes;
        std::uint64_t bit_count = 0;
    };
    Output finish();

private:
    void emit(int bit);
    void carry();

    std::uint64_t low_ = 0;
    std::uint64_t range_ = std::uint64_t{1} << 62;
    std::vector<std::uint8_t> bits_;
};

class ArithmeticDecoder {
public:
    ArithmeticDecoder(std::span<const std::uint8_t> bytes, std::uint64_t bit_count);

    // Returns the symbol s with cum[s] <= target < cum[s+1] and consumes it.
    std::size_t decode(std::span<const std::uint64_t> cum);

private:
    int next_bit();

    std::span<const std::uint8_t> bytes_;
    std::uint64_t bit_count_;
    std::uint64_t position_ = 0;
    std::uint64_t range_ = std::uint64_t{1} << 62;
    std::uint64_t offset_ = 0;  // code value minus low, in window units
};

} // namespace mauc
