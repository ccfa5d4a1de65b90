#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "mauc/source_model.hpp"

namespace mauc {

enum class Mode : std::uint8_t {
    ucomp = 0,    // no memory
    ucompm = 1,   // model primed with the whole memory
    ucompcm = 2,  // model primed with one cluster of the memory
};

Mode parse_mode(std::string_view name);
std::string_view mode_name(Mode mode);

struct CodecParams {
    int k = 256;
    int depth = 3;
};

using MemoryView = std::optional<std::span<const Sequence>>;

/// Fixed stream header. Serialized big-endian as
/// "MAUC" | version | mode | k(2) | depth | n(8) | digest(8) | [cluster(2)] | bits(8).
struct StreamHeader {
    static constexpr std::uint8_t kVersion = 1;

    Mode mode = Mode::ucomp;
    std::uint16_t k = 0;
    std::uint8_t depth = 0;
    std::uint64_t n = 0;
    std::uint64_t memory_digest = 0;
    std::optional<std::uint16_t> cluster_id;
    std::uint64_t payload_bits = 0;
};

struct CodeStream {
    StreamHeader header;
    std::vector<std::uint8_t> payload;
};

// 64-bit FNV-1a over each sequence's big-endian 8-byte length followed by its
// symbols. Detects encoder/decoder memory mismatch; not a cryptographic hash.
std::uint64_t memory_digest(std::span<const Sequence> memory);

// -log2 of the sequential CTW probability of x, after priming for memory modes.
double ideal_codelength(Mode mode, std::span<const Symbol> x, MemoryView memory, const CodecParams& params);

CodeStream encode(Mode mode, std::span<const Symbol> x, MemoryView memory, const CodecParams& params,
                  std::optional<std::uint16_t> cluster_id = std::nullopt);
Sequence decode(const CodeStream& stream, MemoryView memory);

std::vector<std::uint8_t> serialize(const CodeStream& stream);
CodeStream parse_stream(std::span<const std::uint8_t> bytes);

} // namespace mauc
