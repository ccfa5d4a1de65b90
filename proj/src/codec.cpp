#include "mauc/codec.hpp"

#include <array>
#include <string>

#include "mauc/arith_coder.hpp"
#include "mauc/ctw.hpp"
#include "mauc/error.hpp"

namespace mauc {

namespace {

constexpr std::array<std::uint8_t, 4> kMagic{'M', 'A', 'U', 'C'};

void check_params(int k, int depth) {
    if (k < 2 || k > kMaxAlphabet) throw InvalidParameter("alphabet size k must be in [2, 256]");
    if (depth < 0 || depth > 255) throw InvalidParameter("context tree depth must be in [0, 255]");
}

void check_symbols(std::span<const Symbol> x, int k) {
    for (Symbol s : x)
        if (s >= k) throw InvalidParameter("input symbol outside the alphabet");
}

// Fresh tree, primed for memory modes.
ContextTree make_model(Mode mode, MemoryView memory, int k, int depth) {
    ContextTree tree(k, depth);
    if (mode != Mode::ucomp) {
        if (!memory) throw InvalidParameter(std::string("mode ") + std::string(mode_name(mode)) + " requires memory");
        prime(tree, *memory);
    }
    return tree;
}

void put_be(std::vector<std::uint8_t>& out, std::uint64_t v, int bytes) {
    for (int i = bytes - 1; i >= 0; --i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

class Reader {
public:
    explicit Reader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

    std::uint64_t be(int n) {
        if (pos_ + static_cast<std::size_t>(n) > bytes_.size()) throw FormatError("truncated stream header");
        std::uint64_t v = 0;
        for (int i = 0; i < n; ++i) v = (v << 8) | bytes_[pos_++];
        return v;
    }
    std::span<const std::uint8_t> rest() const { return bytes_.subspan(pos_); }

private:
    std::span<const std::uint8_t> bytes_;
    std::size_t pos_ = 0;
};

} // namespace

Mode parse_mode(std::string_view name) {
    if (name == "ucomp") return Mode::ucomp;
    if (name == "ucompm") return Mode::ucompm;
    if (name == "ucompcm") return Mode::ucompcm;
    throw InvalidParameter("unknown mode '" + std::string(name) + "' (expected ucomp, ucompm or ucompcm)");
}

std::string_view mode_name(Mode mode) {
    switch (mode) {
    case Mode::ucomp: return "ucomp";
    case Mode::ucompm: return "ucompm";
    case Mode::ucompcm: return "ucompcm";
    }
    return "?";
}

std::uint64_t memory_digest(std::span<const Sequence> memory) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    auto mix = [&h](std::uint8_t b) {
        h ^= b;
        h *= 0x100000001b3ULL;
    };
    for (const auto& seq : memory) {
        const auto n = static_cast<std::uint64_t>(seq.size());
        for (int i = 7; i >= 0; --i) mix(static_cast<std::uint8_t>(n >> (8 * i)));
        for (Symbol s : seq) mix(s);
    }
    return h;
}

double ideal_codelength(Mode mode, std::span<const Symbol> x, MemoryView memory, const CodecParams& params) {
    check_params(params.k, params.depth);
    check_symbols(x, params.k);
    ContextTree tree = make_model(mode, memory, params.k, params.depth);
    ContextWindow window(params.k, params.depth);
    return feed(tree, window, x);
}

CodeStream encode(Mode mode, std::span<const Symbol> x, MemoryView memory, const CodecParams& params,
                  std::optional<std::uint16_t> cluster_id) {
    check_params(params.k, params.depth);
    check_symbols(x, params.k);
    if (mode == Mode::ucompcm && !cluster_id) throw InvalidParameter("mode ucompcm requires a cluster id");

    ContextTree tree = make_model(mode, memory, params.k, params.depth);
    ContextWindow window(params.k, params.depth);
    const auto k = static_cast<std::size_t>(params.k);
    std::vector<double> probs(k);
    std::vector<std::uint64_t> cum(k + 1);
    ArithmeticEncoder coder;
    for (Symbol s : x) {
        tree.predict(window.value(), probs);
        quantize(probs, cum);
        coder.encode(cum[s], cum[s + 1u]);
        tree.update(window.value(), s);
        window.push(s);
    }
    auto out = coder.finish();

    CodeStream stream;
    stream.header.mode = mode;
    stream.header.k = static_cast<std::uint16_t>(params.k);
    stream.header.depth = static_cast<std::uint8_t>(params.depth);
    stream.header.n = x.size();
    stream.header.memory_digest = mode == Mode::ucomp ? 0 : memory_digest(*memory);
    if (mode == Mode::ucompcm) stream.header.cluster_id = cluster_id;
    stream.header.payload_bits = out.bit_count;
    stream.payload = std::move(out.bytes);
    return stream;
}

Sequence decode(const CodeStream& stream, MemoryView memory) {
    const auto& h = stream.header;
    if (h.k < 2 || h.k > kMaxAlphabet) throw FormatError("stream alphabet size out of range");
    if (h.payload_bits > 8 * static_cast<std::uint64_t>(stream.payload.size()))
        throw FormatError("truncated payload");
    if (h.mode != Mode::ucomp) {
        if (!memory) throw InvalidParameter(std::string("stream mode ") + std::string(mode_name(h.mode)) + " requires memory");
        if (memory_digest(*memory) != h.memory_digest)
            throw MemoryDesync("memory digest mismatch: decoder memory differs from the encoder's");
    }
    ContextTree tree = make_model(h.mode, memory, h.k, h.depth);
    ContextWindow window(h.k, h.depth);
    const std::size_t k = h.k;
    std::vector<double> probs(k);
    std::vector<std::uint64_t> cum(k + 1);
    ArithmeticDecoder coder(stream.payload, h.payload_bits);
    Sequence out;
    out.reserve(h.n);
    for (std::uint64_t i = 0; i < h.n; ++i) {
        tree.predict(window.value(), probs);
        quantize(probs, cum);
        const auto s = static_cast<Symbol>(coder.decode(cum));
        tree.update(window.value(), s);
        window.push(s);
        out.push_back(s);
    }
    return out;
}

std::vector<std::uint8_t> serialize(const CodeStream& stream) {
    const auto& h = stream.header;
    if ((h.mode == Mode::ucompcm) != h.cluster_id.has_value())
        throw InvalidParameter("cluster id must be present exactly for mode ucompcm");
    std::vector<std::uint8_t> out(kMagic.begin(), kMagic.end());
    out.push_back(StreamHeader::kVersion);
    out.push_back(static_cast<std::uint8_t>(h.mode));
    put_be(out, h.k, 2);
    out.push_back(h.depth);
    put_be(out, h.n, 8);
    put_be(out, h.memory_digest, 8);
    if (h.cluster_id) put_be(out, *h.cluster_id, 2);
    put_be(out, h.payload_bits, 8);
    out.insert(out.end(), stream.payload.begin(), stream.payload.end());
    return out;
}

CodeStream parse_stream(std::span<const std::uint8_t> bytes) {
    Reader in(bytes);
    for (std::uint8_t m : kMagic)
        if (in.be(1) != m) throw FormatError("bad magic: not a MAUC stream");
    if (in.be(1) != StreamHeader::kVersion) throw FormatError("unsupported stream version");
    CodeStream stream;
    auto& h = stream.header;
    const auto mode = in.be(1);
    if (mode > 2) throw FormatError("unknown stream mode");
    h.mode = static_cast<Mode>(mode);
    h.k = static_cast<std::uint16_t>(in.be(2));
    if (h.k < 2 || h.k > kMaxAlphabet) throw FormatError("stream alphabet size out of range");
    h.depth = static_cast<std::uint8_t>(in.be(1));
    h.n = in.be(8);
    h.memory_digest = in.be(8);
    if (h.mode == Mode::ucompcm) h.cluster_id = static_cast<std::uint16_t>(in.be(2));
    h.payload_bits = in.be(8);
    const auto payload = in.rest();
    const std::uint64_t need = (h.payload_bits + 7) / 8;
    if (payload.size() < need) throw FormatError("truncated payload");
    if (payload.size() > need) throw FormatError("trailing bytes after payload");
    if (h.payload_bits % 8 != 0 && need > 0) {
        const auto pad_mask = static_cast<std::uint8_t>(0xffu >> (h.payload_bits % 8));
        if (payload[need - 1] & pad_mask) throw FormatError("nonzero payload padding");
    }
    stream.payload.assign(payload.begin(), payload.end());
    return stream;
}

} // namespace mauc
