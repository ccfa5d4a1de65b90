#include <gtest/gtest.h>

#include "mauc/codec.hpp"
#include "mauc/error.hpp"
#include "mauc/rng.hpp"
#include "mauc/source_model.hpp"

using namespace mauc;

namespace {

struct Corpus {
    Sequence x;
    std::vector<Sequence> memory;
};

Corpus make_corpus(int k, std::size_t n, std::uint64_t seed) {
    Rng rng = make_rng(seed);
    const auto model = sample_jeffreys(k, 1, rng);
    Corpus c;
    c.x = generate(model, n, rng);
    for (int i = 0; i < 3; ++i) c.memory.push_back(generate(model, n / 2 + 1, rng));
    return c;
}

} // namespace

TEST(Codec, RoundTripAllModes) {
    std::uint64_t seed = 0;
    for (int k : {2, 4, 16, 256})
        for (std::size_t n : {0u, 1u, 100u, 2000u})
            for (Mode mode : {Mode::ucomp, Mode::ucompm, Mode::ucompcm}) {
                const auto c = make_corpus(k, n, ++seed);
                const CodecParams params{k, 3};
                const MemoryView mem = mode == Mode::ucomp ? MemoryView{} : MemoryView{c.memory};
                std::optional<std::uint16_t> cluster;
                if (mode == Mode::ucompcm) cluster = 7;
                const auto stream = encode(mode, c.x, mem, params, cluster);
                const auto bytes = serialize(stream);
                const auto parsed = parse_stream(bytes);
                EXPECT_EQ(parsed.header.cluster_id, cluster);
                EXPECT_EQ(decode(parsed, mem), c.x) << "k=" << k << " n=" << n;

                const double ideal = ideal_codelength(mode, c.x, mem, params);
                const double excess = static_cast<double>(stream.header.payload_bits) - ideal;
                EXPECT_GE(excess, -1e-9);  // ideal is a float sum of logs
                EXPECT_LT(excess, 2.0);
            }
}

TEST(Codec, MemoryHelpsOnMatchingSource) {
    const auto c = make_corpus(4, 4000, 3);
    const CodecParams params{4, 3};
    EXPECT_LT(ideal_codelength(Mode::ucompm, c.x, MemoryView{c.memory}, params),
              ideal_codelength(Mode::ucomp, c.x, std::nullopt, params));
}

TEST(Codec, EmptyMemoryEqualsNoMemory) {
    const auto c = make_corpus(4, 500, 4);
    const std::vector<Sequence> empty;
    const CodecParams params{4, 2};
    EXPECT_DOUBLE_EQ(ideal_codelength(Mode::ucompm, c.x, MemoryView{empty}, params),
                     ideal_codelength(Mode::ucomp, c.x, std::nullopt, params));
}

TEST(Codec, MissingMemoryNamesTheMode) {
    const auto c = make_corpus(2, 50, 5);
    try {
        encode(Mode::ucompm, c.x, std::nullopt, CodecParams{2, 3});
        FAIL() << "expected InvalidParameter";
    } catch (const InvalidParameter& e) {
        EXPECT_NE(std::string(e.what()).find("ucompm"), std::string::npos);
    }
    EXPECT_THROW(encode(Mode::ucompcm, c.x, MemoryView{c.memory}, CodecParams{2, 3}), InvalidParameter);
}

TEST(Codec, DetectsMemoryDesync) {
    auto c = make_corpus(4, 300, 6);
    const auto stream = encode(Mode::ucompm, c.x, MemoryView{c.memory}, CodecParams{4, 3});
    auto other = c.memory;
    other[1][0] = static_cast<Symbol>((other[1][0] + 1) % 4);
    EXPECT_THROW(decode(stream, MemoryView{other}), MemoryDesync);
    other = c.memory;
    other.pop_back();
    EXPECT_THROW(decode(stream, MemoryView{other}), MemoryDesync);
    EXPECT_THROW(decode(stream, std::nullopt), InvalidParameter);
}

TEST(Codec, RejectsOutOfAlphabetInput) {
    EXPECT_THROW(encode(Mode::ucomp, Sequence{0, 1, 2}, std::nullopt, CodecParams{2, 3}), InvalidParameter);
    EXPECT_THROW(encode(Mode::ucomp, Sequence{0}, std::nullopt, CodecParams{1, 3}), InvalidParameter);
}

TEST(Digest, SeparatesSequenceBoundaries) {
    const std::vector<Sequence> a{{1, 2}, {}}, b{{1}, {2}}, c{{1, 2}};
    EXPECT_NE(memory_digest(a), memory_digest(b));
    EXPECT_NE(memory_digest(a), memory_digest(c));
    EXPECT_EQ(memory_digest(a), memory_digest(std::vector<Sequence>{{1, 2}, {}}));
}

TEST(StreamFormat, HeaderLayout) {
    const auto stream = encode(Mode::ucompcm, Sequence{0, 1, 1}, MemoryView{std::vector<Sequence>{{1}}},
                               CodecParams{2, 1}, std::uint16_t{0x0102});
    const auto bytes = serialize(stream);
    ASSERT_GE(bytes.size(), 35u);
    EXPECT_EQ(std::string(bytes.begin(), bytes.begin() + 4), "MAUC");
    EXPECT_EQ(bytes[4], 1);        // version
    EXPECT_EQ(bytes[5], 2);        // mode
    EXPECT_EQ(bytes[6], 0);        // k high byte
    EXPECT_EQ(bytes[7], 2);        // k low byte
    EXPECT_EQ(bytes[8], 1);        // depth
    EXPECT_EQ(bytes[16], 3);       // n, last byte of 8
    EXPECT_EQ(bytes[25], 0x01);    // cluster id
    EXPECT_EQ(bytes[26], 0x02);
    EXPECT_EQ(bytes.size(), 35u + (stream.header.payload_bits + 7) / 8);
}

TEST(StreamFormat, RejectsMalformedStreams) {
    const auto c = make_corpus(16, 400, 8);
    const auto good = serialize(encode(Mode::ucomp, c.x, std::nullopt, CodecParams{16, 3}));
    ASSERT_NO_THROW(parse_stream(good));

    auto bad = good;
    bad[0] = 'X';
    EXPECT_THROW(parse_stream(bad), FormatError);
    bad = good;
    bad[4] = 9;
    EXPECT_THROW(parse_stream(bad), FormatError);
    bad = good;
    bad[5] = 3;
    EXPECT_THROW(parse_stream(bad), FormatError);
    bad = good;
    bad[6] = 0x7f;
    EXPECT_THROW(parse_stream(bad), FormatError);
    EXPECT_THROW(parse_stream(std::span(good).first(10)), FormatError);
    EXPECT_THROW(parse_stream(std::span(good).first(good.size() - 1)), FormatError);
    bad = good;
    bad.push_back(0);
    EXPECT_THROW(parse_stream(bad), FormatError);

    const auto stream = parse_stream(good);
    if (stream.header.payload_bits % 8 != 0) {
        bad = good;
        bad.back() |= 1;
        EXPECT_THROW(parse_stream(bad), FormatError);
    }
}

TEST(ModeNames, ParseAndPrint) {
    for (Mode m : {Mode::ucomp, Mode::ucompm, Mode::ucompcm}) EXPECT_EQ(parse_mode(mode_name(m)), m);
    EXPECT_THROW(parse_mode("zip"), InvalidParameter);
}
