// Copyright 2026 The NNN Retrieval Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <doctest.h>

#include <bit>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>

#include "nnn/embed_io.hpp"
#include "test_util.hpp"

namespace nnn {
namespace {

using testing::matrix_of;
using testing::random_matrix;
using testing::TempDir;

// Written from the published FNV-1a parameters, independent of the library.
std::uint64_t fnv_oracle(const std::vector<std::uint8_t>& bytes) {
    std::uint64_t h = 14695981039346656037ULL;
    for (std::uint8_t b : bytes) {
        h ^= b;
        h *= 1099511628211ULL;
    }
    return h;
}

std::vector<std::uint8_t> file_bytes(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_bytes(const std::filesystem::path& p, const std::vector<std::uint8_t>& bytes) {
    std::ofstream out(p, std::ios::binary);
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

std::uint64_t load_error_offset(const std::filesystem::path& p, ErrorCode want) {
    try {
        (void)load_matrix(p);
    } catch (const Error& e) {
        CHECK(e.code() == want);
        REQUIRE(e.offset().has_value());
        return *e.offset();
    }
    FAIL("no error");
    return 0;
}

TEST_CASE("empty matrix keeps its dim through a round trip") {
    TempDir dir;
    save_matrix(EmbeddingMatrix::empty(4), dir / "e.emb");
    const auto m = load_matrix(dir / "e.emb");
    CHECK(m.rows() == 0);
    CHECK(m.dim() == 4);
    CHECK(file_bytes(dir / "e.emb").size() == 24);
}

TEST_CASE("identity rows round-trip bit-exactly") {
    TempDir dir;
    const auto m = EmbeddingMatrix(2, 2, {1, 0, 0, 1}, true);
    save_matrix(m, dir / "i.emb");
    const auto back = load_matrix(dir / "i.emb");
    CHECK(back == m);
    CHECK(back.normalized());
}

TEST_CASE("1x1 matrix file has the exact layout") {
    TempDir dir;
    save_matrix(matrix_of(1, 1, {0.5F}), dir / "one.emb");
    const auto bytes = file_bytes(dir / "one.emb");
    // 24 header bytes then one f32.
    const std::vector<std::uint8_t> expected = {
        'E', 'M', 'B', '1', 1, 0, 0, 0, 1, 0, 0, 0, 1, 0, 0, 0,
        1,   0,   0,   0,   0, 0, 0, 0, 0x00, 0x00, 0x00, 0x3f};
    CHECK(bytes.size() == 28);
    CHECK(bytes == expected);
}

TEST_CASE("truncated file reports the offset where data ran out") {
    TempDir dir;
    Rng rng(3);
    save_matrix(random_matrix(rng, 3, 4), dir / "full.emb");
    auto bytes = file_bytes(dir / "full.emb");
    bytes.resize(17);
    write_bytes(dir / "cut.emb", bytes);
    CHECK(load_error_offset(dir / "cut.emb", ErrorCode::kTruncatedFile) == 17);

    // Cut inside the payload.
    bytes = file_bytes(dir / "full.emb");
    bytes.resize(30);
    write_bytes(dir / "cut2.emb", bytes);
    CHECK(load_error_offset(dir / "cut2.emb", ErrorCode::kTruncatedFile) == 30);
}

TEST_CASE("bad magic and non-finite payload are rejected with offsets") {
    TempDir dir;
    auto bytes = encode_matrix(matrix_of(1, 2, {1.0F, 2.0F}));
    auto bad = bytes;
    bad[0] = 'X';
    write_bytes(dir / "magic.emb", bad);
    CHECK(load_error_offset(dir / "magic.emb", ErrorCode::kBadMagic) == 0);

    const auto nan_bits = std::bit_cast<std::uint32_t>(std::numeric_limits<float>::quiet_NaN());
    for (int i = 0; i < 4; ++i) bytes[28 + i] = static_cast<std::uint8_t>(nan_bits >> (8 * i));
    write_bytes(dir / "nan.emb", bytes);
    CHECK(load_error_offset(dir / "nan.emb", ErrorCode::kNonFiniteValue) == 28);
}

TEST_CASE("a NaN never reaches the disk") {
    CHECK_NNN_ERROR(matrix_of(1, 2, {1.0F, std::numeric_limits<float>::quiet_NaN()}),
                    ErrorCode::kNonFiniteValue);
    CHECK_NNN_ERROR(matrix_of(1, 1, {std::numeric_limits<float>::infinity()}),
                    ErrorCode::kNonFiniteValue);
}

TEST_CASE("round-trip property over random shapes") {
    TempDir dir;
    Rng rng(11);
    for (int trial = 0; trial < 25; ++trial) {
        const std::size_t rows = trial == 0 ? 1000 : rng.uniform_index(200);
        const std::size_t dim = trial == 0 ? 512 : 1 + rng.uniform_index(64);
        const bool unit = rng.bernoulli(0.5);
        const auto m = random_matrix(rng, rows, dim, unit);
        save_matrix(m, dir / "r.emb");
        const auto back = load_matrix(dir / "r.emb");
        REQUIRE(back.rows() == rows);
        CHECK(back.normalized() == unit);
        CHECK(std::equal(m.data().begin(), m.data().end(), back.data().begin(),
                         [](float a, float b) {
                             return std::bit_cast<std::uint32_t>(a) == std::bit_cast<std::uint32_t>(b);
                         }));
    }
}

TEST_CASE("trailing bytes are a parse error") {
    auto bytes = encode_matrix(matrix_of(1, 1, {1.0F}));
    bytes.push_back(0);
    CHECK_NNN_ERROR(decode_matrix(bytes), ErrorCode::kParseError);
}

TEST_CASE("tsv import") {
    SUBCASE("3-4-5 normalizes to (0.6, 0.8)") {
        const auto m = parse_tsv("3\t4", true);
        CHECK(m.normalized());
        CHECK(m.row(0)[0] == doctest::Approx(0.6).epsilon(1e-7));
        CHECK(m.row(0)[1] == doctest::Approx(0.8).epsilon(1e-7));
    }
    SUBCASE("identity without normalization") {
        const auto m = parse_tsv("1\t0\n0\t1", false);
        CHECK(m == matrix_of(2, 2, {1, 0, 0, 1}));
        CHECK_FALSE(m.normalized());
    }
    SUBCASE("zero row cannot be normalized") {
        CHECK_NNN_ERROR(parse_tsv("0\t0", true), ErrorCode::kZeroVectorOnNormalize);
    }
    SUBCASE("comments, blank lines, CRLF and scientific notation") {
        const auto m = parse_tsv("# header\n1e-1\t-2.5E+0\r\n\n0.25\t3\n", false);
        CHECK(m == matrix_of(2, 2, {0.1F, -2.5F, 0.25F, 3.0F}));
    }
    SUBCASE("ragged rows") {
        CHECK_NNN_ERROR(parse_tsv("1\t2\n3\n", false), ErrorCode::kRaggedRows);
    }
    SUBCASE("bad number names its line") {
        try {
            (void)parse_tsv("1\t2\n3\tx\n", false);
            FAIL("no error");
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::kParseError);
            CHECK(std::string(e.what()).find("line 2") != std::string::npos);
        }
    }
    SUBCASE("normalized rows are unit to 1e-6 in double") {
        Rng rng(5);
        std::string text;
        for (int i = 0; i < 300; ++i) {
            for (int d = 0; d < 17; ++d) {
                text += std::to_string(rng.normal() * 100.0);
                text += d + 1 < 17 ? '\t' : '\n';
            }
        }
        const auto m = parse_tsv(text, true);
        for (std::size_t i = 0; i < m.rows(); ++i) CHECK(std::abs(row_norm(m.row(i)) - 1.0) < 1e-6);
    }
}

TEST_CASE("fingerprint") {
    SUBCASE("empty matrix digests its header") {
        const std::vector<std::uint8_t> header = {'E', 'M', 'B', '1', 1, 0, 0, 0, 0, 0, 0, 0,
                                                  4,   0,   0,   0,   1, 0, 0, 0, 0, 0, 0, 0};
        CHECK(fingerprint(EmbeddingMatrix::empty(4)) == fnv_oracle(header));
    }
    SUBCASE("matches the oracle over the full encoding") {
        Rng rng(8);
        const auto m = random_matrix(rng, 37, 9);
        CHECK(fingerprint(m) == fnv_oracle(encode_matrix(m)));
        CHECK(fingerprint(m) == fingerprint(EmbeddingMatrix(m)));
    }
    SUBCASE("one ulp changes the digest") {
        const auto a = matrix_of(2, 2, {0.1F, 0.2F, 0.3F, 0.4F});
        const auto b = matrix_of(2, 2, {0.1F, 0.2F, std::nextafter(0.3F, 1.0F), 0.4F});
        CHECK(fingerprint(a) != fingerprint(b));
    }
    SUBCASE("10000 random matrices give 10000 digests") {
        Rng rng(99);
        std::set<std::uint64_t> seen;
        for (int i = 0; i < 10000; ++i) {
            seen.insert(fingerprint(random_matrix(rng, 1 + rng.uniform_index(4), 1 + rng.uniform_index(8), false)));
        }
        CHECK(seen.size() == 10000);
    }
}

TEST_CASE("bias files") {
    TempDir dir;
    Rng rng(2);
    const auto refs = random_matrix(rng, 10, 3);
    BiasVector b{{0.5F, -1.25F, 3.0F}, 0.75, 16, fingerprint(refs)};
    save_bias(b, dir / "b.bia");
    const auto back = load_bias(dir / "b.bia");
    CHECK(back == b);
    CHECK(bias_matches_reference(back, refs));
    CHECK_FALSE(bias_matches_reference(back, random_matrix(rng, 10, 3)));

    const BiasVector empty{{}, 1.0, 1, 0};
    save_bias(empty, dir / "e.bia");
    CHECK(file_bytes(dir / "e.bia").size() == 36);
    CHECK(load_bias(dir / "e.bia") == empty);

    auto bytes = file_bytes(dir / "b.bia");
    bytes[3] = '2';
    write_bytes(dir / "bad.bia", bytes);
    CHECK_NNN_ERROR(load_bias(dir / "bad.bia"), ErrorCode::kBadMagic);
    bytes = file_bytes(dir / "b.bia");
    bytes.resize(40);
    write_bytes(dir / "cut.bia", bytes);
    CHECK_NNN_ERROR(load_bias(dir / "cut.bia"), ErrorCode::kTruncatedFile);
}

TEST_CASE("ground truth and labels") {
    const auto gt = parse_truth("0\t3\n0\t1\n0\t3\n2\t0\n");
    REQUIRE(gt.find(0) != nullptr);
    CHECK(*gt.find(0) == std::vector<std::size_t>{1, 3});
    CHECK(gt.find(1) == nullptr);
    CHECK_NNN_ERROR(gt.validate(3, 3), ErrorCode::kIndexOutOfRange);
    gt.validate(3, 4);
    CHECK_NNN_ERROR(parse_truth("0\tx\n"), ErrorCode::kParseError);

    const auto labels = parse_labels("0\tA\tdoctor\n1\tB\tdoctor\n2\tA\n");
    CHECK(labels.at(0).attribute == Attribute::kA);
    CHECK(labels.at(1).attribute == Attribute::kB);
    CHECK(labels.at(1).group == "doctor");
    CHECK(labels.at(2).group.empty());
    CHECK_NNN_ERROR(parse_labels("0\tC\n"), ErrorCode::kParseError);

    const auto groups = parse_query_groups("0\tdoctor\n1\tnurse\n");
    CHECK(groups.at(1) == "nurse");
}

TEST_CASE("atomic write leaves no temporary behind") {
    TempDir dir;
    write_file_atomic(dir / "out.txt", std::string_view("hello\n"));
    write_file_atomic(dir / "out.txt", std::string_view("again\n"));
    CHECK(read_text_file(dir / "out.txt") == "again\n");
    std::size_t files = 0;
    for ([[maybe_unused]] const auto& e : std::filesystem::directory_iterator(dir.path())) ++files;
    CHECK(files == 1);
}

}  // namespace
}  // namespace nnn
