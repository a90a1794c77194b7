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

#include "nnn/embed_io.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <set>
#include <sstream>

#include "nnn/error.hpp"

namespace nnn {

namespace {

constexpr std::uint32_t kFormatVersion = 1;
constexpr std::uint8_t kDtypeF32 = 1;

class ByteWriter {
public:
    explicit ByteWriter(std::size_t reserve) { bytes_.reserve(reserve); }

    void magic(std::string_view m) { bytes_.insert(bytes_.end(), m.begin(), m.end()); }
    void u8(std::uint8_t v) { bytes_.push_back(v); }
    void u32(std::uint32_t v) {
        for (int i = 0; i < 4; ++i) bytes_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    }
    void u64(std::uint64_t v) {
        for (int i = 0; i < 8; ++i) bytes_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    }
    void f32(float v) { u32(std::bit_cast<std::uint32_t>(v)); }
    void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
    void zeros(std::size_t n) { bytes_.insert(bytes_.end(), n, 0); }

    std::vector<std::uint8_t> take() { return std::move(bytes_); }

private:
    std::vector<std::uint8_t> bytes_;
};

class ByteReader {
public:
    explicit ByteReader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

    std::size_t offset() const { return pos_; }

    void need(std::size_t n) const {
        if (bytes_.size() - pos_ < n) {
            throw Error(ErrorCode::kTruncatedFile,
                        "need " + std::to_string(n) + " more bytes", bytes_.size());
        }
    }

    void expect_magic(std::string_view m) {
        need(m.size());
        if (std::memcmp(bytes_.data() + pos_, m.data(), m.size()) != 0) {
            throw Error(ErrorCode::kBadMagic, "expected \"" + std::string(m) + "\"", pos_);
        }
        pos_ += m.size();
    }
    std::uint8_t u8() {
        need(1);
        return bytes_[pos_++];
    }
    std::uint32_t u32() {
        need(4);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(bytes_[pos_ + i]) << (8 * i);
        pos_ += 4;
        return v;
    }
    std::uint64_t u64() {
        need(8);
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(bytes_[pos_ + i]) << (8 * i);
        pos_ += 8;
        return v;
    }
    float f32() { return std::bit_cast<float>(u32()); }
    double f64() { return std::bit_cast<double>(u64()); }
    void skip(std::size_t n) {
        need(n);
        pos_ += n;
    }
    void expect_end() const {
        if (pos_ != bytes_.size()) {
            throw Error(ErrorCode::kParseError,
                        std::to_string(bytes_.size() - pos_) + " trailing bytes", pos_);
        }
    }

private:
    std::span<const std::uint8_t> bytes_;
    std::size_t pos_ = 0;
};

std::vector<std::uint8_t> read_binary_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        NNN_THROW(ErrorCode::kIoError, "cannot open " + path.string());
    }
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_matrix_header(ByteWriter& w, const EmbeddingMatrix& m) {
    w.magic("EMB1");
    w.u32(kFormatVersion);
    w.u32(static_cast<std::uint32_t>(m.rows()));
    w.u32(static_cast<std::uint32_t>(m.dim()));
    w.u8(kDtypeF32);
    w.u8(m.normalized() ? 1 : 0);
    w.zeros(6);
}

void check_u32_shape(const EmbeddingMatrix& m) {
    NNN_CHECK(m.rows() <= UINT32_MAX && m.dim() <= UINT32_MAX, ErrorCode::kInvalidArgument,
              "matrix shape exceeds EMB1 u32 limits");
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\r')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

std::vector<std::string_view> split_tabs(std::string_view line) {
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    while (true) {
        const std::size_t tab = line.find('\t', start);
        if (tab == std::string_view::npos) {
            fields.push_back(trim(line.substr(start)));
            break;
        }
        fields.push_back(trim(line.substr(start, tab - start)));
        start = tab + 1;
    }
    return fields;
}

/// Calls fn(line_number, line) for every non-blank, non-comment line.
template <typename Fn>
void for_each_data_line(std::string_view text, Fn&& fn) {
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        std::size_t end = text.find('\n', pos);
        if (end == std::string_view::npos) end = text.size();
        ++line_no;
        const std::string_view line = trim(text.substr(pos, end - pos));
        if (!line.empty() && line.front() != '#') {
            fn(line_no, line);
        }
        if (end == text.size()) break;
        pos = end + 1;
    }
}

[[noreturn]] void parse_error(std::size_t line_no, const std::string& what) {
    NNN_THROW(ErrorCode::kParseError, "line " + std::to_string(line_no) + ": " + what);
}

std::size_t parse_index(std::string_view field, std::size_t line_no) {
    std::size_t value = 0;
    const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
    if (ec != std::errc() || ptr != field.data() + field.size()) {
        parse_error(line_no, "bad index \"" + std::string(field) + "\"");
    }
    return value;
}

}  // namespace

std::vector<std::uint8_t> encode_matrix(const EmbeddingMatrix& m) {
    check_u32_shape(m);
    const auto data = m.data();
    for (std::size_t i = 0; i < data.size(); ++i) {
        if (!std::isfinite(data[i])) {
            NNN_THROW(ErrorCode::kNonFiniteValue, "value " + std::to_string(i));
        }
    }
    ByteWriter w(kMatrixHeaderBytes + 4 * data.size());
    write_matrix_header(w, m);
    for (float v : data) w.f32(v);
    return w.take();
}

EmbeddingMatrix decode_matrix(std::span<const std::uint8_t> bytes) {
    ByteReader r(bytes);
    r.expect_magic("EMB1");
    const std::size_t version_at = r.offset();
    const std::uint32_t version = r.u32();
    if (version != kFormatVersion) {
        throw Error(ErrorCode::kParseError, "unsupported EMB1 version " + std::to_string(version),
                    version_at);
    }
    const std::uint32_t rows = r.u32();
    const std::uint32_t dim = r.u32();
    const std::size_t dtype_at = r.offset();
    const std::uint8_t dtype = r.u8();
    const std::uint8_t normalized = r.u8();
    r.skip(6);
    if (dtype != kDtypeF32) {
        throw Error(ErrorCode::kParseError, "unsupported dtype " + std::to_string(dtype), dtype_at);
    }
    if (dim == 0) {
        throw Error(ErrorCode::kParseError, "dim must be >= 1", 12);
    }
    const std::size_t count = static_cast<std::size_t>(rows) * dim;
    r.need(count * 4);
    std::vector<float> data(count);
    for (std::size_t i = 0; i < count; ++i) {
        const std::size_t at = r.offset();
        data[i] = r.f32();
        if (!std::isfinite(data[i])) {
            throw Error(ErrorCode::kNonFiniteValue, "payload value " + std::to_string(i), at);
        }
    }
    r.expect_end();
    return EmbeddingMatrix(rows, dim, std::move(data), normalized != 0);
}

EmbeddingMatrix load_matrix(const std::filesystem::path& path) {
    return decode_matrix(read_binary_file(path));
}

void save_matrix(const EmbeddingMatrix& m, const std::filesystem::path& path) {
    write_file_atomic(path, encode_matrix(m));
}

EmbeddingMatrix parse_tsv(std::string_view text, bool normalize) {
    std::vector<float> data;
    std::size_t dim = 0;
    std::size_t rows = 0;
    for_each_data_line(text, [&](std::size_t line_no, std::string_view line) {
        const auto fields = split_tabs(line);
        if (rows == 0) {
            dim = fields.size();
        } else if (fields.size() != dim) {
            NNN_THROW(ErrorCode::kRaggedRows, "line " + std::to_string(line_no) + " has " +
                                                  std::to_string(fields.size()) +
                                                  " fields, expected " + std::to_string(dim));
        }
        for (std::string_view f : fields) {
            float v = 0.0F;
            const auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), v);
            if (ec != std::errc() || ptr != f.data() + f.size() || !std::isfinite(v)) {
                parse_error(line_no, "bad value \"" + std::string(f) + "\"");
            }
            data.push_back(v);
        }
        if (normalize) {
            const std::span<float> row(data.data() + rows * dim, dim);
            const double norm = row_norm(row);
            NNN_CHECK(norm > 0.0, ErrorCode::kZeroVectorOnNormalize,
                      "line " + std::to_string(line_no));
            for (float& x : row) x = static_cast<float>(static_cast<double>(x) / norm);
        }
        ++rows;
    });
    NNN_CHECK(rows > 0, ErrorCode::kParseError, "no data rows");
    return EmbeddingMatrix(rows, dim, std::move(data), normalize);
}

EmbeddingMatrix import_tsv(const std::filesystem::path& path, bool normalize) {
    return parse_tsv(read_text_file(path), normalize);
}

std::uint64_t fnv1a64(std::span<const std::uint8_t> bytes, std::uint64_t state) {
    for (std::uint8_t b : bytes) {
        state ^= b;
        state *= 0x100000001b3ULL;
    }
    return state;
}

std::uint64_t fingerprint(const EmbeddingMatrix& m) {
    check_u32_shape(m);
    ByteWriter w(kMatrixHeaderBytes);
    write_matrix_header(w, m);
    std::uint64_t h = fnv1a64(w.take());
    std::uint8_t buf[4];
    for (float v : m.data()) {
        const auto bits = std::bit_cast<std::uint32_t>(v);
        for (int i = 0; i < 4; ++i) buf[i] = static_cast<std::uint8_t>(bits >> (8 * i));
        h = fnv1a64(buf, h);
    }
    return h;
}

std::vector<std::uint8_t> encode_bias(const BiasVector& bias) {
    NNN_CHECK(bias.values.size() <= UINT32_MAX, ErrorCode::kInvalidArgument,
              "bias length exceeds BIA1 limits");
    ByteWriter w(kBiasHeaderBytes + 4 * bias.values.size());
    w.magic("BIA1");
    w.u32(kFormatVersion);
    w.u32(static_cast<std::uint32_t>(bias.values.size()));
    w.f64(bias.alpha);
    w.u32(bias.k);
    w.u32(0);
    w.u64(bias.ref_fingerprint);
    for (float v : bias.values) {
        NNN_CHECK(std::isfinite(v), ErrorCode::kNonFiniteValue, "bias value");
        w.f32(v);
    }
    return w.take();
}

BiasVector decode_bias(std::span<const std::uint8_t> bytes) {
    ByteReader r(bytes);
    r.expect_magic("BIA1");
    const std::size_t version_at = r.offset();
    const std::uint32_t version = r.u32();
    if (version != kFormatVersion) {
        throw Error(ErrorCode::kParseError, "unsupported BIA1 version " + std::to_string(version),
                    version_at);
    }
    BiasVector bias;
    const std::uint32_t n = r.u32();
    bias.alpha = r.f64();
    bias.k = r.u32();
    r.skip(4);
    bias.ref_fingerprint = r.u64();
    r.need(static_cast<std::size_t>(n) * 4);
    bias.values.resize(n);
    for (std::uint32_t i = 0; i < n; ++i) {
        const std::size_t at = r.offset();
        bias.values[i] = r.f32();
        if (!std::isfinite(bias.values[i])) {
            throw Error(ErrorCode::kNonFiniteValue, "bias value " + std::to_string(i), at);
        }
    }
    r.expect_end();
    return bias;
}

BiasVector load_bias(const std::filesystem::path& path) {
    return decode_bias(read_binary_file(path));
}

void save_bias(const BiasVector& bias, const std::filesystem::path& path) {
    write_file_atomic(path, encode_bias(bias));
}

bool bias_matches_reference(const BiasVector& bias, const EmbeddingMatrix& reference) {
    return bias.ref_fingerprint == fingerprint(reference);
}

const std::vector<std::size_t>* GroundTruth::find(std::size_t query) const {
    const auto it = correct.find(query);
    return it == correct.end() ? nullptr : &it->second;
}

void GroundTruth::validate(std::size_t n_queries, std::size_t n_candidates) const {
    for (const auto& [q, cands] : correct) {
        NNN_CHECK(q < n_queries, ErrorCode::kIndexOutOfRange,
                  "truth query " + std::to_string(q) + " >= " + std::to_string(n_queries));
        NNN_CHECK(!cands.empty(), ErrorCode::kMissingTruth, "query " + std::to_string(q));
        for (std::size_t c : cands) {
            NNN_CHECK(c < n_candidates, ErrorCode::kIndexOutOfRange,
                      "truth candidate " + std::to_string(c) + " >= " +
                          std::to_string(n_candidates));
        }
    }
}

GroundTruth parse_truth(std::string_view text) {
    std::map<std::size_t, std::set<std::size_t>> sets;
    for_each_data_line(text, [&](std::size_t line_no, std::string_view line) {
        const auto fields = split_tabs(line);
        if (fields.size() != 2) parse_error(line_no, "expected query_idx<TAB>cand_idx");
        sets[parse_index(fields[0], line_no)].insert(parse_index(fields[1], line_no));
    });
    GroundTruth truth;
    for (auto& [q, s] : sets) truth.correct[q] = std::vector<std::size_t>(s.begin(), s.end());
    return truth;
}

GroundTruth load_truth(const std::filesystem::path& path) {
    return parse_truth(read_text_file(path));
}

AttributeLabels parse_labels(std::string_view text) {
    AttributeLabels labels;
    for_each_data_line(text, [&](std::size_t line_no, std::string_view line) {
        const auto fields = split_tabs(line);
        if (fields.size() < 2 || fields.size() > 3) {
            parse_error(line_no, "expected cand_idx<TAB>A|B[<TAB>group]");
        }
        CandidateLabel label;
        if (fields[1] == "A") {
            label.attribute = Attribute::kA;
        } else if (fields[1] == "B") {
            label.attribute = Attribute::kB;
        } else {
            parse_error(line_no, "attribute must be A or B");
        }
        if (fields.size() == 3) label.group = std::string(fields[2]);
        labels[parse_index(fields[0], line_no)] = std::move(label);
    });
    return labels;
}

AttributeLabels load_labels(const std::filesystem::path& path) {
    return parse_labels(read_text_file(path));
}

QueryGroups parse_query_groups(std::string_view text) {
    QueryGroups groups;
    for_each_data_line(text, [&](std::size_t line_no, std::string_view line) {
        const auto fields = split_tabs(line);
        if (fields.size() != 2) parse_error(line_no, "expected query_idx<TAB>group");
        groups[parse_index(fields[0], line_no)] = std::string(fields[1]);
    });
    return groups;
}

QueryGroups load_query_groups(const std::filesystem::path& path) {
    return parse_query_groups(read_text_file(path));
}

std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        NNN_THROW(ErrorCode::kIoError, "cannot open " + path.string());
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file_atomic(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) {
            NNN_THROW(ErrorCode::kIoError, "cannot open " + tmp.string() + " for writing");
        }
        out.write(reinterpret_cast<const char*>(bytes.data()),
                  static_cast<std::streamsize>(bytes.size()));
        if (!out) {
            NNN_THROW(ErrorCode::kIoError, "write failed: " + tmp.string());
        }
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::filesystem::remove(tmp, ec);
        NNN_THROW(ErrorCode::kIoError, "cannot rename into " + path.string());
    }
}

void write_file_atomic(const std::filesystem::path& path, std::string_view text) {
    write_file_atomic(path, std::span<const std::uint8_t>(
                                reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

}  // namespace nnn
