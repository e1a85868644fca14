#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "alab/nn.hpp"

namespace alab {

// Checkpoint container: magic "ALGN", format version u16, then a kind tag and
// kind-specific body. All integers little-endian; floats little-endian IEEE
// 64-bit. Round-trips are bitwise.

struct SerializeError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

constexpr uint16_t kFormatVersion = 1;

enum class CheckpointKind : uint16_t {
    auctioneer = 1,
    misreporter = 2,
    algnet_trainer = 3,
    regretnet_trainer = 4,
};

class ByteWriter {
public:
    void u8(uint8_t v) { buf_.push_back(v); }
    void u16(uint16_t v);
    void u32(uint32_t v);
    void u64(uint64_t v);
    void f64(double v);
    void bytes(std::span<const uint8_t> b) { buf_.insert(buf_.end(), b.begin(), b.end()); }
    const std::vector<uint8_t>& data() const { return buf_; }

private:
    std::vector<uint8_t> buf_;
};

class ByteReader {
public:
    explicit ByteReader(std::span<const uint8_t> data) : data_(data) {}
    uint8_t u8();
    uint16_t u16();
    uint32_t u32();
    uint64_t u64();
    double f64();
    void expect_end() const {
        if (pos_ != data_.size()) throw SerializeError("length mismatch: trailing bytes");
    }

private:
    void need(size_t n) const {
        if (pos_ + n > data_.size()) throw SerializeError("length mismatch: truncated stream");
    }
    std::span<const uint8_t> data_;
    size_t pos_ = 0;
};

void write_header(ByteWriter& w, CheckpointKind kind);
CheckpointKind read_header(ByteReader& r);

void write_mlp_spec(ByteWriter& w, const MlpSpec& spec);
MlpSpec read_mlp_spec(ByteReader& r);

void write_mlp(ByteWriter& w, const MlpSpec& spec, const MlpParams& params);
MlpParams read_mlp(ByteReader& r, const MlpSpec& spec);

void write_adamw(ByteWriter& w, const AdamWState& st);
AdamWState read_adamw(ByteReader& r, const MlpSpec& spec);

void save_bytes(const std::filesystem::path& path, std::span<const uint8_t> data);
std::vector<uint8_t> load_bytes(const std::filesystem::path& path);

}  // namespace alab
