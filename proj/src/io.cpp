#include "alab/io.hpp"

#include <bit>
#include <cstring>
#include <fstream>

namespace alab {

void ByteWriter::u16(uint16_t v) {
    u8(static_cast<uint8_t>(v & 0xff));
    u8(static_cast<uint8_t>(v >> 8));
}

void ByteWriter::u32(uint32_t v) {
    for (int i = 0; i < 4; ++i) u8(static_cast<uint8_t>((v >> (8 * i)) & 0xff));
}

void ByteWriter::u64(uint64_t v) {
    for (int i = 0; i < 8; ++i) u8(static_cast<uint8_t>((v >> (8 * i)) & 0xff));
}

void ByteWriter::f64(double v) { u64(std::bit_cast<uint64_t>(v)); }

uint8_t ByteReader::u8() {
    need(1);
    return data_[pos_++];
}

uint16_t ByteReader::u16() {
    need(2);
    uint16_t v = static_cast<uint16_t>(data_[pos_]) | (static_cast<uint16_t>(data_[pos_ + 1]) << 8);
    pos_ += 2;
    return v;
}

uint32_t ByteReader::u32() {
    need(4);
    uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<uint32_t>(data_[pos_ + i]) << (8 * i);
    pos_ += 4;
    return v;
}

uint64_t ByteReader::u64() {
    need(8);
    uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<uint64_t>(data_[pos_ + i]) << (8 * i);
    pos_ += 8;
    return v;
}

double ByteReader::f64() { return std::bit_cast<double>(u64()); }

static constexpr uint8_t kMagic[4] = {'A', 'L', 'G', 'N'};

void write_header(ByteWriter& w, CheckpointKind kind) {
    w.bytes(kMagic);
    w.u16(kFormatVersion);
    w.u16(static_cast<uint16_t>(kind));
}

CheckpointKind read_header(ByteReader& r) {
    for (uint8_t expected : kMagic)
        if (r.u8() != expected) throw SerializeError("bad magic bytes");
    const uint16_t version = r.u16();
    if (version != kFormatVersion) throw SerializeError("unsupported format version");
    return static_cast<CheckpointKind>(r.u16());
}

void write_mlp_spec(ByteWriter& w, const MlpSpec& spec) {
    w.u32(static_cast<uint32_t>(spec.input_dim));
    w.u32(static_cast<uint32_t>(spec.hidden_layers));
    w.u32(static_cast<uint32_t>(spec.hidden_width));
    w.u32(static_cast<uint32_t>(spec.output_dim));
    w.u32(0);  // hidden activation: tanh
    w.u32(static_cast<uint32_t>(spec.output_activation));
    w.f64(spec.lo);
    w.f64(spec.hi);
}

MlpSpec read_mlp_spec(ByteReader& r) {
    MlpSpec spec;
    spec.input_dim = static_cast<int>(r.u32());
    spec.hidden_layers = static_cast<int>(r.u32());
    spec.hidden_width = static_cast<int>(r.u32());
    spec.output_dim = static_cast<int>(r.u32());
    const uint32_t hidden_act = r.u32();
    if (hidden_act != 0) throw SerializeError("unknown hidden activation");
    const uint32_t out_act = r.u32();
    if (out_act > 3) throw SerializeError("unknown output activation");
    spec.output_activation = static_cast<OutputActivation>(out_act);
    spec.lo = r.f64();
    spec.hi = r.f64();
    spec.validate();
    return spec;
}

void write_mlp(ByteWriter& w, const MlpSpec& spec, const MlpParams& params) {
    write_mlp_spec(w, spec);
    for (size_t k = 0; k < params.w.size(); ++k) {
        for (double x : params.w[k].a) w.f64(x);  // row-major weights
        for (double x : params.b[k]) w.f64(x);
    }
}

MlpParams read_mlp(ByteReader& r, const MlpSpec& spec) {
    MlpParams p = mlp_zeros(spec);
    for (size_t k = 0; k < p.w.size(); ++k) {
        for (double& x : p.w[k].a) x = r.f64();
        for (double& x : p.b[k]) x = r.f64();
    }
    return p;
}

void write_adamw(ByteWriter& w, const AdamWState& st) {
    w.f64(st.cfg.lr);
    w.f64(st.cfg.beta1);
    w.f64(st.cfg.beta2);
    w.f64(st.cfg.eps);
    w.f64(st.cfg.weight_decay);
    w.u64(st.step);
    auto dump = [&](const MlpParams& p) {
        for (size_t k = 0; k < p.w.size(); ++k) {
            for (double x : p.w[k].a) w.f64(x);
            for (double x : p.b[k]) w.f64(x);
        }
    };
    dump(st.m);
    dump(st.v);
}

AdamWState read_adamw(ByteReader& r, const MlpSpec& spec) {
    AdamWState st;
    st.cfg.lr = r.f64();
    st.cfg.beta1 = r.f64();
    st.cfg.beta2 = r.f64();
    st.cfg.eps = r.f64();
    st.cfg.weight_decay = r.f64();
    st.step = r.u64();
    st.m = mlp_zeros(spec);
    st.v = mlp_zeros(spec);
    auto slurp = [&](MlpParams& p) {
        for (size_t k = 0; k < p.w.size(); ++k) {
            for (double& x : p.w[k].a) x = r.f64();
            for (double& x : p.b[k]) x = r.f64();
        }
    };
    slurp(st.m);
    slurp(st.v);
    return st;
}

void save_bytes(const std::filesystem::path& path, std::span<const uint8_t> data) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw SerializeError("cannot open for writing: " + path.string());
    f.write(reinterpret_cast<const char*>(data.data()), static_cast<std::streamsize>(data.size()));
    if (!f) throw SerializeError("write failed: " + path.string());
}

std::vector<uint8_t> load_bytes(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary | std::ios::ate);
    if (!f) throw SerializeError("cannot open: " + path.string());
    const std::streamsize size = f.tellg();
    f.seekg(0);
    std::vector<uint8_t> buf(static_cast<size_t>(size));
    f.read(reinterpret_cast<char*>(buf.data()), size);
    if (!f) throw SerializeError("read failed: " + path.string());
    return buf;
}

}  // namespace alab
