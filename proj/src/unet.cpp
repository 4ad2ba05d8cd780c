#include "nodseg/unet.hpp"

#include <array>
#include <cstring>
#include <fstream>
#include <vector>

namespace nodseg {

uint32_t crc32_ieee(const void* data, size_t len, uint32_t seed) {
    static const auto table = [] {
        std::array<uint32_t, 256> t{};
        for (uint32_t i = 0; i < 256; ++i) {
            uint32_t c = i;
            for (int k = 0; k < 8; ++k) c = (c & 1) ? 0xEDB88320u ^ (c >> 1) : c >> 1;
            t[i] = c;
        }
        return t;
    }();
    uint32_t crc = seed ^ 0xFFFFFFFFu;
    const auto* p = static_cast<const unsigned char*>(data);
    for (size_t i = 0; i < len; ++i) crc = table[(crc ^ p[i]) & 0xFFu] ^ (crc >> 8);
    return crc ^ 0xFFFFFFFFu;
}

namespace {

constexpr char kMagic[8] = {'U', 'N', 'E', 'T', 'C', 'K', 'P', 'T'};
constexpr uint16_t kVersion = 1;

void put_u16(std::vector<char>& buf, uint16_t v) {
    buf.push_back(char(v & 0xFF));
    buf.push_back(char((v >> 8) & 0xFF));
}

void put_u32(std::vector<char>& buf, uint32_t v) {
    for (int i = 0; i < 4; ++i) buf.push_back(char((v >> (8 * i)) & 0xFF));
}

struct Reader {
    const std::vector<char>& buf;
    size_t pos = 0;

    void need(size_t n) const {
        if (pos + n > buf.size()) throw std::runtime_error("checkpoint: truncated file");
    }
    uint16_t u16() {
        need(2);
        uint16_t v = uint16_t(uint8_t(buf[pos])) | uint16_t(uint8_t(buf[pos + 1])) << 8;
        pos += 2;
        return v;
    }
    uint32_t u32() {
        need(4);
        uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= uint32_t(uint8_t(buf[pos + i])) << (8 * i);
        pos += 4;
        return v;
    }
    std::string str(size_t n) {
        need(n);
        std::string s(buf.data() + pos, n);
        pos += n;
        return s;
    }
};

} // namespace

void save_checkpoint(UNetF& model, const std::string& path) {
    std::vector<char> buf;
    buf.insert(buf.end(), kMagic, kMagic + 8);
    put_u16(buf, kVersion);
    put_u32(buf, uint32_t(model.cfg.levels));
    put_u32(buf, uint32_t(model.cfg.base_channels));
    put_u32(buf, uint32_t(model.cfg.in_channels));
    put_u32(buf, uint32_t(model.cfg.out_channels));

    uint32_t count = 0;
    model.for_each_param([&](Parameter<float>&) { ++count; });
    put_u32(buf, count);

    model.for_each_param([&](Parameter<float>& p) {
        put_u16(buf, uint16_t(p.name.size()));
        buf.insert(buf.end(), p.name.begin(), p.name.end());
        buf.push_back(char(4)); // rank
        for (int d : p.value.shape) put_u32(buf, uint32_t(d));
        const size_t off = buf.size();
        buf.resize(off + p.value.numel() * 4);
        std::memcpy(buf.data() + off, p.value.data.data(), p.value.numel() * 4);
    });

    put_u32(buf, crc32_ieee(buf.data(), buf.size()));

    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("checkpoint: cannot open '" + path + "' for writing");
    out.write(buf.data(), std::streamsize(buf.size()));
    if (!out) throw std::runtime_error("checkpoint: write failed for '" + path + "'");
}

UNetF load_checkpoint(const std::string& path, const UNetConfig* expected) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("checkpoint: cannot open '" + path + "'");
    std::vector<char> buf((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

    if (buf.size() < 8 + 2 + 4 * 5 + 4) throw std::runtime_error("checkpoint: truncated file");
    const uint32_t stored_crc = uint32_t(uint8_t(buf[buf.size() - 4])) |
                                uint32_t(uint8_t(buf[buf.size() - 3])) << 8 |
                                uint32_t(uint8_t(buf[buf.size() - 2])) << 16 |
                                uint32_t(uint8_t(buf[buf.size() - 1])) << 24;
    if (crc32_ieee(buf.data(), buf.size() - 4) != stored_crc)
        throw std::runtime_error("checkpoint: checksum mismatch in '" + path + "'");

    Reader r{buf};
    if (r.str(8) != std::string(kMagic, 8)) throw std::runtime_error("checkpoint: bad magic");
    const uint16_t version = r.u16();
    if (version != kVersion)
        throw std::runtime_error("checkpoint: unsupported format version " + std::to_string(version));

    UNetConfig cfg;
    cfg.levels = int(r.u32());
    cfg.base_channels = int(r.u32());
    cfg.in_channels = int(r.u32());
    cfg.out_channels = int(r.u32());
    cfg.validate();
    if (expected && !(cfg == *expected))
        throw std::runtime_error("checkpoint: config mismatch, file has levels=" +
                                 std::to_string(cfg.levels) + " base=" +
                                 std::to_string(cfg.base_channels) + " in=" +
                                 std::to_string(cfg.in_channels) + " out=" +
                                 std::to_string(cfg.out_channels));

    UNetF model = build_unet<float>(cfg, 0);
    const uint32_t count = r.u32();
    uint32_t expected_count = 0;
    model.for_each_param([&](Parameter<float>&) { ++expected_count; });
    if (count != expected_count)
        throw std::runtime_error("checkpoint: parameter count " + std::to_string(count) +
                                 " does not match config (expected " +
                                 std::to_string(expected_count) + ")");

    model.for_each_param([&](Parameter<float>& p) {
        const uint16_t name_len = r.u16();
        const std::string name = r.str(name_len);
        if (name != p.name)
            throw std::runtime_error("checkpoint: unexpected parameter '" + name + "', expected '" +
                                     p.name + "'");
        r.need(1);
        const int rank = uint8_t(buf[r.pos++]);
        if (rank != 4) throw std::runtime_error("checkpoint: bad rank for parameter '" + name + "'");
        std::array<int, 4> shape{};
        for (int& d : shape) d = int(r.u32());
        if (shape != p.value.shape)
            throw std::runtime_error("checkpoint: shape mismatch for parameter '" + name +
                                     "' vs embedded config");
        r.need(p.value.numel() * 4);
        std::memcpy(p.value.data.data(), buf.data() + r.pos, p.value.numel() * 4);
        r.pos += p.value.numel() * 4;
    });
    if (r.pos != buf.size() - 4) throw std::runtime_error("checkpoint: trailing bytes");
    return model;
}

} // namespace nodseg
