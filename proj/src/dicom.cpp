#include "nodseg/dicom.hpp"

#include <cstring>
#include <fstream>
#include <stdexcept>

namespace nodseg {

namespace {

constexpr const char* kExplicitLE = "1.2.840.10008.1.2.1";

struct Tag {
    uint16_t group = 0, element = 0;
    bool operator==(const Tag&) const = default;
};

std::string tag_str(Tag t) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "(%04X,%04X)", t.group, t.element);
    return buf;
}

constexpr Tag kTransferSyntax{0x0002, 0x0010};
constexpr Tag kPatientId{0x0010, 0x0020};
constexpr Tag kSeriesUid{0x0020, 0x000E};
constexpr Tag kInstanceNumber{0x0020, 0x0013};
constexpr Tag kPhotometric{0x0028, 0x0004};
constexpr Tag kRows{0x0028, 0x0010};
constexpr Tag kColumns{0x0028, 0x0011};
constexpr Tag kPixelSpacing{0x0028, 0x0030};
constexpr Tag kBitsAllocated{0x0028, 0x0100};
constexpr Tag kPixelRepresentation{0x0028, 0x0103};
constexpr Tag kRescaleIntercept{0x0028, 0x1052};
constexpr Tag kRescaleSlope{0x0028, 0x1053};
constexpr Tag kPixelData{0x7FE0, 0x0010};

bool is_long_form_vr(const char vr[2]) {
    static const char* longs[] = {"OB", "OW", "OF", "OD", "OL", "SQ", "UC", "UR", "UT", "UN"};
    for (const char* s : longs)
        if (vr[0] == s[0] && vr[1] == s[1]) return true;
    return false;
}

std::string trim_padding(std::string s) {
    while (!s.empty() && (s.back() == ' ' || s.back() == '\0')) s.pop_back();
    return s;
}

struct Cursor {
    const std::vector<uint8_t>& buf;
    size_t pos = 0;

    size_t remaining() const { return buf.size() - pos; }
    void need(size_t n, const std::string& what) const {
        if (pos + n > buf.size())
            throw std::runtime_error("dicom: truncated file while reading " + what);
    }
    uint16_t u16(const std::string& what) {
        need(2, what);
        uint16_t v = uint16_t(buf[pos]) | uint16_t(buf[pos + 1]) << 8;
        pos += 2;
        return v;
    }
    uint32_t u32(const std::string& what) {
        need(4, what);
        uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= uint32_t(buf[pos + i]) << (8 * i);
        pos += 4;
        return v;
    }
};

double parse_ds(const std::string& value, const std::string& what) {
    try {
        size_t used = 0;
        double v = std::stod(value, &used);
        (void)used;
        return v;
    } catch (const std::exception&) {
        throw std::runtime_error("dicom: cannot parse decimal string '" + value + "' in " + what);
    }
}

} // namespace

RawSlice parse_dicom(const std::vector<uint8_t>& bytes) {
    if (bytes.size() < 132 || std::memcmp(bytes.data() + 128, "DICM", 4) != 0)
        throw std::runtime_error("dicom: missing DICM magic, not a DICOM part-10 file");

    Cursor cur{bytes, 132};

    RawSlice slice;
    bool have_rows = false, have_cols = false, have_pixeldata = false;
    bool have_slope = false, have_intercept = false;
    bool transfer_syntax_checked = false;
    int bits_allocated = 16;
    int pixel_representation = 0;
    size_t pixel_off = 0, pixel_len = 0;

    while (cur.remaining() > 0) {
        Tag tag;
        tag.group = cur.u16("element tag");
        tag.element = cur.u16("element tag");
        const std::string name = tag_str(tag);

        cur.need(2, "VR of " + name);
        char vr[2] = {char(bytes[cur.pos]), char(bytes[cur.pos + 1])};
        cur.pos += 2;

        uint32_t len;
        if (is_long_form_vr(vr)) {
            cur.pos += 2; // reserved
            len = cur.u32("length of " + name);
        } else {
            len = cur.u16("length of " + name);
        }
        if (len == 0xFFFFFFFFu)
            throw std::runtime_error("dicom: undefined-length element " + name + " is not supported");

        // first dataset element: the transfer syntax must have been seen and
        // must be the one syntax this parser reads
        if (tag.group != 0x0002 && !transfer_syntax_checked)
            throw std::runtime_error("dicom: missing TransferSyntaxUID (0002,0010)");

        if (tag == kPixelData) {
            cur.need(len, "PixelData value");
            pixel_off = cur.pos;
            pixel_len = len;
            have_pixeldata = true;
            cur.pos += len;
            continue;
        }

        cur.need(len, "value of " + name);
        const std::string value(reinterpret_cast<const char*>(bytes.data() + cur.pos), len);
        cur.pos += len;

        if (tag == kTransferSyntax) {
            const std::string uid = trim_padding(value);
            if (uid != kExplicitLE)
                throw std::runtime_error(
                    "dicom: unsupported transfer syntax '" + uid +
                    "' in TransferSyntaxUID (0002,0010); only explicit VR little endian (" +
                    kExplicitLE + ") is supported");
            transfer_syntax_checked = true;
        } else if (tag == kRows) {
            if (len != 2) throw std::runtime_error("dicom: bad length for Rows (0028,0010)");
            slice.rows = int(uint16_t(uint8_t(value[0])) | uint16_t(uint8_t(value[1])) << 8);
            have_rows = true;
        } else if (tag == kColumns) {
            if (len != 2) throw std::runtime_error("dicom: bad length for Columns (0028,0011)");
            slice.cols = int(uint16_t(uint8_t(value[0])) | uint16_t(uint8_t(value[1])) << 8);
            have_cols = true;
        } else if (tag == kBitsAllocated) {
            bits_allocated = int(uint16_t(uint8_t(value[0])) | uint16_t(uint8_t(value[1])) << 8);
        } else if (tag == kPixelRepresentation) {
            pixel_representation = int(uint16_t(uint8_t(value[0])) | uint16_t(uint8_t(value[1])) << 8);
        } else if (tag == kPhotometric) {
            const std::string photo = trim_padding(value);
            if (photo == "MONOCHROME1")
                throw std::runtime_error(
                    "dicom: MONOCHROME1 photometric interpretation (inverted grayscale) is rejected");
        } else if (tag == kRescaleSlope) {
            slice.rescale_slope = parse_ds(trim_padding(value), "RescaleSlope (0028,1053)");
            have_slope = true;
        } else if (tag == kRescaleIntercept) {
            slice.rescale_intercept = parse_ds(trim_padding(value), "RescaleIntercept (0028,1052)");
            have_intercept = true;
        } else if (tag == kPixelSpacing) {
            const std::string v = trim_padding(value);
            const size_t sep = v.find('\\');
            if (sep == std::string::npos)
                throw std::runtime_error("dicom: PixelSpacing (0028,0030) must hold two values");
            const double row_mm = parse_ds(v.substr(0, sep), "PixelSpacing");
            const double col_mm = parse_ds(v.substr(sep + 1), "PixelSpacing");
            if (!(row_mm > 0) || !(col_mm > 0))
                throw std::runtime_error("dicom: PixelSpacing components must be > 0");
            slice.pixel_spacing = {row_mm, col_mm};
        } else if (tag == kPatientId) {
            slice.patient_id = trim_padding(value);
        } else if (tag == kSeriesUid) {
            slice.series_id = trim_padding(value);
        } else if (tag == kInstanceNumber) {
            const std::string v = trim_padding(value);
            slice.instance_number = v.empty() ? 0 : std::atoi(v.c_str());
        }
        // other elements are skipped
    }

    if (!have_rows) throw std::runtime_error("dicom: missing required element Rows (0028,0010)");
    if (!have_cols) throw std::runtime_error("dicom: missing required element Columns (0028,0011)");
    if (!have_pixeldata)
        throw std::runtime_error("dicom: missing required element PixelData (7FE0,0010)");
    if (slice.rows <= 0 || slice.cols <= 0)
        throw std::runtime_error("dicom: Rows/Columns must be positive");
    if (bits_allocated != 8 && bits_allocated != 16)
        throw std::runtime_error("dicom: unsupported BitsAllocated " + std::to_string(bits_allocated));
    if (!(slice.rescale_slope > 0))
        throw std::runtime_error("dicom: RescaleSlope must be > 0");

    const size_t npx = size_t(slice.rows) * size_t(slice.cols);
    const size_t bytes_per = size_t(bits_allocated) / 8;
    if (pixel_len < npx * bytes_per)
        throw std::runtime_error("dicom: PixelData (7FE0,0010) holds " + std::to_string(pixel_len) +
                                 " bytes, expected " + std::to_string(npx * bytes_per));

    slice.stored.resize(npx);
    const uint8_t* px = bytes.data() + pixel_off;
    if (bits_allocated == 8) {
        for (size_t i = 0; i < npx; ++i)
            slice.stored[i] = pixel_representation ? int32_t(int8_t(px[i])) : int32_t(px[i]);
    } else {
        for (size_t i = 0; i < npx; ++i) {
            const uint16_t raw = uint16_t(px[2 * i]) | uint16_t(px[2 * i + 1]) << 8;
            slice.stored[i] = pixel_representation ? int32_t(int16_t(raw)) : int32_t(raw);
        }
    }

    if (!have_slope) slice.warnings.push_back("RescaleSlope missing, defaulting to 1.0");
    if (!have_intercept) slice.warnings.push_back("RescaleIntercept missing, defaulting to 0.0");
    if (!slice.pixel_spacing) slice.warnings.push_back("PixelSpacing missing");
    return slice;
}

namespace {

struct Writer {
    std::vector<uint8_t> buf;

    void raw(const void* p, size_t n) {
        const auto* b = static_cast<const uint8_t*>(p);
        buf.insert(buf.end(), b, b + n);
    }
    void u16(uint16_t v) {
        buf.push_back(uint8_t(v & 0xFF));
        buf.push_back(uint8_t(v >> 8));
    }
    void u32(uint32_t v) {
        for (int i = 0; i < 4; ++i) buf.push_back(uint8_t((v >> (8 * i)) & 0xFF));
    }

    void element(uint16_t group, uint16_t elem, const char vr[2], const std::vector<uint8_t>& value) {
        u16(group);
        u16(elem);
        buf.push_back(uint8_t(vr[0]));
        buf.push_back(uint8_t(vr[1]));
        if (is_long_form_vr(vr)) {
            u16(0);
            u32(uint32_t(value.size()));
        } else {
            u16(uint16_t(value.size()));
        }
        raw(value.data(), value.size());
    }

    void str_element(uint16_t group, uint16_t elem, const char vr[2], std::string v) {
        if (v.size() % 2) v.push_back(vr[0] == 'U' && vr[1] == 'I' ? '\0' : ' ');
        element(group, elem, vr, std::vector<uint8_t>(v.begin(), v.end()));
    }

    void us_element(uint16_t group, uint16_t elem, uint16_t v) {
        std::vector<uint8_t> b{uint8_t(v & 0xFF), uint8_t(v >> 8)};
        element(group, elem, "US", b);
    }
};

} // namespace

std::vector<uint8_t> write_dicom(const RawSlice& slice) {
    Writer w;
    w.buf.assign(128, 0);
    w.raw("DICM", 4);

    // file meta group, explicit VR little endian
    {
        Writer meta;
        meta.str_element(0x0002, 0x0010, "UI", kExplicitLE);
        std::vector<uint8_t> len(4);
        const uint32_t n = uint32_t(meta.buf.size());
        for (int i = 0; i < 4; ++i) len[size_t(i)] = uint8_t((n >> (8 * i)) & 0xFF);
        w.element(0x0002, 0x0000, "UL", len);
        w.raw(meta.buf.data(), meta.buf.size());
    }

    w.str_element(0x0010, 0x0020, "LO", slice.patient_id);
    w.str_element(0x0020, 0x000E, "UI", slice.series_id);
    w.str_element(0x0020, 0x0013, "IS", std::to_string(slice.instance_number));
    w.us_element(0x0028, 0x0002, 1); // SamplesPerPixel
    w.str_element(0x0028, 0x0004, "CS", "MONOCHROME2");
    w.us_element(0x0028, 0x0010, uint16_t(slice.rows));
    w.us_element(0x0028, 0x0011, uint16_t(slice.cols));
    if (slice.pixel_spacing) {
        char sp[64];
        std::snprintf(sp, sizeof(sp), "%g\\%g", slice.pixel_spacing->first,
                      slice.pixel_spacing->second);
        w.str_element(0x0028, 0x0030, "DS", sp);
    }
    w.us_element(0x0028, 0x0100, 16); // BitsAllocated
    w.us_element(0x0028, 0x0101, 16); // BitsStored
    w.us_element(0x0028, 0x0102, 15); // HighBit
    w.us_element(0x0028, 0x0103, 1);  // PixelRepresentation: signed
    {
        char v[32];
        std::snprintf(v, sizeof(v), "%g", slice.rescale_intercept);
        w.str_element(0x0028, 0x1052, "DS", v);
        std::snprintf(v, sizeof(v), "%g", slice.rescale_slope);
        w.str_element(0x0028, 0x1053, "DS", v);
    }
    {
        std::vector<uint8_t> px(slice.stored.size() * 2);
        for (size_t i = 0; i < slice.stored.size(); ++i) {
            const int32_t v = slice.stored[i];
            if (v < -32768 || v > 32767)
                throw std::runtime_error("dicom: stored value out of signed 16-bit range");
            const uint16_t raw = uint16_t(int16_t(v));
            px[2 * i] = uint8_t(raw & 0xFF);
            px[2 * i + 1] = uint8_t(raw >> 8);
        }
        w.element(0x7FE0, 0x0010, "OW", px);
    }
    return std::move(w.buf);
}

std::vector<uint8_t> read_binary_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open '" + path + "'");
    return std::vector<uint8_t>((std::istreambuf_iterator<char>(in)),
                                std::istreambuf_iterator<char>());
}

void write_binary_file(const std::string& path, const std::vector<uint8_t>& bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
    out.write(reinterpret_cast<const char*>(bytes.data()), std::streamsize(bytes.size()));
    if (!out) throw std::runtime_error("write failed for '" + path + "'");
}

} // namespace nodseg
