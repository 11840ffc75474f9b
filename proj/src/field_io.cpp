#include "rgflow/field_io.hpp"

#include "rgflow/error.hpp"

#include "json.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>

namespace rgflow {

namespace {

using nlohmann::json;

const std::vector<std::string> kTensorComponents = {"a_xx", "a_xy", "a_yy"};
const std::vector<std::string> kPressureComponents = {"phi"};

std::uint64_t to_little_endian(std::uint64_t v) {
    if constexpr (std::endian::native == std::endian::big) {
        std::uint64_t r = 0;
        for (int b = 0; b < 8; ++b) r |= ((v >> (8 * b)) & 0xffu) << (8 * (7 - b));
        return r;
    }
    return v;
}

void append_payload(std::string& out, const std::vector<double>& values) {
    const auto start = out.size();
    out.resize(start + values.size() * 8);
    char* dst = out.data() + start;
    for (double v : values) {
        const std::uint64_t bits = to_little_endian(std::bit_cast<std::uint64_t>(v));
        std::memcpy(dst, &bits, 8);
        dst += 8;
    }
}

double decode(const char* src) {
    std::uint64_t bits;
    std::memcpy(&bits, src, 8);
    return std::bit_cast<double>(to_little_endian(bits));
}

} // namespace

void write_container(const std::filesystem::path& path, const FieldContainer& container) {
    const auto cells = static_cast<std::size_t>(container.n) * container.n;
    if (container.components.size() != container.data.size())
        throw FormatError("component names and data arrays differ in count");
    for (const auto& d : container.data)
        if (d.size() != cells) throw FormatError("component length does not equal n*n");

    json manifest = {{"format_version", kFieldFormatVersion},
                     {"n", container.n},
                     {"components", container.components},
                     {"dtype", "f64le"},
                     {"layout", "row-major"}};
    std::string bytes = manifest.dump();
    bytes.push_back('\0');
    for (const auto& d : container.data) append_payload(bytes, d);

    // Write to a sibling temp file, then rename, so readers never see a partial file.
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot open " + tmp.string() + " for writing");
        out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
        if (!out) throw IoError("write failed for " + tmp.string());
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) throw IoError("cannot rename " + tmp.string() + ": " + ec.message());
}

FieldContainer read_container(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

    const auto nul = bytes.find('\0');
    if (nul == std::string::npos) throw FormatError(path.string() + ": manifest terminator missing");

    json manifest;
    try {
        manifest = json::parse(bytes.substr(0, nul));
    } catch (const json::exception& e) {
        throw FormatError(path.string() + ": malformed manifest: " + e.what());
    }

    FieldContainer c;
    try {
        if (manifest.at("format_version").get<int>() != kFieldFormatVersion)
            throw FormatError(path.string() + ": unsupported format_version");
        if (manifest.at("dtype").get<std::string>() != "f64le")
            throw FormatError(path.string() + ": unsupported dtype");
        if (manifest.at("layout").get<std::string>() != "row-major")
            throw FormatError(path.string() + ": unsupported layout");
        c.n = manifest.at("n").get<int>();
        c.components = manifest.at("components").get<std::vector<std::string>>();
    } catch (const json::exception& e) {
        throw FormatError(path.string() + ": malformed manifest: " + e.what());
    }
    if (c.n <= 0) throw FormatError(path.string() + ": n must be positive");

    const auto cells = static_cast<std::size_t>(c.n) * c.n;
    const auto expected = cells * 8 * c.components.size();
    const auto actual = bytes.size() - nul - 1;
    if (actual != expected) {
        std::ostringstream msg;
        msg << path.string() << ": payload length mismatch: expected " << expected
            << " bytes, found " << actual;
        throw FormatError(msg.str());
    }

    const char* src = bytes.data() + nul + 1;
    c.data.resize(c.components.size());
    for (auto& d : c.data) {
        d.resize(cells);
        for (auto& v : d) {
            v = decode(src);
            src += 8;
        }
    }
    return c;
}

void write_field(const TensorField& field, const std::filesystem::path& path) {
    const auto xx = field.axx();
    const auto xy = field.axy();
    const auto yy = field.ayy();
    write_container(path, FieldContainer{field.n(),
                                         kTensorComponents,
                                         {{xx.begin(), xx.end()},
                                          {xy.begin(), xy.end()},
                                          {yy.begin(), yy.end()}}});
}

TensorField read_field(const std::filesystem::path& path) {
    auto c = read_container(path);
    if (c.components != kTensorComponents)
        throw FormatError(path.string() + ": expected components [a_xx, a_xy, a_yy]");
    GridShape shape(c.n);
    return TensorField(shape, std::move(c.data[0]), std::move(c.data[1]), std::move(c.data[2]));
}

void write_pressure(const PressureField& field, const std::filesystem::path& path) {
    const auto phi = field.phi();
    write_container(path, FieldContainer{field.n(), kPressureComponents, {{phi.begin(), phi.end()}}});
}

PressureField read_pressure(const std::filesystem::path& path) {
    auto c = read_container(path);
    if (c.components != kPressureComponents)
        throw FormatError(path.string() + ": expected components [phi]");
    return PressureField(GridShape(c.n), std::move(c.data[0]));
}

} // namespace rgflow
