#include "rara/errors.hpp"
#include "rara/scene.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>
#include <unordered_map>

namespace rara {
namespace {

static_assert(std::endian::native == std::endian::little, "PLY reader assumes a little-endian host");

enum class PlyType { Int8, UInt8, Int16, UInt16, Int32, UInt32, Float32, Float64 };

PlyType parse_type(const std::string& name) {
    static const std::unordered_map<std::string, PlyType> types = {
        {"char", PlyType::Int8},     {"int8", PlyType::Int8},      {"uchar", PlyType::UInt8},
        {"uint8", PlyType::UInt8},   {"short", PlyType::Int16},    {"int16", PlyType::Int16},
        {"ushort", PlyType::UInt16}, {"uint16", PlyType::UInt16},  {"int", PlyType::Int32},
        {"int32", PlyType::Int32},   {"uint", PlyType::UInt32},    {"uint32", PlyType::UInt32},
        {"float", PlyType::Float32}, {"float32", PlyType::Float32}, {"double", PlyType::Float64},
        {"float64", PlyType::Float64},
    };
    auto it = types.find(name);
    if (it == types.end()) {
        throw FormatError("unknown PLY property type '" + name + "'");
    }
    return it->second;
}

std::size_t type_size(PlyType t) {
    switch (t) {
    case PlyType::Int8:
    case PlyType::UInt8: return 1;
    case PlyType::Int16:
    case PlyType::UInt16: return 2;
    case PlyType::Int32:
    case PlyType::UInt32:
    case PlyType::Float32: return 4;
    case PlyType::Float64: return 8;
    }
    return 0;
}

template <typename T>
T load_as(const std::uint8_t* p) {
    T v;
    std::memcpy(&v, p, sizeof(T));
    return v;
}

double read_value(const std::uint8_t* p, PlyType t) {
    switch (t) {
    case PlyType::Int8: return load_as<std::int8_t>(p);
    case PlyType::UInt8: return load_as<std::uint8_t>(p);
    case PlyType::Int16: return load_as<std::int16_t>(p);
    case PlyType::UInt16: return load_as<std::uint16_t>(p);
    case PlyType::Int32: return load_as<std::int32_t>(p);
    case PlyType::UInt32: return load_as<std::uint32_t>(p);
    case PlyType::Float32: return load_as<float>(p);
    case PlyType::Float64: return load_as<double>(p);
    }
    return 0.0;
}

struct Property {
    std::string name;
    PlyType type;
    std::size_t offset;
};

struct Element {
    std::string name;
    std::size_t count = 0;
    std::vector<Property> properties;
    std::size_t stride = 0;
};

constexpr std::array<const char*, 14> kRequired = {
    "x",     "y",     "z",     "scale_0", "scale_1", "scale_2", "rot_0",
    "rot_1", "rot_2", "rot_3", "opacity", "f_dc_0",  "f_dc_1",  "f_dc_2",
};
constexpr std::size_t kRequiredCount = kRequired.size();

double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }

} // namespace

Scene load_ply(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw FormatError("cannot open " + path.string());
    }
    const std::string where = path.string() + ": ";

    std::string line;
    if (!std::getline(in, line) || line.substr(0, 3) != "ply") {
        throw FormatError(where + "missing 'ply' magic");
    }
    std::vector<Element> elements;
    bool format_seen = false;
    while (true) {
        if (!std::getline(in, line)) {
            throw FormatError(where + "unterminated header");
        }
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        std::istringstream ls(line);
        std::string keyword;
        ls >> keyword;
        if (keyword == "end_header") {
            break;
        }
        if (keyword == "format") {
            std::string fmt;
            ls >> fmt;
            if (fmt != "binary_little_endian") {
                throw FormatError(where + "unsupported PLY format '" + fmt + "'");
            }
            format_seen = true;
        } else if (keyword == "element") {
            Element e;
            ls >> e.name >> e.count;
            if (!ls) {
                throw FormatError(where + "malformed element line");
            }
            elements.push_back(std::move(e));
        } else if (keyword == "property") {
            if (elements.empty()) {
                throw FormatError(where + "property before any element");
            }
            std::string type_name, name;
            ls >> type_name;
            if (type_name == "list") {
                throw FormatError(where + "list properties are not supported");
            }
            ls >> name;
            auto& e = elements.back();
            const PlyType t = parse_type(type_name);
            e.properties.push_back({name, t, e.stride});
            e.stride += type_size(t);
        }
        // comment / obj_info lines are skipped
    }
    if (!format_seen) {
        throw FormatError(where + "missing format line");
    }

    std::size_t skip_bytes = 0;
    const Element* vertex = nullptr;
    for (const auto& e : elements) {
        if (e.name == "vertex") {
            vertex = &e;
            break;
        }
        skip_bytes += e.count * e.stride;
    }
    if (vertex == nullptr) {
        throw FormatError(where + "no vertex element");
    }

    std::array<const Property*, kRequiredCount> fields{};
    for (std::size_t i = 0; i < kRequiredCount; ++i) {
        for (const auto& p : vertex->properties) {
            if (p.name == kRequired[i]) {
                fields[i] = &p;
            }
        }
        if (fields[i] == nullptr) {
            throw FormatError(where + "missing required vertex property '" + kRequired[i] + "'");
        }
    }
    if (vertex->count == 0) {
        throw EmptySceneError(where + "zero vertices");
    }

    in.seekg(static_cast<std::streamoff>(skip_bytes), std::ios::cur);
    std::vector<std::uint8_t> data(vertex->count * vertex->stride);
    in.read(reinterpret_cast<char*>(data.data()), static_cast<std::streamsize>(data.size()));
    if (static_cast<std::size_t>(in.gcount()) != data.size()) {
        throw FormatError(where + "truncated vertex data");
    }

    std::vector<Gaussian> gaussians(vertex->count);
    std::array<double, kRequiredCount> raw{};
    std::array<double, kRequiredCount> decoded{};
    for (std::size_t i = 0; i < vertex->count; ++i) {
        const std::uint8_t* record = data.data() + i * vertex->stride;
        for (std::size_t f = 0; f < kRequiredCount; ++f) {
            raw[f] = read_value(record + fields[f]->offset, fields[f]->type);
        }
        for (std::size_t f = 0; f < 3; ++f) {
            decoded[f] = raw[f];
            decoded[3 + f] = std::exp(raw[3 + f]);
            decoded[11 + f] = std::clamp(0.5 + kShC0 * raw[11 + f], 0.0, 1.0);
        }
        for (std::size_t f = 6; f < 10; ++f) {
            decoded[f] = raw[f];
        }
        decoded[10] = logistic(raw[10]);
        for (std::size_t f = 0; f < kRequiredCount; ++f) {
            // clamp() maps NaN to a bound on some paths, so test the raw value too.
            if (!std::isfinite(decoded[f]) || !std::isfinite(raw[f])) {
                throw FormatError(where + "record " + std::to_string(i) + ": non-finite value in field '" +
                                  kRequired[f] + "'");
            }
        }
        auto& g = gaussians[i];
        g.mu = {decoded[0], decoded[1], decoded[2]};
        g.scale = {decoded[3], decoded[4], decoded[5]};
        g.rotation = Eigen::Quaterniond(decoded[6], decoded[7], decoded[8], decoded[9]);
        const double qn = g.rotation.norm();
        if (qn == 0.0) {
            throw FormatError(where + "record " + std::to_string(i) + ": zero quaternion in field 'rot_0'");
        }
        g.rotation.coeffs() /= qn;
        g.delta = decoded[10];
        g.color = {decoded[11], decoded[12], decoded[13]};
    }
    return Scene(path.stem().string(), std::move(gaussians));
}

void write_ply(const Scene& scene, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw FormatError("cannot write " + path.string());
    }
    out << "ply\nformat binary_little_endian 1.0\n";
    out << "element vertex " << scene.size() << "\n";
    for (std::size_t f = 0; f < kRequiredCount; ++f) {
        out << "property float " << kRequired[f] << "\n";
    }
    out << "end_header\n";

    std::vector<float> record(kRequiredCount);
    for (const auto& g : scene.gaussians()) {
        for (int k = 0; k < 3; ++k) {
            record[k] = static_cast<float>(g.mu[k]);
            record[3 + k] = static_cast<float>(std::log(g.scale[k]));
            record[11 + k] = static_cast<float>((g.color[k] - 0.5) / kShC0);
        }
        record[6] = static_cast<float>(g.rotation.w());
        record[7] = static_cast<float>(g.rotation.x());
        record[8] = static_cast<float>(g.rotation.y());
        record[9] = static_cast<float>(g.rotation.z());
        const double d = std::min(g.delta, 1.0 - 1e-7);
        record[10] = static_cast<float>(std::log(d / (1.0 - d)));
        out.write(reinterpret_cast<const char*>(record.data()),
                  static_cast<std::streamsize>(record.size() * sizeof(float)));
    }
    if (!out) {
        throw FormatError("write failed for " + path.string());
    }
}

} // namespace rara
