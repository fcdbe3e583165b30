#include "shapecomplete/ply.hpp"

#include "shapecomplete/error.hpp"

#include <bit>
#include <charconv>
#include <cstring>
#include <fstream>
#include <sstream>

namespace shapecomplete {

static_assert(std::endian::native == std::endian::little, "binary PLY I/O assumes a little-endian host");

namespace {

enum class ScalarType { i8, u8, i16, u16, i32, u32, f32, f64 };

std::optional<ScalarType> parse_type(const std::string& s)
{
    if (s == "char" || s == "int8") return ScalarType::i8;
    if (s == "uchar" || s == "uint8") return ScalarType::u8;
    if (s == "short" || s == "int16") return ScalarType::i16;
    if (s == "ushort" || s == "uint16") return ScalarType::u16;
    if (s == "int" || s == "int32") return ScalarType::i32;
    if (s == "uint" || s == "uint32") return ScalarType::u32;
    if (s == "float" || s == "float32") return ScalarType::f32;
    if (s == "double" || s == "float64") return ScalarType::f64;
    return std::nullopt;
}

bool is_integer(ScalarType t) { return t != ScalarType::f32 && t != ScalarType::f64; }

struct Property
{
    std::string name;
    ScalarType type{};
    bool is_list = false;
    ScalarType count_type{};
};

struct Element
{
    std::string name;
    std::size_t count = 0;
    std::vector<Property> properties;
};

template <typename T>
T read_raw(std::istream& in)
{
    T value{};
    in.read(reinterpret_cast<char*>(&value), sizeof(T));
    return value;
}

class Reader
{
public:
    Reader(std::istream& in, bool binary, std::string path) : in_(in), binary_(binary), path_(std::move(path)) {}

    double read(ScalarType t)
    {
        double v = binary_ ? read_binary(t) : read_ascii(t);
        if (!in_)
            throw FormatError("'" + path_ + "': unexpected end of PLY body");
        return v;
    }

private:
    double read_binary(ScalarType t)
    {
        switch (t)
        {
        case ScalarType::i8: return read_raw<std::int8_t>(in_);
        case ScalarType::u8: return read_raw<std::uint8_t>(in_);
        case ScalarType::i16: return read_raw<std::int16_t>(in_);
        case ScalarType::u16: return read_raw<std::uint16_t>(in_);
        case ScalarType::i32: return read_raw<std::int32_t>(in_);
        case ScalarType::u32: return read_raw<std::uint32_t>(in_);
        case ScalarType::f32: return read_raw<float>(in_);
        case ScalarType::f64: return read_raw<double>(in_);
        }
        return 0.0;
    }

    double read_ascii(ScalarType t)
    {
        std::string token;
        if (!(in_ >> token))
            throw FormatError("'" + path_ + "': unexpected end of PLY body");
        double v = 0.0;
        auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), v);
        if (ec != std::errc{} || ptr != token.data() + token.size())
            throw FormatError("'" + path_ + "': bad number '" + token + "' in PLY body");
        if (t == ScalarType::f32)
            v = static_cast<float>(v);
        else if (is_integer(t) && v != static_cast<double>(static_cast<long long>(v)))
            throw FormatError("'" + path_ + "': non-integer value '" + token + "' for integer property");
        return v;
    }

    std::istream& in_;
    bool binary_;
    std::string path_;
};

} // namespace

std::string label_name(int code)
{
    switch (code)
    {
    case 1: return "acetabulum";
    case 2: return "crest";
    default: return "label_" + std::to_string(code);
    }
}

int label_code(const std::string& name)
{
    if (name == "acetabulum")
        return 1;
    if (name == "crest")
        return 2;
    if (name.rfind("label_", 0) == 0)
    {
        int code = 0;
        const char* first = name.data() + 6;
        const char* last = name.data() + name.size();
        auto [ptr, ec] = std::from_chars(first, last, code);
        if (ec == std::errc{} && ptr == last && code != 0 && label_name(code) == name)
            return code;
    }
    throw ConfigError("label '" + name + "' cannot be stored in a PLY label property");
}

PlyContents load_mesh_with_scalars(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw IoError("cannot open '" + path + "'");

    auto fail = [&](const std::string& what) { return FormatError("'" + path + "': " + what); };

    std::string line;
    auto next_line = [&]() {
        if (!std::getline(in, line))
            throw fail("PLY header ended before end_header");
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
    };

    next_line();
    if (line != "ply")
        throw fail("missing 'ply' magic");

    bool binary = false;
    bool have_format = false;
    std::vector<Element> elements;
    for (;;)
    {
        next_line();
        std::istringstream ls(line);
        std::string keyword;
        ls >> keyword;
        if (keyword.empty() || keyword == "comment" || keyword == "obj_info")
            continue;
        if (keyword == "end_header")
            break;
        if (keyword == "format")
        {
            std::string fmt, version;
            ls >> fmt >> version;
            if (fmt == "ascii")
                binary = false;
            else if (fmt == "binary_little_endian")
                binary = true;
            else if (fmt == "binary_big_endian")
                throw fail("big-endian binary PLY is not supported");
            else
                throw fail("unknown PLY format '" + fmt + "'");
            have_format = true;
        }
        else if (keyword == "element")
        {
            Element e;
            long long count = -1;
            ls >> e.name >> count;
            if (e.name.empty() || count < 0)
                throw fail("bad element line '" + line + "'");
            e.count = static_cast<std::size_t>(count);
            elements.push_back(std::move(e));
        }
        else if (keyword == "property")
        {
            if (elements.empty())
                throw fail("property before any element");
            Property p;
            std::string type;
            ls >> type;
            if (type == "list")
            {
                std::string count_type, item_type;
                ls >> count_type >> item_type >> p.name;
                auto ct = parse_type(count_type);
                auto it = parse_type(item_type);
                if (!ct || !it || !is_integer(*ct))
                    throw fail("bad list property '" + line + "'");
                p.is_list = true;
                p.count_type = *ct;
                p.type = *it;
            }
            else
            {
                auto t = parse_type(type);
                if (!t)
                    throw fail("unknown property type '" + type + "'");
                p.type = *t;
                ls >> p.name;
            }
            if (p.name.empty())
                throw fail("property without a name");
            elements.back().properties.push_back(std::move(p));
        }
        else
        {
            throw fail("unexpected header line '" + line + "'");
        }
    }
    if (!have_format)
        throw fail("missing format line");

    Reader reader(in, binary, path);
    std::vector<Point3> vertices;
    std::vector<Face> faces;
    std::vector<int> label_codes;
    std::optional<std::vector<double>> quality;
    bool have_vertices = false, have_faces = false;

    for (const Element& e : elements)
    {
        if (e.name == "vertex")
        {
            int ix = -1, iy = -1, iz = -1, ilabel = -1, iquality = -1;
            for (std::size_t k = 0; k < e.properties.size(); ++k)
            {
                const Property& p = e.properties[k];
                const int idx = static_cast<int>(k);
                if (p.is_list)
                    continue;
                if (p.name == "x") ix = idx;
                else if (p.name == "y") iy = idx;
                else if (p.name == "z") iz = idx;
                else if (p.name == "label")
                {
                    if (!is_integer(p.type))
                        throw fail("vertex property 'label' must be an integer type");
                    ilabel = idx;
                }
                else if (p.name == "quality") iquality = idx;
            }
            if (ix < 0 || iy < 0 || iz < 0)
                throw fail("vertex element lacks x/y/z");
            vertices.resize(e.count);
            if (ilabel >= 0)
                label_codes.resize(e.count);
            if (iquality >= 0)
                quality.emplace(e.count);
            std::vector<double> values(e.properties.size());
            for (std::size_t v = 0; v < e.count; ++v)
            {
                for (std::size_t k = 0; k < e.properties.size(); ++k)
                {
                    const Property& p = e.properties[k];
                    if (p.is_list)
                    {
                        const auto n = static_cast<long long>(reader.read(p.count_type));
                        for (long long j = 0; j < n; ++j)
                            reader.read(p.type);
                        continue;
                    }
                    values[k] = reader.read(p.type);
                }
                vertices[v] = Point3(values[ix], values[iy], values[iz]);
                if (ilabel >= 0)
                    label_codes[v] = static_cast<int>(values[ilabel]);
                if (iquality >= 0)
                    (*quality)[v] = values[iquality];
            }
            have_vertices = true;
        }
        else if (e.name == "face")
        {
            int ilist = -1;
            for (std::size_t k = 0; k < e.properties.size(); ++k)
            {
                const Property& p = e.properties[k];
                if (p.is_list && (p.name == "vertex_indices" || p.name == "vertex_index"))
                    ilist = static_cast<int>(k);
            }
            if (ilist < 0)
                throw fail("face element lacks a vertex_indices list");
            faces.resize(e.count);
            for (std::size_t f = 0; f < e.count; ++f)
            {
                for (std::size_t k = 0; k < e.properties.size(); ++k)
                {
                    const Property& p = e.properties[k];
                    if (!p.is_list)
                    {
                        reader.read(p.type);
                        continue;
                    }
                    const auto n = static_cast<long long>(reader.read(p.count_type));
                    if (static_cast<int>(k) == ilist && n != 3)
                        throw fail("face " + std::to_string(f) + " has " + std::to_string(n) +
                                   " vertices; only triangles are supported");
                    for (long long j = 0; j < n; ++j)
                    {
                        const double idx = reader.read(p.type);
                        if (static_cast<int>(k) == ilist)
                        {
                            if (!is_integer(p.type))
                                throw fail("face indices must be integers");
                            faces[f][j] = static_cast<int>(idx);
                        }
                    }
                }
            }
            have_faces = true;
        }
        else
        {
            for (std::size_t i = 0; i < e.count; ++i)
                for (const Property& p : e.properties)
                {
                    if (p.is_list)
                    {
                        const auto n = static_cast<long long>(reader.read(p.count_type));
                        for (long long j = 0; j < n; ++j)
                            reader.read(p.type);
                    }
                    else
                    {
                        reader.read(p.type);
                    }
                }
        }
    }
    if (!have_vertices)
        throw fail("no vertex element");
    if (!have_faces)
        throw fail("no face element");

    std::map<std::string, VertexMask> labels;
    for (std::size_t v = 0; v < label_codes.size(); ++v)
    {
        const int code = label_codes[v];
        if (code == 0)
            continue;
        auto [it, inserted] = labels.try_emplace(label_name(code), vertices.size());
        it->second.set(v);
    }

    return PlyContents{TriMesh(std::move(vertices), std::move(faces), std::move(labels)), std::move(quality)};
}

TriMesh load_mesh(const std::string& path)
{
    return load_mesh_with_scalars(path).mesh;
}

namespace {

template <typename T>
void write_raw(std::ostream& out, T value)
{
    out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

void write_ascii_float(std::ostream& out, float value)
{
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
    out.write(buf, ptr - buf);
}

} // namespace

void save_mesh(const TriMesh& mesh, const std::string& path, std::optional<std::span<const double>> scalars,
               PlyEncoding encoding)
{
    if (scalars && scalars->size() != mesh.vertex_count())
        throw TopologyError("save_mesh: " + std::to_string(scalars->size()) + " scalars for " +
                            std::to_string(mesh.vertex_count()) + " vertices");

    std::vector<int> codes;
    if (!mesh.labels().empty())
    {
        codes.assign(mesh.vertex_count(), 0);
        for (const auto& [name, mask] : mesh.labels())
        {
            const int code = label_code(name);
            for (std::size_t v = 0; v < mask.size(); ++v)
            {
                if (!mask[v])
                    continue;
                if (codes[v] != 0)
                    throw ConfigError("save_mesh: vertex " + std::to_string(v) +
                                      " carries two labels; a PLY label property holds one");
                codes[v] = code;
            }
        }
    }

    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw IoError("cannot open '" + path + "' for writing");

    const bool binary = encoding == PlyEncoding::binary_little_endian;
    out << "ply\n" << (binary ? "format binary_little_endian 1.0\n" : "format ascii 1.0\n");
    out << "element vertex " << mesh.vertex_count() << '\n';
    out << "property float x\nproperty float y\nproperty float z\n";
    if (!codes.empty())
        out << "property int label\n";
    if (scalars)
        out << "property float quality\n";
    out << "element face " << mesh.face_count() << '\n';
    out << "property list uchar int vertex_indices\n";
    out << "end_header\n";

    for (std::size_t v = 0; v < mesh.vertex_count(); ++v)
    {
        const Point3& p = mesh.vertex(v);
        if (binary)
        {
            for (int k = 0; k < 3; ++k)
                write_raw(out, static_cast<float>(p[k]));
            if (!codes.empty())
                write_raw(out, static_cast<std::int32_t>(codes[v]));
            if (scalars)
                write_raw(out, static_cast<float>((*scalars)[v]));
        }
        else
        {
            for (int k = 0; k < 3; ++k)
            {
                if (k)
                    out << ' ';
                write_ascii_float(out, static_cast<float>(p[k]));
            }
            if (!codes.empty())
                out << ' ' << codes[v];
            if (scalars)
            {
                out << ' ';
                write_ascii_float(out, static_cast<float>((*scalars)[v]));
            }
            out << '\n';
        }
    }
    for (const Face& f : mesh.faces())
    {
        if (binary)
        {
            write_raw(out, std::uint8_t{3});
            for (int v : f)
                write_raw(out, static_cast<std::int32_t>(v));
        }
        else
        {
            out << "3 " << f[0] << ' ' << f[1] << ' ' << f[2] << '\n';
        }
    }
    out.flush();
    if (!out)
        throw IoError("failed writing '" + path + "'");
}

} // namespace shapecomplete
