#include <cmath>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "lisr/geom.hpp"

namespace lisr {

namespace {

std::string lower_extension(const std::filesystem::path& path) {
    std::string ext = path.extension().string();
    for (auto& c : ext) c = char(std::tolower(static_cast<unsigned char>(c)));
    return ext;
}

std::ifstream open_input(const std::filesystem::path& path) {
    if (!std::filesystem::exists(path)) throw Error(fmt::format("{}: file not found", path.string()));
    std::ifstream in(path);
    if (!in) throw Error(fmt::format("{}: cannot open", path.string()));
    return in;
}

bool read_coords(std::istringstream& ls, Point3& p) {
    double x, y, z;
    if (!(ls >> x >> y >> z)) return false;
    p = {x, y, z};
    return p.allFinite();
}

std::string_view trim_comment(std::string& line) {
    if (auto pos = line.find('#'); pos != std::string::npos) line.erase(pos);
    std::string_view v = line;
    while (!v.empty() && std::isspace(static_cast<unsigned char>(v.front()))) v.remove_prefix(1);
    while (!v.empty() && std::isspace(static_cast<unsigned char>(v.back()))) v.remove_suffix(1);
    return v;
}

// Parses a face token such as "3", "3/1" or "3//2", resolving negative indices.
int parse_obj_index(const std::string& token, std::size_t vertex_count) {
    const std::string head = token.substr(0, token.find('/'));
    std::size_t used = 0;
    long idx = std::stol(head, &used);
    if (used != head.size()) throw std::invalid_argument("bad index");
    if (idx < 0) idx = long(vertex_count) + idx + 1;
    return int(idx - 1);
}

struct RawMesh {
    std::vector<Point3> vertices;
    std::vector<std::vector<int>> faces;
    std::vector<std::size_t> face_lines;
};

RawMesh read_obj(const std::filesystem::path& path, bool want_faces) {
    auto in = open_input(path);
    RawMesh raw;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string_view body = trim_comment(line);
        if (body.empty()) continue;
        std::istringstream ls{std::string(body)};
        std::string tag;
        ls >> tag;
        if (tag == "v") {
            Point3 p;
            if (!read_coords(ls, p)) throw ParseError(path.string(), lineno, "vertex needs three finite coordinates");
            raw.vertices.push_back(p);
        } else if (tag == "f" && want_faces) {
            std::vector<int> face;
            std::string tok;
            while (ls >> tok) {
                try {
                    face.push_back(parse_obj_index(tok, raw.vertices.size()));
                } catch (const std::exception&) {
                    throw ParseError(path.string(), lineno, fmt::format("bad face index '{}'", tok));
                }
            }
            if (face.size() < 3) throw ParseError(path.string(), lineno, "face needs at least three vertices");
            raw.faces.push_back(std::move(face));
            raw.face_lines.push_back(lineno);
        }
    }
    return raw;
}

RawMesh read_ply(const std::filesystem::path& path, bool want_faces) {
    auto in = open_input(path);
    std::string line;
    std::size_t lineno = 0;
    auto next = [&](std::string& out) {
        if (!std::getline(in, out)) return false;
        ++lineno;
        if (!out.empty() && out.back() == '\r') out.pop_back();
        return true;
    };
    if (!next(line) || line != "ply") throw ParseError(path.string(), 1, "missing 'ply' magic");

    struct Element {
        std::string name;
        std::size_t count = 0;
        std::vector<std::string> properties;
        bool list = false;
    };
    std::vector<Element> elements;
    bool ascii = false;
    while (true) {
        if (!next(line)) throw ParseError(path.string(), lineno, "unterminated header");
        std::istringstream ls(line);
        std::string kw;
        ls >> kw;
        if (kw == "format") {
            std::string fmt_name;
            ls >> fmt_name;
            ascii = fmt_name == "ascii";
        } else if (kw == "element") {
            Element e;
            ls >> e.name >> e.count;
            elements.push_back(e);
        } else if (kw == "property") {
            if (elements.empty()) throw ParseError(path.string(), lineno, "property before element");
            std::string type, name;
            ls >> type;
            if (type == "list") {
                std::string count_type, item_type;
                ls >> count_type >> item_type >> name;
                elements.back().list = true;
            } else {
                ls >> name;
            }
            elements.back().properties.push_back(name);
        } else if (kw == "end_header") {
            break;
        }
    }
    if (!ascii) throw Error(fmt::format("{}: only ascii PLY is supported", path.string()));

    RawMesh raw;
    for (const auto& e : elements) {
        int ix = -1, iy = -1, iz = -1;
        for (std::size_t p = 0; p < e.properties.size(); ++p) {
            if (e.properties[p] == "x") ix = int(p);
            if (e.properties[p] == "y") iy = int(p);
            if (e.properties[p] == "z") iz = int(p);
        }
        if (e.name == "vertex" && (ix < 0 || iy < 0 || iz < 0))
            throw Error(fmt::format("{}: vertex element lacks x/y/z", path.string()));
        for (std::size_t r = 0; r < e.count; ++r) {
            if (!next(line)) throw ParseError(path.string(), lineno, "unexpected end of file");
            std::istringstream ls(line);
            if (e.name == "vertex") {
                std::vector<double> vals(e.properties.size());
                for (auto& v : vals)
                    if (!(ls >> v)) throw ParseError(path.string(), lineno, "vertex record too short");
                Point3 p(vals[ix], vals[iy], vals[iz]);
                if (!p.allFinite()) throw ParseError(path.string(), lineno, "non-finite vertex");
                raw.vertices.push_back(p);
            } else if (e.name == "face" && want_faces) {
                std::size_t n = 0;
                if (!(ls >> n) || n < 3) throw ParseError(path.string(), lineno, "face needs at least three vertices");
                std::vector<int> face(n);
                for (auto& v : face)
                    if (!(ls >> v)) throw ParseError(path.string(), lineno, "face record too short");
                raw.faces.push_back(std::move(face));
                raw.face_lines.push_back(lineno);
            }
        }
    }
    return raw;
}

}  // namespace

ParseError::ParseError(const std::string& file, std::size_t line, const std::string& what)
    : Error(fmt::format("{}:{}: {}", file, line, what)), line_(line) {}

PointCloud load_point_cloud(const std::filesystem::path& path) {
    const std::string ext = lower_extension(path);
    PointCloud cloud;
    if (ext == ".xyz" || ext == ".txt") {
        auto in = open_input(path);
        std::string line;
        std::size_t lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            std::string_view body = trim_comment(line);
            if (body.empty()) continue;
            std::istringstream ls{std::string(body)};
            Point3 p;
            if (!read_coords(ls, p)) throw ParseError(path.string(), lineno, "expected three finite coordinates");
            cloud.push_back(p);
        }
    } else if (ext == ".obj") {
        cloud = read_obj(path, false).vertices;
    } else if (ext == ".ply") {
        cloud = read_ply(path, false).vertices;
    } else {
        throw Error(fmt::format("{}: unsupported point cloud format '{}'", path.string(), ext));
    }
    if (cloud.empty()) throw Error(fmt::format("{}: point cloud is empty", path.string()));
    return cloud;
}

TriangleMesh load_mesh(const std::filesystem::path& path, MeshLoadStats* stats) {
    const std::string ext = lower_extension(path);
    RawMesh raw;
    if (ext == ".obj")
        raw = read_obj(path, true);
    else if (ext == ".ply")
        raw = read_ply(path, true);
    else
        throw Error(fmt::format("{}: unsupported mesh format '{}'", path.string(), ext));

    MeshLoadStats local;
    TriangleMesh mesh;
    mesh.vertices = std::move(raw.vertices);
    const int nv = int(mesh.vertices.size());
    for (std::size_t f = 0; f < raw.faces.size(); ++f) {
        const auto& face = raw.faces[f];
        for (int v : face)
            if (v < 0 || v >= nv)
                throw ParseError(path.string(), raw.face_lines[f],
                                 fmt::format("face index {} out of range (mesh has {} vertices)", v + 1, nv));
        if (face.size() > 3) ++local.quads_split;
        for (std::size_t k = 1; k + 1 < face.size(); ++k) {
            mesh.triangles.push_back({face[0], face[k], face[k + 1]});
            if (mesh.triangle_area(mesh.triangles.size() - 1) <= 0.0) {
                mesh.triangles.pop_back();
                ++local.degenerate_dropped;
            }
        }
    }
    if (mesh.triangles.empty()) throw Error(fmt::format("{}: mesh has no faces", path.string()));
    if (stats) *stats = local;
    return mesh;
}

void write_obj(const TriangleMesh& mesh, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw Error(fmt::format("{}: cannot write", path.string()));
    for (const auto& v : mesh.vertices)
        out << "v " << format_real(v.x()) << ' ' << format_real(v.y()) << ' ' << format_real(v.z()) << '\n';
    for (const auto& t : mesh.triangles) out << "f " << t[0] + 1 << ' ' << t[1] + 1 << ' ' << t[2] + 1 << '\n';
}

void write_xyz(const PointCloud& cloud, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw Error(fmt::format("{}: cannot write", path.string()));
    for (const auto& p : cloud)
        out << format_real(p.x()) << ' ' << format_real(p.y()) << ' ' << format_real(p.z()) << '\n';
}

std::string format_real(double v) { return fmt::format("{:.17g}", v); }

}  // namespace lisr
