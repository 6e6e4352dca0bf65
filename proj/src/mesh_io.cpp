#include "cutvem/errors.hpp"
#include "cutvem/mesh.hpp"
#include "cutvem/svg.hpp"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <limits>
#include <map>
#include <sstream>

namespace cutvem {

namespace {

/// Line reader that skips blank lines and '#' comments and remembers the
/// current line number for error messages.
class LineReader {
public:
    explicit LineReader(std::istream& in) : in_(in) {}

    bool next(std::istringstream& fields)
    {
        std::string line;
        while (std::getline(in_, line)) {
            ++line_no_;
            const auto hash = line.find('#');
            if (hash != std::string::npos)
                line.erase(hash);
            if (line.find_first_not_of(" \t\r") == std::string::npos)
                continue;
            fields.clear();
            fields.str(line);
            return true;
        }
        ++line_no_;
        return false;
    }

    void require(std::istringstream& fields, const char* what)
    {
        if (!next(fields))
            throw ParseError(std::string("unexpected end of file, expected ") + what, line_no_);
    }

    std::size_t line() const { return line_no_; }

private:
    std::istream& in_;
    std::size_t line_no_ = 0;
};

template <typename T>
T read_field(std::istringstream& fields, const LineReader& reader, const char* what)
{
    T value{};
    if (!(fields >> value))
        throw ParseError(std::string("cannot read ") + what, reader.line());
    return value;
}

std::string strip_extension(const std::string& path)
{
    for (const char* ext : {".node", ".ele"}) {
        const std::string e(ext);
        if (path.size() > e.size() && path.compare(path.size() - e.size(), e.size(), e) == 0)
            return path.substr(0, path.size() - e.size());
    }
    return path;
}

PolyMesh read_triangle(const std::string& stem)
{
    std::ifstream node_in(stem + ".node");
    if (!node_in)
        throw Error("cannot open " + stem + ".node");
    LineReader nodes(node_in);
    std::istringstream f;
    nodes.require(f, "node header");
    const auto nv = read_field<long>(f, nodes, "vertex count");
    const auto dim = read_field<int>(f, nodes, "dimension");
    const auto nattr = read_field<int>(f, nodes, "attribute count");
    const auto nmark = read_field<int>(f, nodes, "boundary marker count");
    if (nv < 0 || dim != 2 || nattr < 0 || nmark < 0 || nmark > 1)
        throw ParseError("unsupported .node header", nodes.line());

    std::vector<Point2> pts;
    std::vector<int> tags;
    std::map<long, VertexId> index_of;
    for (long i = 0; i < nv; ++i) {
        nodes.require(f, "vertex line");
        const auto id = read_field<long>(f, nodes, "vertex number");
        Point2 p;
        p.x = read_field<double>(f, nodes, "x");
        p.y = read_field<double>(f, nodes, "y");
        for (int a = 0; a < nattr; ++a)
            read_field<double>(f, nodes, "attribute");
        int marker = 0;
        if (nmark == 1)
            marker = read_field<int>(f, nodes, "boundary marker");
        if (!index_of.emplace(id, static_cast<VertexId>(pts.size())).second)
            throw ParseError("duplicate vertex number " + std::to_string(id), nodes.line());
        pts.push_back(p);
        tags.push_back(marker);
    }

    std::ifstream ele_in(stem + ".ele");
    if (!ele_in)
        throw Error("cannot open " + stem + ".ele");
    LineReader eles(ele_in);
    eles.require(f, "element header");
    const auto nt = read_field<long>(f, eles, "triangle count");
    const auto per = read_field<int>(f, eles, "nodes per triangle");
    const auto eattr = read_field<int>(f, eles, "attribute count");
    if (nt < 0 || (per != 3 && per != 6) || eattr < 0)
        throw ParseError("unsupported .ele header", eles.line());

    std::vector<std::vector<VertexId>> cycles;
    std::vector<int> domains;
    for (long t = 0; t < nt; ++t) {
        eles.require(f, "triangle line");
        read_field<long>(f, eles, "triangle number");
        std::vector<VertexId> cycle;
        for (int k = 0; k < per; ++k) {
            const auto id = read_field<long>(f, eles, "node index");
            auto it = index_of.find(id);
            if (it == index_of.end())
                throw IndexOutOfRange("line " + std::to_string(eles.line()) + ": unknown vertex number "
                                      + std::to_string(id));
            if (k < 3)
                cycle.push_back(it->second);
        }
        int domain = 0;
        if (eattr > 0)
            domain = static_cast<int>(read_field<double>(f, eles, "region attribute"));
        cycles.push_back(std::move(cycle));
        domains.push_back(domain);
    }
    return build_mesh(std::move(pts), cycles, domains, std::move(tags));
}

void write_svg(const PolyMesh& mesh, std::ostream& out)
{
    Rect box{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity(),
             -std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
    for (const Point2& p : mesh.vertices()) {
        box.x0 = std::min(box.x0, p.x);
        box.y0 = std::min(box.y0, p.y);
        box.x1 = std::max(box.x1, p.x);
        box.y1 = std::max(box.y1, p.y);
    }
    if (!(box.x1 > box.x0) || !(box.y1 > box.y0))
        box = Rect{};
    SvgCanvas canvas(box);
    for (FaceId fc : mesh.face_ids())
        canvas.polygon(mesh.face_points(fc), palette_color(mesh.domain_id(fc)));
    out << canvas.str();
}

} // namespace

PolyMesh read_polymesh(std::istream& in)
{
    LineReader reader(in);
    std::istringstream f;
    reader.require(f, "header");
    std::string magic;
    int version = 0;
    if (!(f >> magic >> version) || magic != "polymesh")
        throw ParseError("missing 'polymesh' header", reader.line());
    if (version != 1)
        throw ParseError("unsupported polymesh version " + std::to_string(version), reader.line());
    reader.require(f, "counts");
    const auto nv = read_field<long>(f, reader, "vertex count");
    const auto nf = read_field<long>(f, reader, "face count");
    if (nv < 0 || nf < 0)
        throw ParseError("negative counts", reader.line());

    std::vector<Point2> pts;
    std::vector<int> tags;
    for (long i = 0; i < nv; ++i) {
        reader.require(f, "vertex line");
        Point2 p;
        p.x = read_field<double>(f, reader, "x");
        p.y = read_field<double>(f, reader, "y");
        int tag = 0;
        if (!(f >> tag))
            tag = 0;
        pts.push_back(p);
        tags.push_back(tag);
    }
    std::vector<std::vector<VertexId>> cycles;
    std::vector<int> domains;
    for (long i = 0; i < nf; ++i) {
        reader.require(f, "face line");
        const auto k = read_field<long>(f, reader, "face size");
        if (k < 3)
            throw ParseError("face with fewer than three vertices", reader.line());
        std::vector<VertexId> cycle;
        for (long j = 0; j < k; ++j) {
            const auto v = read_field<long>(f, reader, "vertex index");
            if (v < 0 || v >= nv)
                throw IndexOutOfRange("line " + std::to_string(reader.line()) + ": vertex index "
                                      + std::to_string(v) + " out of range");
            cycle.push_back(static_cast<VertexId>(v));
        }
        domains.push_back(read_field<int>(f, reader, "domain id"));
        cycles.push_back(std::move(cycle));
    }
    return build_mesh(std::move(pts), cycles, domains, std::move(tags));
}

void write_polymesh(const PolyMesh& mesh, std::ostream& out)
{
    const auto ids = mesh.face_ids();
    out << "polymesh 1\n" << mesh.num_vertices() << ' ' << ids.size() << '\n';
    out << std::setprecision(17);
    for (std::size_t v = 0; v < mesh.num_vertices(); ++v) {
        const Point2 p = mesh.vertex(static_cast<VertexId>(v));
        out << p.x << ' ' << p.y;
        if (const int tag = mesh.vertex_tag(static_cast<VertexId>(v)); tag != 0)
            out << ' ' << tag;
        out << '\n';
    }
    for (FaceId fc : ids) {
        const auto cycle = mesh.face_cycle(fc);
        out << cycle.size();
        for (VertexId v : cycle)
            out << ' ' << v;
        out << ' ' << mesh.domain_id(fc) << '\n';
    }
}

PolyMesh import_mesh(const std::string& path, MeshFormat format)
{
    switch (format) {
    case MeshFormat::PolyMesh: {
        std::ifstream in(path);
        if (!in)
            throw Error("cannot open " + path);
        return read_polymesh(in);
    }
    case MeshFormat::TriangleNodeEle:
        return read_triangle(strip_extension(path));
    case MeshFormat::Svg:
        break;
    }
    throw Error("import is not supported for this format");
}

void export_mesh(const PolyMesh& mesh, const std::string& path, MeshFormat format)
{
    std::ofstream out(path);
    if (!out)
        throw Error("cannot write " + path);
    switch (format) {
    case MeshFormat::PolyMesh:
        write_polymesh(mesh, out);
        return;
    case MeshFormat::Svg:
        write_svg(mesh, out);
        return;
    case MeshFormat::TriangleNodeEle:
        break;
    }
    throw Error("export is not supported for this format");
}

} // namespace cutvem
