#include "rflow/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <queue>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "rflow/errors.hpp"

namespace rflow {

namespace {

std::uint64_t directed_key(int a, int b) {
    return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(a)) << 32) |
           static_cast<std::uint32_t>(b);
}

}  // namespace

const std::vector<Vec3>& TriMesh::positions() const {
    if (!positions_) throw MeshError("mesh has no positions");
    return *positions_;
}

TriMesh TriMesh::from_faces(int vertex_count,
                            std::vector<std::array<int, 3>> faces,
                            std::optional<std::vector<Vec3>> positions) {
    if (vertex_count <= 0) throw MeshError("mesh has no vertices");
    if (faces.empty()) throw MeshError("mesh has no faces");
    if (positions && static_cast<int>(positions->size()) != vertex_count)
        throw MeshError("position count does not match vertex count");

    std::vector<bool> referenced(vertex_count, false);
    for (std::size_t f = 0; f < faces.size(); ++f) {
        for (int v : faces[f]) {
            if (v < 0 || v >= vertex_count)
                throw MeshError("face " + std::to_string(f) + " references vertex " +
                                std::to_string(v) + " out of range");
            referenced[v] = true;
        }
        const auto& [a, b, c] = faces[f];
        if (a == b || b == c || c == a)
            throw MeshError("face " + std::to_string(f) + " repeats a vertex");
    }
    for (int v = 0; v < vertex_count; ++v)
        if (!referenced[v]) throw MeshError("vertex " + std::to_string(v) + " is isolated");

    // Each directed edge may appear at most once; a repeat means two faces
    // traverse the shared edge the same way (inconsistent orientation).
    std::unordered_set<std::uint64_t> directed;
    directed.reserve(faces.size() * 3);
    struct EdgeBuild {
        int n = 0;
        std::array<int, 2> face{-1, -1};
        std::array<int, 2> opposite{-1, -1};
    };
    std::map<std::pair<int, int>, EdgeBuild> edge_map;
    for (std::size_t f = 0; f < faces.size(); ++f) {
        const auto& fv = faces[f];
        for (int c = 0; c < 3; ++c) {
            int a = fv[(c + 1) % 3];
            int b = fv[(c + 2) % 3];
            if (!directed.insert(directed_key(a, b)).second)
                throw MeshError("inconsistent orientation: directed edge " + std::to_string(a) +
                                "->" + std::to_string(b) + " is traversed twice");
            auto& rec = edge_map[{std::min(a, b), std::max(a, b)}];
            if (rec.n >= 2)
                throw MeshError("non-manifold edge (" + std::to_string(std::min(a, b)) + ", " +
                                std::to_string(std::max(a, b)) + ") has more than two faces");
            rec.face[rec.n] = static_cast<int>(f);
            rec.opposite[rec.n] = fv[c];
            ++rec.n;
        }
    }
    for (const auto& [key, rec] : edge_map) {
        if (rec.n != 2)
            throw MeshError("boundary edge (" + std::to_string(key.first) + ", " +
                            std::to_string(key.second) + "): surface is not closed");
    }

    // Face-adjacency connectivity.
    {
        std::vector<std::vector<int>> adjacent(faces.size());
        for (const auto& [key, rec] : edge_map) {
            adjacent[rec.face[0]].push_back(rec.face[1]);
            adjacent[rec.face[1]].push_back(rec.face[0]);
        }
        std::vector<bool> seen(faces.size(), false);
        std::queue<int> frontier;
        frontier.push(0);
        seen[0] = true;
        std::size_t visited = 1;
        while (!frontier.empty()) {
            int f = frontier.front();
            frontier.pop();
            for (int g : adjacent[f]) {
                if (!seen[g]) {
                    seen[g] = true;
                    ++visited;
                    frontier.push(g);
                }
            }
        }
        if (visited != faces.size()) throw MeshError("surface is disconnected");
    }

    const int euler = vertex_count - static_cast<int>(edge_map.size()) + static_cast<int>(faces.size());
    if (euler % 2 != 0 || euler > 2)
        throw MeshError("Euler characteristic " + std::to_string(euler) +
                        " is not that of a closed orientable surface");

    TriMesh mesh;
    mesh.vertex_count_ = vertex_count;
    mesh.faces_ = std::move(faces);
    mesh.positions_ = std::move(positions);
    mesh.edges_.reserve(edge_map.size());
    std::map<std::pair<int, int>, int> edge_index;
    for (const auto& [key, rec] : edge_map) {  // std::map iterates lexicographically
        MeshEdge e;
        e.v0 = key.first;
        e.v1 = key.second;
        e.face = rec.face;
        e.opposite = rec.opposite;
        edge_index[key] = static_cast<int>(mesh.edges_.size());
        mesh.edges_.push_back(e);
    }
    mesh.face_edges_.resize(mesh.faces_.size());
    for (std::size_t f = 0; f < mesh.faces_.size(); ++f) {
        const auto& fv = mesh.faces_[f];
        for (int c = 0; c < 3; ++c) {
            int a = fv[(c + 1) % 3];
            int b = fv[(c + 2) % 3];
            mesh.face_edges_[f][c] = edge_index.at({std::min(a, b), std::max(a, b)});
        }
    }
    return mesh;
}

int euler_characteristic(const TriMesh& mesh) { return mesh.euler_characteristic(); }

namespace {

/// Splits an OFF document into meaningful lines: comments (#...) and blank
/// lines dropped, CR stripped.
std::vector<std::string> meaningful_lines(const std::string& text) {
    std::vector<std::string> lines;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        std::size_t start = line.find_first_not_of(" \t");
        if (start == std::string::npos) continue;
        if (line[start] == '#') continue;
        lines.push_back(line);
    }
    return lines;
}

}  // namespace

TriMesh load_off(const std::string& text) {
    const std::vector<std::string> lines = meaningful_lines(text);
    std::size_t at = 0;
    auto next_line = [&](const char* what) -> const std::string& {
        if (at >= lines.size())
            throw MeshError(std::string("OFF parse error: unexpected end of file, expected ") + what);
        return lines[at++];
    };

    {
        std::istringstream head(next_line("OFF header"));
        std::string token;
        head >> token;
        std::string rest;
        if (token != "OFF" || (head >> rest))
            throw MeshError("OFF parse error: first line must be the token 'OFF'");
    }

    long vertex_count = 0, face_count = 0, edge_count = 0;
    {
        std::istringstream counts(next_line("vertex/face/edge counts"));
        if (!(counts >> vertex_count >> face_count >> edge_count) || vertex_count < 0 ||
            face_count < 0)
            throw MeshError("OFF parse error: malformed counts line");
        std::string rest;
        if (counts >> rest) throw MeshError("OFF parse error: trailing tokens on counts line");
    }

    std::vector<Vec3> positions;
    positions.reserve(vertex_count);
    for (long v = 0; v < vertex_count; ++v) {
        std::istringstream vs(next_line("vertex line"));
        double x, y, z;
        if (!(vs >> x >> y >> z))
            throw MeshError("OFF parse error: malformed vertex line " + std::to_string(v));
        std::string rest;
        if (vs >> rest)
            throw MeshError("OFF parse error: trailing tokens on vertex line " + std::to_string(v));
        positions.emplace_back(x, y, z);
    }

    std::vector<std::array<int, 3>> faces;
    faces.reserve(face_count);
    for (long f = 0; f < face_count; ++f) {
        std::istringstream fs(next_line("face line"));
        long n, i, j, k;
        if (!(fs >> n)) throw MeshError("OFF parse error: malformed face line " + std::to_string(f));
        if (n != 3)
            throw MeshError("OFF parse error: face " + std::to_string(f) + " has " +
                            std::to_string(n) + " vertices, only triangles are supported");
        if (!(fs >> i >> j >> k))
            throw MeshError("OFF parse error: malformed face line " + std::to_string(f));
        std::string rest;
        if (fs >> rest)
            throw MeshError("OFF parse error: trailing tokens on face line " + std::to_string(f));
        faces.push_back({static_cast<int>(i), static_cast<int>(j), static_cast<int>(k)});
    }
    if (at != lines.size()) throw MeshError("OFF parse error: trailing content after faces");

    return TriMesh::from_faces(static_cast<int>(vertex_count), std::move(faces),
                               std::move(positions));
}

TriMesh load_off_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw MeshError("cannot open OFF file: " + path);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return load_off(buffer.str());
}

TriMesh build_icosphere(int subdivisions, double radius) {
    if (subdivisions < 0 || subdivisions > 7)
        throw std::invalid_argument("icosphere subdivisions must be in [0, 7]");
    if (!(radius > 0.0)) throw std::invalid_argument("icosphere radius must be positive");

    const double t = (1.0 + std::sqrt(5.0)) / 2.0;
    std::vector<Vec3> verts = {
        {-1, t, 0}, {1, t, 0}, {-1, -t, 0}, {1, -t, 0},
        {0, -1, t}, {0, 1, t}, {0, -1, -t}, {0, 1, -t},
        {t, 0, -1}, {t, 0, 1}, {-t, 0, -1}, {-t, 0, 1},
    };
    // Counterclockwise as seen from outside.
    std::vector<std::array<int, 3>> faces = {
        {0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11},
        {1, 5, 9},  {5, 11, 4}, {11, 10, 2}, {10, 7, 6}, {7, 1, 8},
        {3, 9, 4},  {3, 4, 2},  {3, 2, 6},   {3, 6, 8},  {3, 8, 9},
        {4, 9, 5},  {2, 4, 11}, {6, 2, 10},  {8, 6, 7},  {9, 8, 1},
    };

    for (int s = 0; s < subdivisions; ++s) {
        std::map<std::pair<int, int>, int> midpoint;
        auto midpoint_index = [&](int a, int b) {
            auto key = std::minmax(a, b);
            auto it = midpoint.find(key);
            if (it != midpoint.end()) return it->second;
            int idx = static_cast<int>(verts.size());
            verts.push_back(0.5 * (verts[a] + verts[b]));
            midpoint.emplace(key, idx);
            return idx;
        };
        std::vector<std::array<int, 3>> refined;
        refined.reserve(faces.size() * 4);
        for (const auto& [a, b, c] : faces) {
            int ab = midpoint_index(a, b);
            int bc = midpoint_index(b, c);
            int ca = midpoint_index(c, a);
            refined.push_back({a, ab, ca});
            refined.push_back({b, bc, ab});
            refined.push_back({c, ca, bc});
            refined.push_back({ab, bc, ca});
        }
        faces = std::move(refined);
    }

    for (Vec3& p : verts) p = radius * p.normalized();
    const int vertex_count = static_cast<int>(verts.size());
    return TriMesh::from_faces(vertex_count, std::move(faces), std::move(verts));
}

}  // namespace rflow
