#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace rflow {

using Vec3 = Eigen::Vector3d;

/// One undirected edge of a closed triangulated surface, with its two
/// incident faces and the vertex opposite the edge in each of them.
struct MeshEdge {
    int v0 = -1;  ///< smaller endpoint index
    int v1 = -1;  ///< larger endpoint index
    std::array<int, 2> face{-1, -1};      ///< incident faces, lower face index first
    std::array<int, 2> opposite{-1, -1};  ///< third vertex of face[0] / face[1]
};

/**
 * Combinatorics of a closed oriented triangulated surface, plus optional
 * embedding positions for meshes that came from a file or an embedded builder.
 *
 * Construction validates that the surface is closed (every edge has exactly
 * two incident faces), consistently oriented (each edge is traversed once in
 * each direction), connected in the face-adjacency graph, and has an even
 * Euler characteristic V - E + F <= 2. Edges are derived in lexicographic
 * (v0, v1) order so downstream matrix assembly is deterministic.
 *
 * A TriMesh is immutable after construction and safe to share across threads.
 */
class TriMesh {
public:
    /// Validates the combinatorics and derives edge connectivity.
    /// Throws MeshError on any violation (the message says which).
    static TriMesh from_faces(int vertex_count,
                              std::vector<std::array<int, 3>> faces,
                              std::optional<std::vector<Vec3>> positions = std::nullopt);

    int vertex_count() const { return vertex_count_; }
    int face_count() const { return static_cast<int>(faces_.size()); }
    int edge_count() const { return static_cast<int>(edges_.size()); }

    const std::vector<std::array<int, 3>>& faces() const { return faces_; }
    const std::vector<MeshEdge>& edges() const { return edges_; }

    /// Edge indices per face: entry c is the edge opposite corner c.
    const std::array<int, 3>& face_edges(int f) const { return face_edges_[f]; }

    bool has_positions() const { return positions_.has_value(); }
    const std::vector<Vec3>& positions() const;

    int euler_characteristic() const { return vertex_count_ - edge_count() + face_count(); }

private:
    TriMesh() = default;

    int vertex_count_ = 0;
    std::vector<std::array<int, 3>> faces_;
    std::optional<std::vector<Vec3>> positions_;
    std::vector<MeshEdge> edges_;
    std::vector<std::array<int, 3>> face_edges_;
};

/// V - E + F of a validated mesh.
int euler_characteristic(const TriMesh& mesh);

/**
 * Parses an OFF document.
 *
 * Grammar: the first non-comment line is the literal token `OFF`; the next
 * line holds `V F E` (E may be 0 and is ignored); then V lines of three
 * decimal reals; then F lines `3 i j k` with 0-based indices. Lines starting
 * with `#` are comments; blank lines are skipped; LF and CRLF both accepted.
 *
 * Throws MeshError on malformed input (including non-triangle faces) and on
 * validation failure of the resulting surface.
 */
TriMesh load_off(const std::string& text);

/// Reads the file at `path` and parses it with load_off.
TriMesh load_off_file(const std::string& path);

/// Icosahedron subdivided `subdivisions` times with every vertex projected to
/// the sphere of the given radius. V = 10 * 4^s + 2. subdivisions must be <= 7.
TriMesh build_icosphere(int subdivisions, double radius);

}  // namespace rflow
