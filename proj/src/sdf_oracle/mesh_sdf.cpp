#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <numeric>

#include <fmt/format.h>

#include "lisr/sdf_oracle.hpp"

namespace lisr {

namespace {

constexpr std::size_t kLeafTriangles = 4;
constexpr double kEdgeGuard = 1e-12;
constexpr int kMaxRecast = 16;

// Closest point on triangle abc to p (Ericson, Real-Time Collision Detection 5.1.5).
Point3 closest_on_triangle(const Point3& p, const Point3& a, const Point3& b, const Point3& c) {
    const Point3 ab = b - a, ac = c - a, ap = p - a;
    const double d1 = ab.dot(ap), d2 = ac.dot(ap);
    if (d1 <= 0.0 && d2 <= 0.0) return a;
    const Point3 bp = p - b;
    const double d3 = ab.dot(bp), d4 = ac.dot(bp);
    if (d3 >= 0.0 && d4 <= d3) return b;
    const double vc = d1 * d4 - d3 * d2;
    if (vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0) return a + (d1 / (d1 - d3)) * ab;
    const Point3 cp = p - c;
    const double d5 = ab.dot(cp), d6 = ac.dot(cp);
    if (d6 >= 0.0 && d5 <= d6) return c;
    const double vb = d5 * d2 - d1 * d6;
    if (vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0) return a + (d2 / (d2 - d6)) * ac;
    const double va = d3 * d6 - d5 * d4;
    if (va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0)
        return b + ((d4 - d3) / ((d4 - d3) + (d5 - d6))) * (c - b);
    const double denom = 1.0 / (va + vb + vc);
    return a + ab * (vb * denom) + ac * (vc * denom);
}

enum class RayHit { Miss, Hit, Ambiguous };

// Moller-Trumbore. Ambiguous when the crossing is within kEdgeGuard of an edge.
RayHit intersect(const Point3& o, const Point3& d, const Point3& a, const Point3& b, const Point3& c) {
    const Point3 e1 = b - a, e2 = c - a;
    const Point3 pv = d.cross(e2);
    const double det = e1.dot(pv);
    const double scale = e1.norm() * e2.norm();
    if (std::abs(det) <= 1e-15 * scale) return RayHit::Miss;  // parallel
    const double inv = 1.0 / det;
    const Point3 tv = o - a;
    const double u = tv.dot(pv) * inv;
    const Point3 qv = tv.cross(e1);
    const double v = d.dot(qv) * inv;
    const double w = 1.0 - u - v;
    const double t = e2.dot(qv) * inv;
    if (u < -kEdgeGuard || v < -kEdgeGuard || w < -kEdgeGuard || t < 0.0) return RayHit::Miss;
    if (u <= kEdgeGuard || v <= kEdgeGuard || w <= kEdgeGuard) return RayHit::Ambiguous;
    return RayHit::Hit;
}

}  // namespace

struct MeshSdf::Bvh {
    struct Node {
        Aabb box;
        std::uint32_t begin = 0, end = 0;  // leaf range into order
        std::uint32_t left = 0, right = 0;
        bool leaf = true;
    };

    const TriangleMesh* mesh = nullptr;
    std::vector<std::uint32_t> order;
    std::vector<Node> nodes;
    std::vector<Point3> centroids;

    explicit Bvh(const TriangleMesh& m) : mesh(&m) {
        const auto n = m.triangles.size();
        order.resize(n);
        std::iota(order.begin(), order.end(), 0u);
        centroids.reserve(n);
        for (const auto& t : m.triangles)
            centroids.push_back((m.vertices[t[0]] + m.vertices[t[1]] + m.vertices[t[2]]) / 3.0);
        build(0, std::uint32_t(n));
    }

    std::uint32_t build(std::uint32_t begin, std::uint32_t end) {
        const auto id = std::uint32_t(nodes.size());
        nodes.emplace_back();
        Aabb box, cbox;
        for (auto i = begin; i < end; ++i) {
            const auto& t = mesh->triangles[order[i]];
            for (int k = 0; k < 3; ++k) box.extend(mesh->vertices[t[k]]);
            cbox.extend(centroids[order[i]]);
        }
        nodes[id].box = box;
        nodes[id].begin = begin;
        nodes[id].end = end;
        if (end - begin <= kLeafTriangles) return id;
        int axis = 0;
        cbox.extent().maxCoeff(&axis);
        const auto mid = begin + (end - begin) / 2;
        std::nth_element(order.begin() + begin, order.begin() + mid, order.begin() + end,
                         [&](std::uint32_t a, std::uint32_t b) { return centroids[a][axis] < centroids[b][axis]; });
        const auto l = build(begin, mid);
        const auto r = build(mid, end);
        nodes[id].leaf = false;
        nodes[id].left = l;
        nodes[id].right = r;
        return id;
    }

    static double box_distance2(const Aabb& b, const Point3& p) {
        const Point3 d = (b.min - p).cwiseMax(p - b.max).cwiseMax(0.0);
        return d.squaredNorm();
    }

    void closest(std::uint32_t id, const Point3& p, double& best2) const {
        const Node& n = nodes[id];
        if (n.leaf) {
            for (auto i = n.begin; i < n.end; ++i) {
                const auto& t = mesh->triangles[order[i]];
                const Point3 c = closest_on_triangle(p, mesh->vertices[t[0]], mesh->vertices[t[1]], mesh->vertices[t[2]]);
                best2 = std::min(best2, (c - p).squaredNorm());
            }
            return;
        }
        const double dl = box_distance2(nodes[n.left].box, p);
        const double dr = box_distance2(nodes[n.right].box, p);
        const auto first = dl <= dr ? n.left : n.right;
        const auto second = dl <= dr ? n.right : n.left;
        if (std::min(dl, dr) < best2) closest(first, p, best2);
        if (std::max(dl, dr) < best2) closest(second, p, best2);
    }

    static bool ray_box(const Aabb& b, const Point3& o, const Point3& d) {
        double t0 = 0.0, t1 = std::numeric_limits<double>::infinity();
        for (int a = 0; a < 3; ++a) {
            if (d[a] == 0.0) {
                if (o[a] < b.min[a] || o[a] > b.max[a]) return false;
                continue;
            }
            double near = (b.min[a] - o[a]) / d[a];
            double far = (b.max[a] - o[a]) / d[a];
            if (near > far) std::swap(near, far);
            t0 = std::max(t0, near);
            t1 = std::min(t1, far);
            if (t0 > t1 * (1.0 + 1e-12) + 1e-15) return false;
        }
        return true;
    }

    // Number of crossings along the ray, or -1 when a crossing is ambiguous.
    int crossings(const Point3& o, const Point3& d) const {
        int count = 0;
        std::vector<std::uint32_t> stack{0};
        while (!stack.empty()) {
            const Node& n = nodes[stack.back()];
            stack.pop_back();
            if (!ray_box(n.box, o, d)) continue;
            if (!n.leaf) {
                stack.push_back(n.left);
                stack.push_back(n.right);
                continue;
            }
            for (auto i = n.begin; i < n.end; ++i) {
                const auto& t = mesh->triangles[order[i]];
                switch (intersect(o, d, mesh->vertices[t[0]], mesh->vertices[t[1]], mesh->vertices[t[2]])) {
                    case RayHit::Hit: ++count; break;
                    case RayHit::Ambiguous: return -1;
                    case RayHit::Miss: break;
                }
            }
        }
        return count;
    }
};

bool is_closed_manifold(const TriangleMesh& mesh) {
    if (mesh.triangles.empty()) return false;
    // Weld coincident vertices so that unwelded OBJ exports still pass.
    std::map<std::array<double, 3>, int> weld;
    std::vector<int> canon(mesh.vertices.size());
    for (std::size_t i = 0; i < mesh.vertices.size(); ++i) {
        const auto& v = mesh.vertices[i];
        canon[i] = weld.emplace(std::array<double, 3>{v.x(), v.y(), v.z()}, int(weld.size())).first->second;
    }
    std::map<std::pair<int, int>, int> uses;
    for (const auto& t : mesh.triangles)
        for (int k = 0; k < 3; ++k) {
            const int a = canon[t[k]], b = canon[t[(k + 1) % 3]];
            ++uses[{std::min(a, b), std::max(a, b)}];
        }
    return std::all_of(uses.begin(), uses.end(), [](const auto& e) { return e.second == 2; });
}

MeshSdf::MeshSdf(TriangleMesh mesh, bool strict) : mesh_(std::move(mesh)) {
    if (mesh_.triangles.empty()) throw Error("mesh SDF: mesh has no triangles");
    signed_ = is_closed_manifold(mesh_);
    if (!signed_ && strict) throw Error("mesh SDF: mesh is not watertight; refusing to sign distances");
    bvh_ = std::make_unique<Bvh>(mesh_);
}

MeshSdf::~MeshSdf() = default;

MeshSdf::MeshSdf(MeshSdf&& other) noexcept
    : mesh_(std::move(other.mesh_)), bvh_(std::move(other.bvh_)), signed_(other.signed_) {
    if (bvh_) bvh_->mesh = &mesh_;
}

MeshSdf& MeshSdf::operator=(MeshSdf&& other) noexcept {
    mesh_ = std::move(other.mesh_);
    bvh_ = std::move(other.bvh_);
    signed_ = other.signed_;
    if (bvh_) bvh_->mesh = &mesh_;
    return *this;
}

double MeshSdf::unsigned_distance(const Point3& x) const {
    double best2 = std::numeric_limits<double>::infinity();
    bvh_->closest(0, x, best2);
    return std::sqrt(best2);
}

bool MeshSdf::inside(const Point3& x) const {
    static const Point3 kDirections[3] = {
        Point3(1.0, std::numbers::sqrt2, std::numbers::sqrt3).normalized(),
        Point3(-std::numbers::sqrt3, 1.0, std::numbers::pi / 4.0).normalized(),
        Point3(std::numbers::e / 5.0, -std::numbers::sqrt2, -1.0).normalized(),
    };
    int votes = 0;
    for (int r = 0; r < 3; ++r) {
        Point3 d = kDirections[r];
        int hits = bvh_->crossings(x, d);
        for (int k = 1; hits < 0 && k <= kMaxRecast; ++k) {
            d = (kDirections[r] + 1e-3 * k * Point3(std::sin(1.1 * k), std::cos(1.7 * k), std::sin(2.3 * k))).normalized();
            hits = bvh_->crossings(x, d);
        }
        if (hits > 0 && hits % 2 == 1) ++votes;
    }
    return votes >= 2;
}

double MeshSdf::operator()(const Point3& x) const {
    const double d = unsigned_distance(x);
    if (!signed_ || d == 0.0) return d;
    return inside(x) ? -d : d;
}

double mesh_sdf(const MeshSdf& oracle, const Point3& x) { return oracle(x); }

}  // namespace lisr
