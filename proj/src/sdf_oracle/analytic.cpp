#include <cmath>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>

#include <fmt/format.h>

#include "lisr/sdf_oracle.hpp"

namespace lisr {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

std::vector<double> parse_numbers(const std::string& text, const std::string& context) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(item, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used == 0 || used != item.size()) throw Error(fmt::format("shape '{}': bad number '{}'", context, item));
        out.push_back(v);
    }
    return out;
}

bool positive(double v) { return std::isfinite(v) && v > 0.0; }

}  // namespace

void validate(const AnalyticShape& shape) {
    std::visit(overloaded{
                   [](const Sphere& s) {
                       if (!positive(s.radius)) throw Error("sphere radius must be positive");
                   },
                   [](const Box& b) {
                       if (!(b.half_extents.array() > 0.0).all() || !b.half_extents.allFinite())
                           throw Error("box half-extents must be positive");
                   },
                   [](const Torus& t) {
                       if (!positive(t.major_radius) || !positive(t.minor_radius))
                           throw Error("torus radii must be positive");
                   },
               },
               shape);
}

AnalyticShape parse_shape(const std::string& text) {
    const auto colon = text.find(':');
    if (colon == std::string::npos) throw Error(fmt::format("shape '{}': expected kind:params", text));
    const std::string kind = text.substr(0, colon);
    std::string params = text.substr(colon + 1);
    Point3 center = Point3::Zero();
    if (auto at = params.find('@'); at != std::string::npos) {
        const auto c = parse_numbers(params.substr(at + 1), text);
        if (c.size() != 3) throw Error(fmt::format("shape '{}': center needs three values", text));
        center = {c[0], c[1], c[2]};
        params.erase(at);
    }
    const auto v = parse_numbers(params, text);

    AnalyticShape shape;
    if (kind == "sphere" && v.size() == 1) {
        shape = Sphere{center, v[0]};
    } else if (kind == "box" && (v.size() == 1 || v.size() == 3)) {
        shape = Box{center, v.size() == 1 ? Point3::Constant(v[0]) : Point3(v[0], v[1], v[2])};
    } else if (kind == "torus" && v.size() == 2) {
        shape = Torus{center, v[0], v[1]};
    } else {
        throw Error(fmt::format("shape '{}': unknown kind or wrong parameter count", text));
    }
    validate(shape);
    return shape;
}

std::string to_string(const AnalyticShape& shape) {
    const auto at = [](const Point3& c) {
        return c.isZero(0.0) ? std::string() : fmt::format("@{},{},{}", c.x(), c.y(), c.z());
    };
    return std::visit(overloaded{
                          [&](const Sphere& s) { return fmt::format("sphere:{}{}", s.radius, at(s.center)); },
                          [&](const Box& b) {
                              return fmt::format("box:{},{},{}{}", b.half_extents.x(), b.half_extents.y(),
                                                 b.half_extents.z(), at(b.center));
                          },
                          [&](const Torus& t) {
                              return fmt::format("torus:{},{}{}", t.major_radius, t.minor_radius, at(t.center));
                          },
                      },
                      shape);
}

double analytic_sdf(const AnalyticShape& shape, const Point3& x) {
    return std::visit(overloaded{
                          [&](const Sphere& s) { return (x - s.center).norm() - s.radius; },
                          [&](const Box& b) {
                              const Point3 q = (x - b.center).cwiseAbs() - b.half_extents;
                              return q.cwiseMax(0.0).norm() + std::min(q.maxCoeff(), 0.0);
                          },
                          [&](const Torus& t) {
                              const Point3 d = x - t.center;
                              const double ring = std::hypot(d.x(), d.y()) - t.major_radius;
                              return std::hypot(ring, d.z()) - t.minor_radius;
                          },
                      },
                      shape);
}

PointCloud sample_analytic_surface(const AnalyticShape& shape, std::size_t count, std::uint64_t seed) {
    validate(shape);
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss;
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    PointCloud out;
    out.reserve(count);

    std::visit(overloaded{
                   [&](const Sphere& s) {
                       while (out.size() < count) {
                           Point3 d(gauss(rng), gauss(rng), gauss(rng));
                           const double n = d.norm();
                           if (n < 1e-12) continue;
                           out.push_back(s.center + s.radius * d / n);
                       }
                   },
                   [&](const Box& b) {
                       const Point3& h = b.half_extents;
                       // Face pairs normal to x, y, z weighted by area.
                       const double w[3] = {h.y() * h.z(), h.x() * h.z(), h.x() * h.y()};
                       const double total = w[0] + w[1] + w[2];
                       while (out.size() < count) {
                           const double pick = unit(rng) * total;
                           const int axis = pick < w[0] ? 0 : (pick < w[0] + w[1] ? 1 : 2);
                           Point3 p;
                           for (int a = 0; a < 3; ++a) p[a] = (2.0 * unit(rng) - 1.0) * h[a];
                           p[axis] = unit(rng) < 0.5 ? -h[axis] : h[axis];
                           out.push_back(b.center + p);
                       }
                   },
                   [&](const Torus& t) {
                       const double R = t.major_radius, r = t.minor_radius;
                       while (out.size() < count) {
                           const double u = 2.0 * std::numbers::pi * unit(rng);
                           const double v = 2.0 * std::numbers::pi * unit(rng);
                           // Area element is proportional to R + r cos v.
                           if (unit(rng) * (R + r) > R + r * std::cos(v)) continue;
                           const double ring = R + r * std::cos(v);
                           out.push_back(t.center + Point3(ring * std::cos(u), ring * std::sin(u), r * std::sin(v)));
                       }
                   },
               },
               shape);
    return out;
}

SampleSet sample_gt(const AnalyticShape& shape, std::span<const Point3> queries) {
    validate(shape);
    SampleSet out;
    out.reserve(queries.size());
    for (const auto& x : queries) out.push_back({x, analytic_sdf(shape, x)});
    return out;
}

SampleSet sample_gt(const MeshSdf& oracle, std::span<const Point3> queries) {
    SampleSet out;
    out.reserve(queries.size());
    for (const auto& x : queries) out.push_back({x, oracle(x)});
    return out;
}

void write_samples_csv(const SampleSet& samples, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw Error(fmt::format("{}: cannot write", path.string()));
    out << "x,y,z,sdf\n";
    for (const auto& s : samples)
        out << format_real(s.x.x()) << ',' << format_real(s.x.y()) << ',' << format_real(s.x.z()) << ','
            << format_real(s.s) << '\n';
}

SampleSet read_samples_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(fmt::format("{}: cannot open", path.string()));
    std::string line;
    if (!std::getline(in, line) || line != "x,y,z,sdf") throw ParseError(path.string(), 1, "expected header x,y,z,sdf");
    SampleSet out;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        const auto v = [&] {
            try {
                return parse_numbers(line, path.string());
            } catch (const Error&) {
                throw ParseError(path.string(), lineno, "bad number");
            }
        }();
        if (v.size() != 4) throw ParseError(path.string(), lineno, "expected four columns");
        out.push_back({Point3(v[0], v[1], v[2]), v[3]});
    }
    return out;
}

}  // namespace lisr
