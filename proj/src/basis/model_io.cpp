#include <fstream>
#include <map>
#include <sstream>

#include <fmt/format.h>

#include "lisr/basis.hpp"

namespace lisr {

void save_model(const ImplicitModel& model, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw Error(fmt::format("{}: cannot write", path.string()));
    out << "version " << kModelFormatVersion << '\n';
    out << "basis_kind " << to_string(model.kind()) << '\n';
    if (model.epsilon()) out << "epsilon " << format_real(*model.epsilon()) << '\n';
    if (const auto& f = model.frame())
        out << "frame " << format_real(f->scale) << ' ' << format_real(f->translation.x()) << ' '
            << format_real(f->translation.y()) << ' ' << format_real(f->translation.z()) << '\n';
    out << "kernels " << model.kernels().size() << '\n';
    for (const auto& p : model.kernels().points())
        out << format_real(p.x()) << ' ' << format_real(p.y()) << ' ' << format_real(p.z()) << '\n';
    out << "alpha " << model.alpha().size() << '\n';
    for (Eigen::Index i = 0; i < model.alpha().size(); ++i) out << format_real(model.alpha()[i]) << '\n';
    if (!out) throw Error(fmt::format("{}: write failed", path.string()));
}

ImplicitModel load_model(const std::filesystem::path& path) {
    if (!std::filesystem::exists(path)) throw Error(fmt::format("{}: file not found", path.string()));
    std::ifstream in(path);
    if (!in) throw Error(fmt::format("{}: cannot open", path.string()));

    std::size_t lineno = 0;
    std::string line;
    auto next_line = [&](const char* what) {
        while (std::getline(in, line)) {
            ++lineno;
            if (!line.empty() && line.back() == '\r') line.pop_back();
            if (!line.empty()) return;
        }
        throw ParseError(path.string(), lineno, fmt::format("truncated model: missing {}", what));
    };

    std::optional<int> version;
    std::optional<BasisKind> kind;
    std::optional<double> epsilon;
    std::optional<NormalizeTransform> frame;
    std::vector<Point3> kernels;
    std::optional<Eigen::VectorXd> alpha;
    bool have_kernels = false;

    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string key;
        ls >> key;
        auto bad = [&](const std::string& msg) { return ParseError(path.string(), lineno, msg); };
        if (key == "version") {
            int v = 0;
            if (!(ls >> v)) throw bad("bad version");
            if (v != kModelFormatVersion) throw bad(fmt::format("unsupported model version {}", v));
            version = v;
        } else if (key == "basis_kind") {
            std::string name;
            ls >> name;
            try {
                kind = parse_basis_kind(name);
            } catch (const Error& e) {
                throw bad(e.what());
            }
        } else if (key == "epsilon") {
            double e = 0.0;
            if (!(ls >> e)) throw bad("bad epsilon");
            epsilon = e;
        } else if (key == "frame") {
            NormalizeTransform t;
            if (!(ls >> t.scale >> t.translation.x() >> t.translation.y() >> t.translation.z()) || !(t.scale > 0.0))
                throw bad("bad frame");
            frame = t;
        } else if (key == "kernels") {
            std::size_t q = 0;
            if (!(ls >> q) || q == 0) throw bad("bad kernel count");
            kernels.reserve(q);
            for (std::size_t i = 0; i < q; ++i) {
                next_line("kernel coordinates");
                std::istringstream ps(line);
                Point3 p;
                if (!(ps >> p.x() >> p.y() >> p.z())) throw bad("bad kernel coordinates");
                kernels.push_back(p);
            }
            have_kernels = true;
        } else if (key == "alpha") {
            std::size_t n = 0;
            if (!(ls >> n)) throw bad("bad coefficient count");
            Eigen::VectorXd a(static_cast<Eigen::Index>(n));
            for (std::size_t i = 0; i < n; ++i) {
                next_line("coefficients");
                std::istringstream ps(line);
                if (!(ps >> a[Eigen::Index(i)])) throw bad("bad coefficient");
            }
            alpha = std::move(a);
        } else {
            throw bad(fmt::format("unknown field '{}'", key));
        }
    }

    const auto missing = [&](const char* field) {
        return Error(fmt::format("{}: invalid model, missing field '{}'", path.string(), field));
    };
    if (!version) throw missing("version");
    if (!kind) throw missing("basis_kind");
    if (!have_kernels) throw missing("kernels");
    if (!alpha) throw missing("alpha");

    ImplicitModel model(*kind, KernelSet(std::move(kernels)), std::move(*alpha), epsilon);
    model.set_frame(frame);
    return model;
}

}  // namespace lisr
