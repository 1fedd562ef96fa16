#include "lisr/cli.hpp"

#include <fstream>
#include <limits>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "lisr/query.hpp"
#include "lisr/sdf_oracle.hpp"
#include "lisr/seed.hpp"
#include "lisr/solver.hpp"
#include "lisr/surfacing.hpp"

namespace lisr {

namespace {

class UsageError : public Error {
public:
    using Error::Error;
};

struct Io {
    std::ostream& out;
    std::ostream& err;

    void warn(const std::string& msg) const { err << "warning: " << msg << '\n'; }
};

// Ground-truth signed distance in the input's own coordinates.
struct Oracle {
    std::optional<AnalyticShape> shape;
    std::optional<MeshSdf> mesh;

    double operator()(const Point3& x) const { return shape ? analytic_sdf(*shape, x) : (*mesh)(x); }

    PointCloud surface_samples(std::size_t count, std::uint64_t seed) const {
        return shape ? sample_analytic_surface(*shape, count, seed) : sample_surface(mesh->mesh(), count, seed);
    }
};

AnalyticShape shape_arg(const std::string& text) {
    try {
        return parse_shape(text);
    } catch (const Error& e) {
        throw UsageError(e.what());
    }
}

Oracle oracle_from(const std::optional<std::string>& shape, const std::optional<std::filesystem::path>& mesh) {
    Oracle o;
    if (shape) o.shape = shape_arg(*shape);
    else if (mesh) o.mesh.emplace(load_mesh(*mesh));
    return o;
}

bool has_oracle(const Oracle& o) { return o.shape || o.mesh; }

// The oracle named by --gt-*, falling back to the input surface when `fallback` is set.
Oracle ground_truth(const RunConfig& c, bool fallback) {
    if (c.gt_shape && c.gt_mesh) throw UsageError("give at most one of --gt-shape and --gt-mesh");
    Oracle o = oracle_from(c.gt_shape, c.gt_mesh);
    if (!has_oracle(o) && fallback) o = oracle_from(c.shape, c.mesh);
    if (!has_oracle(o)) throw UsageError("a ground-truth surface is required (--gt-shape or --gt-mesh)");
    return o;
}

PointCloud input_cloud(const RunConfig& c) {
    const int sources = int(c.input.has_value()) + int(c.shape.has_value()) + int(c.mesh.has_value());
    if (sources != 1) throw UsageError("exactly one of --input, --shape and --mesh is required");
    if (c.input) return load_point_cloud(*c.input);
    return oracle_from(c.shape, c.mesh).surface_samples(c.cloud_size, derive_seed(c.seed, "cloud"));
}

KernelSet choose_kernels(const PointCloud& cloud, std::size_t q, std::uint64_t seed) {
    if (cloud.size() <= q) return KernelSet(cloud);
    return farthest_point_sample(cloud, q, derive_seed(seed, "fps"));
}

QuerySet choose_queries(const RunConfig& c, const KernelSet& kernels) {
    if (c.queries == "algorithm2") return select_query_points_fast(kernels, c.safety);
    std::size_t count = c.uniform_count;
    if (c.queries.rfind("uniform", 0) != 0) throw UsageError(fmt::format("unknown query strategy '{}'", c.queries));
    if (c.queries.size() > 7) {
        if (c.queries[7] != ':') throw UsageError(fmt::format("unknown query strategy '{}'", c.queries));
        try {
            std::size_t used = 0;
            count = std::stoul(c.queries.substr(8), &used);
            if (used != c.queries.size() - 8) throw std::invalid_argument("trailing");
        } catch (const std::exception&) {
            throw UsageError(fmt::format("bad query count in '{}'", c.queries));
        }
    }
    return select_query_points_uniform(count, derive_seed(c.seed, "queries"));
}

std::string strategy_name(const QuerySet& qs) {
    return qs.strategy == QueryStrategy::Algorithm2 ? "algorithm2" : "uniform";
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary);
    if (!f || !(f << text)) throw Error(fmt::format("{}: cannot write", path.string()));
}

void ensure_out(const RunConfig& c) { std::filesystem::create_directories(c.out); }

std::filesystem::path model_path(const RunConfig& c) { return c.model.value_or(c.out / "model.lisr"); }
std::filesystem::path pred_path(const RunConfig& c) { return c.pred.value_or(c.out / "mesh.obj"); }

// ---------------------------------------------------------------------------
// Commands

void cmd_sample_sdf(const RunConfig& c, const Io& io) {
    const Oracle oracle = oracle_from(c.shape, c.mesh);
    if (!has_oracle(oracle)) throw UsageError("sample-sdf needs --shape or --mesh");
    QuerySet qs;
    if (c.queries == "algorithm2") {
        if (!c.kernels_from) throw UsageError("algorithm2 queries need --kernels-from");
        const auto kernels = choose_kernels(load_point_cloud(*c.kernels_from), c.q, c.seed);
        qs = choose_queries(c, kernels);
    } else {
        qs = choose_queries(c, KernelSet({Point3::Zero()}));
    }
    const auto samples = [&] {
        SampleSet s;
        s.reserve(qs.points.size());
        for (const auto& x : qs.points) s.push_back({x, oracle(x)});
        return s;
    }();
    ensure_out(c);
    write_samples_csv(samples, c.out / "samples.csv");
    write_queries_csv(qs, c.out / "queries.csv");
    io.out << fmt::format("sample-sdf: {} samples ({}) -> {}\n", samples.size(), qs.describe(),
                          (c.out / "samples.csv").string());
}

void cmd_fit(const RunConfig& c, const Io& io) {
    const Oracle gt = ground_truth(c, true);
    const PointCloud cloud = input_cloud(c);
    auto [normalized, frame] = normalize_to_unit_cube(cloud, c.margin);
    const KernelSet kernels = choose_kernels(normalized, c.q, c.seed);
    const QuerySet qs = choose_queries(c, kernels);

    // Distances scale with the normalization, signs do not.
    SampleSet samples;
    samples.reserve(qs.points.size());
    for (const auto& y : qs.points) samples.push_back({y, frame.scale * gt(frame.invert(y))});

    const DesignMatrix vt = assemble_design_matrix(c.basis, kernels, qs.points);
    const Eigen::VectorXd s = targets(samples);
    FitReport report;
    if (c.solver == "closed") report = closed_form_fit(vt, s, c.rank_tol);
    else if (c.solver == "gd") report = gd_fit(vt, s, GdOptions{c.step, c.iters, c.tol}, c.rank_tol);
    else throw UsageError(fmt::format("unknown solver '{}' (closed | gd)", c.solver));
    report.gram.strategy = strategy_name(qs);
    report.gram.q = kernels.size();

    if (report.rank_deficient()) {
        const auto msg = fmt::format("V V^T is rank deficient ({} of {})", report.gram.rank, report.gram.max_rank);
        if (c.basis == BasisKind::CSRBF && qs.strategy == QueryStrategy::Algorithm2)
            throw Error(msg + " for CSRBF with algorithm2 queries, which cannot happen for valid kernels");
        io.warn(msg + "; gradient descent cannot reach every optimum");
    }

    std::optional<double> epsilon;
    if (qs.strategy == QueryStrategy::Algorithm2) epsilon = qs.epsilon;
    ImplicitModel model(c.basis, kernels, report.alpha, epsilon);
    model.set_frame(frame);

    ensure_out(c);
    save_model(model, model_path(c));
    write_text(c.out / "fit_report.csv", FitReport::csv_header() + "\n" + report.csv_row() + "\n");
    io.out << fmt::format("fit: {} kernels, {} queries ({}), basis {}\n", kernels.size(), qs.points.size(),
                          qs.describe(), to_string(c.basis));
    io.out << report.text();
}

void cmd_rank_report(const RunConfig& c, const Io& io) {
    const PointCloud cloud = input_cloud(c);
    const auto normalized = normalize_to_unit_cube(cloud, c.margin).first;
    const KernelSet kernels = choose_kernels(normalized, c.q, c.seed);
    const QuerySet fast = select_query_points_fast(kernels, c.safety);
    const QuerySet uniform = select_query_points_uniform(c.uniform_count, derive_seed(c.seed, "queries"));

    std::string csv = RankReport::csv_header() + "\n";
    for (auto kind : {BasisKind::TriHarmonic, BasisKind::MonoHarmonic, BasisKind::HRBF, BasisKind::CSRBF}) {
        const QuerySet& qs = kind == BasisKind::CSRBF ? fast : uniform;
        RankReport r = rank_of_gram(assemble_design_matrix(kind, kernels, qs.points), c.rank_tol);
        r.strategy = strategy_name(qs);
        r.q = kernels.size();
        csv += r.csv_row() + "\n";
        io.out << r.text() << '\n';
    }
    ensure_out(c);
    write_text(c.out / "rank_report.csv", csv);
}

IsoSurface extract_model(const ImplicitModel& model, const RunConfig& c) {
    GridSpec grid;
    grid.resolution = c.resolution;
    grid.iso = c.iso;
    IsoSurface iso = extract_isosurface(model, grid);
    if (const auto& f = model.frame()) iso.mesh.vertices = f->invert(iso.mesh.vertices);
    return iso;
}

void cmd_extract(const RunConfig& c, const Io& io) {
    const ImplicitModel model = load_model(model_path(c));
    const IsoSurface iso = extract_model(model, c);
    if (iso.mesh.triangles.empty()) io.warn("the field has no iso-level crossing on the grid; the mesh is empty");
    ensure_out(c);
    write_obj(iso.mesh, c.out / "mesh.obj");
    io.out << fmt::format("extract: {} vertices, {} triangles (resolution {})\n", iso.mesh.vertices.size(),
                          iso.mesh.triangles.size(), c.resolution);
    if (model.kind() == BasisKind::CSRBF)
        io.out << fmt::format("extract: {} cross-cell triangles (on grid edges spanning two Voronoi cells)\n",
                              iso.cross_cell_triangles);
}

void cmd_eval(const RunConfig& c, const Io& io, bool fallback) {
    const Oracle gt = ground_truth(c, fallback);
    const TriangleMesh pred = load_mesh(pred_path(c));
    // One sampling seed for both sides: a mesh compared with itself scores exactly zero.
    const auto seed = derive_seed(c.seed, "eval");
    const PointCloud a = sample_surface(pred, c.samples, seed);
    const PointCloud b = gt.surface_samples(c.samples, seed);
    const MetricReport r = f_score(a, b, c.tau, c.cd_mean ? ChamferMode::Mean : ChamferMode::Sum);
    ensure_out(c);
    write_text(c.out / "metrics.csv", MetricReport::csv_header() + "\n" + r.csv_row() + "\n");
    io.out << r.text();
}

void cmd_perturb(const RunConfig& c, const Io& io) {
    const ImplicitModel model = load_model(model_path(c));
    const auto sample_seed = derive_seed(c.seed, "perturb-samples");
    const IsoSurface base = extract_model(model, c);
    if (base.mesh.triangles.empty()) throw Error("the unperturbed model extracts to an empty mesh");
    const PointCloud reference = sample_surface(base.mesh, c.samples, sample_seed);

    ensure_out(c);
    std::string csv = "eta,chamfer_l1,f_score,triangles\n";
    io.out << fmt::format("{:>10}  {:>14}  {:>8}  {:>9}\n", "eta", "chamfer_l1", "f_score", "triangles");
    for (double eta : c.etas) {
        // One noise seed for every eta, so the sweep rescales a single direction.
        const auto noise_seed = derive_seed(c.seed, "perturb");
        const ImplicitModel moved =
            c.block ? perturb_block(model, *c.block, eta, noise_seed) : perturb_coefficients(model, eta, noise_seed);
        save_model(moved, c.out / fmt::format("model_eta_{:g}.lisr", eta));
        const IsoSurface iso = extract_model(moved, c);
        double cd = std::numeric_limits<double>::infinity(), fs = 0.0;
        if (!iso.mesh.triangles.empty()) {
            const auto r = f_score(sample_surface(iso.mesh, c.samples, sample_seed), reference, c.tau,
                                   c.cd_mean ? ChamferMode::Mean : ChamferMode::Sum);
            cd = r.chamfer_l1;
            fs = r.f_score;
        } else {
            io.warn(fmt::format("eta {:g}: perturbed model extracts to an empty mesh", eta));
        }
        csv += fmt::format("{},{},{},{}\n", format_real(eta), format_real(cd), format_real(fs), iso.mesh.triangles.size());
        io.out << fmt::format("{:>10.3g}  {:>14.6g}  {:>8.4f}  {:>9}\n", eta, cd, fs, iso.mesh.triangles.size());
    }
    write_text(c.out / "perturb.csv", csv);
}

// ---------------------------------------------------------------------------
// Option wiring

void source_options(CLI::App* s, RunConfig& c) {
    s->add_option("--input", c.input, "Point cloud file (.xyz, .obj, .ply)");
    s->add_option("--shape", c.shape, "Analytic shape: sphere:R, box:H or box:HX,HY,HZ, torus:R,r, optional @X,Y,Z");
    s->add_option("--mesh", c.mesh, "Closed triangle mesh (.obj, .ply)");
    s->add_option("--cloud-size", c.cloud_size, "Points sampled from --shape or --mesh")->capture_default_str();
    s->add_option("--margin", c.margin, "Largest half-extent after normalization")->capture_default_str();
}

void kernel_options(CLI::App* s, RunConfig& c) {
    s->add_option("--q", c.q, "Kernel count (farthest-point subsampled when the cloud is larger)")
        ->capture_default_str();
    s->add_option("--safety", c.safety, "Algorithm-2 offset as a fraction of the smallest inradius")
        ->capture_default_str();
    s->add_option("--rank-tol", c.rank_tol, "Relative singular value cutoff")->capture_default_str();
}

void fit_options(CLI::App* s, RunConfig& c, std::string& basis) {
    source_options(s, c);
    kernel_options(s, c);
    s->add_option("--gt-shape", c.gt_shape, "Ground-truth analytic shape (defaults to the input)");
    s->add_option("--gt-mesh", c.gt_mesh, "Ground-truth closed mesh (defaults to the input)");
    s->add_option("--basis", basis, "TriHarmonic | MonoHarmonic | HRBF | CSRBF")->capture_default_str();
    s->add_option("--queries", c.queries, "algorithm2 | uniform[:count]")->capture_default_str();
    s->add_option("--uniform-count", c.uniform_count, "Uniform query count")->capture_default_str();
    s->add_option("--solver", c.solver, "closed | gd")->capture_default_str();
    s->add_option("--step", c.step, "Gradient descent step (automatic when omitted)");
    s->add_option("--iters", c.iters, "Gradient descent iteration limit")->capture_default_str();
    s->add_option("--tol", c.tol, "Gradient norm stopping tolerance")->capture_default_str();
}

void grid_options(CLI::App* s, RunConfig& c) {
    s->add_option("--resolution", c.resolution, "Grid nodes per axis")->capture_default_str();
    s->add_option("--iso", c.iso, "Iso value")->capture_default_str();
}

void metric_options(CLI::App* s, RunConfig& c, bool with_gt) {
    if (with_gt) {
        s->add_option("--gt-shape", c.gt_shape, "Ground-truth analytic shape");
        s->add_option("--gt-mesh", c.gt_mesh, "Ground-truth mesh");
    }
    s->add_option("--samples", c.samples, "Surface samples per mesh")->capture_default_str();
    s->add_option("--tau", c.tau, "F-score distance threshold")->capture_default_str();
    s->add_flag("--cd-mean", c.cd_mean, "Report the halved (mean) Chamfer-L1 instead of the two-term sum");
}

// The resolved configuration of the subcommand that ran, in config-file syntax.
std::string resolved_config(const CLI::App& app, const std::string& sub) {
    std::istringstream all(app.config_to_str(true, false));
    std::string line, root, section;
    while (std::getline(all, line)) {
        const auto eq = line.find('=');
        if (eq == std::string::npos || line.substr(eq + 1) == "\"\"") continue;  // unset optionals
        const auto key = line.substr(0, eq);
        if (key == "config") continue;
        if (key.find('.') == std::string::npos) root += line + "\n";
        else if (key.rfind(sub + ".", 0) == 0) section += line.substr(sub.size() + 1) + "\n";
    }
    return root + "[" + sub + "]\n" + section;
}

}  // namespace

void RunConfig::validate() const {
    if (q == 0) throw UsageError("q must be at least 1");
    if (resolution < 8) throw UsageError(fmt::format("resolution {} below minimum 8", resolution));
    if (cloud_size == 0) throw UsageError("cloud-size must be at least 1");
    if (samples == 0) throw UsageError("samples must be at least 1");
    if (!(tau > 0.0)) throw UsageError("tau must be positive");
    if (!(margin > 0.0 && margin <= 1.0)) throw UsageError("margin must lie in (0, 1]");
    for (double eta : etas)
        if (!(eta >= 0.0)) throw UsageError("eta values must be non-negative");
    for (const auto* p : {&input, &mesh, &gt_mesh, &kernels_from})
        if (*p && !std::filesystem::exists(**p)) throw Error(fmt::format("{}: file not found", (*p)->string()));
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    RunConfig c;
    std::string basis = std::string(to_string(c.basis));

    CLI::App app("Fit implicit surfaces with compactly supported radial basis functions", "lisr");
    app.fallthrough();
    app.require_subcommand(1);
    app.add_option("--seed", c.seed, "Top-level random seed")->capture_default_str();
    app.add_option("--out", c.out, "Output directory")->capture_default_str();
    app.set_config("--config", "", "Config file of key = value lines; [command] sections hold command options");
    app.allow_config_extras(CLI::config_extras_mode::error);

    auto* sample = app.add_subcommand("sample-sdf", "Write ground-truth SDF samples at chosen query points");
    sample->add_option("--shape", c.shape, "Analytic shape oracle");
    sample->add_option("--mesh", c.mesh, "Closed mesh oracle");
    sample->add_option("--queries", c.queries, "algorithm2 | uniform[:count]")->capture_default_str();
    sample->add_option("--uniform-count", c.uniform_count, "Uniform query count")->capture_default_str();
    sample->add_option("--kernels-from", c.kernels_from, "Point cloud supplying kernels for algorithm2");
    kernel_options(sample, c);

    auto* fit = app.add_subcommand("fit", "Fit model coefficients and report Gram diagnostics");
    fit_options(fit, c, basis);

    auto* rank = app.add_subcommand("rank-report", "Rank of V V^T for every basis kind on the same kernels");
    source_options(rank, c);
    kernel_options(rank, c);
    rank->add_option("--uniform-count", c.uniform_count, "Uniform query count for the global bases")
        ->capture_default_str();

    auto* extract = app.add_subcommand("extract", "Marching-cubes extraction of a model's zero set");
    extract->add_option("--model", c.model, "Model file (default <out>/model.lisr)");
    grid_options(extract, c);

    auto* eval = app.add_subcommand("eval", "Chamfer-L1 and F-score of a mesh against ground truth");
    eval->add_option("--pred", c.pred, "Predicted mesh (default <out>/mesh.obj)");
    metric_options(eval, c, true);

    auto* perturb = app.add_subcommand("perturb", "Coefficient noise sweep against the unperturbed surface");
    perturb->add_option("--model", c.model, "Model file (default <out>/model.lisr)");
    perturb->add_option("--eta", c.etas, "Noise amplitudes")->delimiter(',')->capture_default_str();
    perturb->add_option("--block", c.block, "Perturb only this kernel's coefficients (0-based)");
    grid_options(perturb, c);
    metric_options(perturb, c, false);

    auto* pipeline = app.add_subcommand("pipeline", "fit, extract and eval in one run");
    fit_options(pipeline, c, basis);
    grid_options(pipeline, c);
    metric_options(pipeline, c, false);

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? 0 : 2;
    }

    const Io io{out, err};
    const auto* active = app.get_subcommands().front();
    try {
        try {
            c.basis = parse_basis_kind(basis);
        } catch (const Error& e) {
            throw UsageError(e.what());
        }
        c.validate();
        const std::string name = active->get_name();
        if (name == "sample-sdf") cmd_sample_sdf(c, io);
        else if (name == "fit") cmd_fit(c, io);
        else if (name == "rank-report") cmd_rank_report(c, io);
        else if (name == "extract") cmd_extract(c, io);
        else if (name == "eval") cmd_eval(c, io, false);
        else if (name == "perturb") cmd_perturb(c, io);
        else if (name == "pipeline") {
            cmd_fit(c, io);
            cmd_extract(c, io);
            cmd_eval(c, io, true);
        }
        ensure_out(c);
        write_text(c.out / "config.resolved", resolved_config(app, name));
    } catch (const UsageError& e) {
        err << "error: " << e.what() << '\n' << "run with --help for usage\n";
        return 2;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}

}  // namespace lisr
