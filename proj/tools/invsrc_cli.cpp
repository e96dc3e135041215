// Command line front end: mesh generation, forward assembly, spectral
// analysis, sparse recovery solves, certification, and the worked examples.
//
// Exit codes: 0 success, 2 certified infeasibility (basis pursuit data left
// the admissible range, or a certificate battery that fails), 1 any error.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "invsrc/certify.hpp"
#include "invsrc/conductivity.hpp"
#include "invsrc/config.hpp"
#include "invsrc/forward.hpp"
#include "invsrc/harness.hpp"
#include "invsrc/matrix_io.hpp"
#include "invsrc/mesh.hpp"
#include "invsrc/solvers.hpp"
#include "invsrc/source.hpp"
#include "invsrc/spectral.hpp"

namespace {

using namespace invsrc;

struct CertifiedInfeasible : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Globals {
    std::string config_path;
    std::uint64_t seed = 42;
    std::string out;

    Config config() const {
        if (config_path.empty()) return {};
        return Config::parse_file(config_path);
    }

    std::string out_or(const std::string& fallback) const {
        return out.empty() ? fallback : out;
    }
};

const char* domain_name(DomainTag tag) {
    switch (tag) {
    case DomainTag::unit_square: return "unit_square";
    case DomainTag::cross: return "cross";
    default: return "external";
    }
}

DomainTag parse_domain(const std::string& name) {
    if (name == "unit_square" || name == "square") {
        return DomainTag::unit_square;
    }
    if (name == "cross") return DomainTag::cross;
    throw std::invalid_argument("unknown domain '" + name +
                                "'; expected unit_square or cross");
}

Vec read_vector(const std::string& path) {
    const Mat m = read_matrix_market_file(path);
    if (m.cols() != 1) {
        throw std::runtime_error(path + " holds a " +
                                 std::to_string(m.rows()) + "x" +
                                 std::to_string(m.cols()) +
                                 " matrix; expected a single column");
    }
    return m.col(0);
}

void print_mesh_summary(const Mesh& mesh) {
    std::cout << "vertices " << mesh.vertex_count() << ", triangles "
              << mesh.triangle_count() << ", boundary nodes "
              << mesh.boundary_nodes.size() << ", h_max " << mesh.h_max
              << ", area " << mesh.total_area() << "\n";
}

void print_solution(const SolveResult& result, const Vec& weights) {
    std::cout << "status " << to_string(result.status) << ", iterations "
              << result.iterations << ", objective " << result.objective
              << ", residual " << result.residual_norm << ", optimality "
              << result.optimality << "\n";
    const auto support =
        extract_support(result.x, default_support_threshold(result.x));
    std::cout << "support (" << support.size() << " entries):\n";
    for (Index i : support) {
        std::cout << "  " << i << "  " << std::setprecision(10) << result.x(i)
                  << "  (weight " << weights(i) << ")\n";
    }
}

void write_solution(const Globals& globals, const Vec& x) {
    if (globals.out.empty()) return;
    std::filesystem::path path(globals.out);
    if (path.extension() == ".mtx") {
        if (path.has_parent_path()) {
            std::filesystem::create_directories(path.parent_path());
        }
    } else {
        std::filesystem::create_directories(path);
        path /= "solution.mtx";
    }
    write_matrix_market_file(x, path.string());
    std::cout << "wrote " << path.string() << "\n";
}

struct SpectralSetup {
    Mat A;
    SpectralModel spectral;
    Index k;
    Mat P;
    Vec w;
};

SpectralSetup load_spectral(const std::string& matrix_path, int k_request) {
    Mat A = read_matrix_market_file(matrix_path);
    SpectralModel spectral(A);
    Index k = k_request <= 0 ? spectral.rank()
                             : std::min<Index>(k_request, spectral.rank());
    Mat P = spectral.projection(k);
    Vec w = weight_vector(P);
    return {std::move(A), std::move(spectral), k, std::move(P), std::move(w)};
}

void print_certificate(const CertificateReport& report) {
    std::cout << std::setprecision(10);
    std::cout << "C.1 sign system feasible: "
              << (report.c1_feasible ? "yes" : "no") << "\n";
    if (report.c1_feasible) {
        std::cout << "C.2 off-support margin: " << report.c2_margin
                  << (report.c2_holds ? " (< 1, holds)" : " (>= 1, fails)")
                  << "\n";
    }
    if (report.dual_certificate.size() > 0) {
        std::cout << "dual certificate: on-support residual "
                  << report.nbp1_residual << ", off-support margin "
                  << report.nbp2_margin << ", valid "
                  << (report.dual_valid ? "yes" : "no") << "\n";
    }
    std::cout << "injective on support: "
              << (report.injective_on_support ? "yes" : "no")
              << " (sigma_min " << report.sigma_min_support << ")\n";
    std::cout << "projected supports disjoint: "
              << (report.disjoint_supports ? "yes" : "no") << "\n";
    std::cout << "orthocomplement members: [";
    for (Index i = 0; i < report.ortho_members.size(); ++i) {
        std::cout << (i ? " " : "") << report.ortho_members(i);
    }
    std::cout << "]\n";
    std::cout << "alpha_max: " << report.alpha_max << "\n";
    std::cout << "certified: " << (report.certified() ? "yes" : "no") << "\n";
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"sparse sink/source recovery from boundary potentials"};
    app.require_subcommand(1);

    Globals globals;
    app.add_option("--config", globals.config_path,
                   "key = value configuration file")
        ->check(CLI::ExistingFile);
    app.add_option("--seed", globals.seed, "random number generator seed");
    app.add_option("--out", globals.out, "output file or directory");

    // ---- mesh ----
    auto* mesh_cmd = app.add_subcommand("mesh", "triangulations");
    mesh_cmd->require_subcommand(1);
    mesh_cmd->fallthrough();

    std::string mesh_domain;
    int mesh_divisions = 0;
    bool mesh_grade = false;
    auto* mesh_build =
        mesh_cmd->add_subcommand("build", "structured domain triangulation");
    mesh_build->add_option("--domain", mesh_domain,
                           "unit_square or cross");
    mesh_build->add_option("--divisions", mesh_divisions,
                           "cells per unit length");
    mesh_build->add_flag("--grade", mesh_grade,
                         "jitter interior vertices (seeded)");
    mesh_build->fallthrough();
    mesh_build->callback([&] {
        const Config cfg = globals.config();
        DomainSpec spec;
        spec.type = parse_domain(mesh_domain.empty()
                                     ? cfg.get_string("domain", "unit_square")
                                     : mesh_domain);
        spec.divisions = mesh_divisions > 0
                             ? mesh_divisions
                             : cfg.get_int("mesh.divisions", 8);
        spec.quality_floor = cfg.get_double("mesh.quality_floor", 0.05);
        if (mesh_grade || cfg.get_bool("mesh.grading", false)) {
            spec.grading_seed = globals.seed;
        }
        const Mesh mesh = build_domain(spec);
        print_mesh_summary(mesh);
        const std::string path = globals.out_or("mesh.txt");
        write_mesh_file(mesh, path);
        std::cout << "wrote " << path << "\n";
    });

    std::string refine_in;
    auto* mesh_refine =
        mesh_cmd->add_subcommand("refine", "uniform quadrisection");
    mesh_refine->add_option("--in", refine_in, "mesh file to refine")
        ->required()
        ->check(CLI::ExistingFile);
    mesh_refine->fallthrough();
    mesh_refine->callback([&] {
        const Mesh fine = refine(read_mesh_file(refine_in));
        print_mesh_summary(fine);
        const std::string path = globals.out_or("mesh_fine.txt");
        write_mesh_file(fine, path);
        std::cout << "wrote " << path << "\n";
    });

    // ---- forward ----
    auto* forward_cmd = app.add_subcommand("forward", "boundary trace operator");
    forward_cmd->require_subcommand(1);
    forward_cmd->fallthrough();

    std::string fwd_mesh_path, fwd_sigma;
    auto* fwd_assemble = forward_cmd->add_subcommand(
        "assemble", "assemble the forward matrix column by column");
    fwd_assemble->add_option("--mesh", fwd_mesh_path, "mesh file")
        ->check(CLI::ExistingFile);
    fwd_assemble->add_option("--sigma", fwd_sigma,
                             "conductivity: smooth, constant:<v>, or number");
    fwd_assemble->fallthrough();
    fwd_assemble->callback([&] {
        const Config cfg = globals.config();
        Mesh mesh;
        if (!fwd_mesh_path.empty()) {
            mesh = read_mesh_file(fwd_mesh_path);
        } else {
            DomainSpec spec;
            spec.type = parse_domain(cfg.get_string("domain", "unit_square"));
            spec.divisions = cfg.get_int("mesh.divisions", 8);
            if (cfg.get_bool("mesh.grading", false)) {
                spec.grading_seed = globals.seed;
            }
            mesh = build_domain(spec);
        }
        const Conductivity sigma = Conductivity::parse(
            fwd_sigma.empty() ? cfg.get_string("sigma", "constant:1")
                              : fwd_sigma);
        AssemblyOptions options;
        options.quadrature_order = cfg.get_int("forward.quadrature_order", 2);
        NeumannSolver solver(mesh, sigma, options);
        const Mat A = solver.forward_matrix();
        std::cout << "forward matrix " << A.rows() << " x " << A.cols()
                  << ", h_max " << mesh.h_max << "\n";

        // --out ending in .mtx names the matrix file itself; anything else
        // is a directory receiving A.mtx and A.json
        const std::string out = globals.out_or("forward");
        std::filesystem::path matrix_path(out);
        std::filesystem::path meta_path;
        if (matrix_path.extension() == ".mtx") {
            if (matrix_path.has_parent_path()) {
                std::filesystem::create_directories(matrix_path.parent_path());
            }
            meta_path = matrix_path;
            meta_path.replace_extension(".json");
        } else {
            std::filesystem::create_directories(out);
            matrix_path = std::filesystem::path(out) / "A.mtx";
            meta_path = std::filesystem::path(out) / "A.json";
        }
        write_matrix_market_file(A, matrix_path.string());
        ForwardMetadata meta;
        meta.rows = A.rows();
        meta.cols = A.cols();
        meta.trace_order = mesh.boundary_nodes;
        meta.frame_size = A.cols();
        meta.domain = domain_name(mesh.domain_tag);
        meta.conductivity = sigma.name();
        meta.quadrature_order = options.quadrature_order;
        meta.h_max = mesh.h_max;
        write_forward_metadata_file(meta, meta_path.string());
        std::cout << "wrote " << matrix_path.string() << " and "
                  << meta_path.string() << "\n";
    });

    // ---- spectral ----
    auto* spectral_cmd =
        app.add_subcommand("spectral", "singular value analysis");
    spectral_cmd->require_subcommand(1);
    spectral_cmd->fallthrough();

    std::string svd_matrix;
    int svd_k = 0;
    auto* spectral_svd = spectral_cmd->add_subcommand(
        "svd", "singular values, projection rank, and recovery weights");
    spectral_svd->add_option("--matrix", svd_matrix, "forward matrix (.mtx)")
        ->required()
        ->check(CLI::ExistingFile);
    spectral_svd->add_option("--k", svd_k, "truncation level (0 = rank)");
    spectral_svd->fallthrough();
    spectral_svd->callback([&] {
        const SpectralSetup setup = load_spectral(svd_matrix, svd_k);
        const Vec& sv = setup.spectral.singular_values();
        std::cout << "rank " << setup.spectral.rank() << " of "
                  << sv.size() << ", sigma_1 " << sv(0) << ", sigma_rank "
                  << sv(setup.spectral.rank() - 1) << ", k " << setup.k
                  << "\n";
        if (!globals.out.empty()) {
            std::filesystem::create_directories(globals.out);
            const auto base = std::filesystem::path(globals.out);
            {
                std::ofstream f(base / "singular_values.csv");
                f << "index,value\n" << std::setprecision(17);
                for (Index i = 0; i < sv.size(); ++i) {
                    f << (i + 1) << ',' << sv(i) << '\n';
                }
            }
            {
                std::ofstream f(base / "weights.csv");
                f << "index,weight\n" << std::setprecision(17);
                for (Index i = 0; i < setup.w.size(); ++i) {
                    f << i << ',' << setup.w(i) << '\n';
                }
            }
            std::cout << "wrote singular_values.csv and weights.csv under "
                      << globals.out << "\n";
        }
    });

    // ---- solve ----
    auto* solve_cmd = app.add_subcommand("solve", "sparse recovery");
    solve_cmd->require_subcommand(1);
    solve_cmd->fallthrough();

    std::string bp_matrix, bp_data;
    int bp_k = 0;
    bool bp_unweighted = false;
    auto* solve_bp = solve_cmd->add_subcommand(
        "bp", "equality-constrained weighted l1 minimization");
    solve_bp->add_option("--matrix", bp_matrix, "forward matrix (.mtx)")
        ->required()
        ->check(CLI::ExistingFile);
    solve_bp->add_option("--data", bp_data, "boundary data (.mtx, one column)")
        ->required()
        ->check(CLI::ExistingFile);
    solve_bp->add_option("--k", bp_k, "truncation level (0 = rank)");
    solve_bp->add_flag("--unweighted", bp_unweighted,
                       "minimize the plain l1 norm instead");
    solve_bp->fallthrough();
    solve_bp->callback([&] {
        const SpectralSetup setup = load_spectral(bp_matrix, bp_k);
        const Vec b = read_vector(bp_data);
        if (b.size() != setup.A.rows()) {
            throw std::runtime_error("data length does not match matrix rows");
        }
        const Vec d = setup.spectral.apply_pinv(b, setup.k);
        const Vec weights =
            bp_unweighted ? Vec::Ones(setup.P.cols()).eval() : setup.w;
        const SolveResult result = solve_weighted_bp(setup.P, weights, d);
        print_solution(result, setup.w);
        write_solution(globals, result.x);
        if (result.status == SolveStatus::infeasible) {
            throw CertifiedInfeasible(
                "data lies outside the range of the projected operator");
        }
    });

    std::string lasso_matrix, lasso_data;
    int lasso_k = 0;
    bool lasso_unweighted = false;
    double lasso_alpha = 0.0;
    auto* solve_lasso = solve_cmd->add_subcommand(
        "lasso", "weighted l1-penalized least squares");
    solve_lasso->add_option("--matrix", lasso_matrix, "forward matrix (.mtx)")
        ->required()
        ->check(CLI::ExistingFile);
    solve_lasso
        ->add_option("--data", lasso_data, "boundary data (.mtx, one column)")
        ->required()
        ->check(CLI::ExistingFile);
    solve_lasso->add_option("--alpha", lasso_alpha, "penalty strength")
        ->required();
    solve_lasso->add_option("--k", lasso_k, "truncation level (0 = rank)");
    solve_lasso->add_flag("--unweighted", lasso_unweighted,
                          "penalize the plain l1 norm instead");
    solve_lasso->fallthrough();
    solve_lasso->callback([&] {
        const SpectralSetup setup = load_spectral(lasso_matrix, lasso_k);
        const Vec b = read_vector(lasso_data);
        if (b.size() != setup.A.rows()) {
            throw std::runtime_error("data length does not match matrix rows");
        }
        const Vec d = setup.spectral.apply_pinv(b, setup.k);
        const Vec weights =
            lasso_unweighted ? Vec::Ones(setup.P.cols()).eval() : setup.w;
        const SolveResult result =
            solve_weighted_lasso(setup.P, d, weights, lasso_alpha);
        print_solution(result, setup.w);
        write_solution(globals, result.x);
    });

    // ---- certify ----
    std::string cert_matrix;
    int cert_k = 0;
    std::vector<long long> cert_support;
    std::vector<double> cert_values;
    auto* certify_cmd = app.add_subcommand(
        "certify", "recoverability certificates for a candidate support");
    certify_cmd->add_option("--matrix", cert_matrix, "forward matrix (.mtx)")
        ->required()
        ->check(CLI::ExistingFile);
    certify_cmd->add_option("--k", cert_k, "truncation level (0 = rank)");
    certify_cmd
        ->add_option("--support", cert_support,
                     "candidate support indices (0-based)")
        ->required()
        ->delimiter(',');
    certify_cmd
        ->add_option("--values", cert_values,
                     "signed magnitudes (default: all +1)")
        ->delimiter(',');
    certify_cmd->fallthrough();
    certify_cmd->callback([&] {
        const SpectralSetup setup = load_spectral(cert_matrix, cert_k);
        SourceConfig source;
        source.n = setup.P.cols();
        for (long long i : cert_support) source.support.push_back(i);
        if (cert_values.empty()) {
            source.values = Vec::Ones(source.sparsity());
        } else {
            source.values.resize(static_cast<Index>(cert_values.size()));
            for (std::size_t i = 0; i < cert_values.size(); ++i) {
                source.values(static_cast<Index>(i)) = cert_values[i];
            }
        }
        source.validate();
        const CertificateReport report =
            run_certificates(setup.A, setup.P, setup.w, source);
        print_certificate(report);
        if (!globals.out.empty()) {
            std::filesystem::create_directories(globals.out);
            const auto path =
                (std::filesystem::path(globals.out) / "certificate.json")
                    .string();
            std::ofstream f(path);
            f << certificate_json_string(report) << "\n";
            std::cout << "wrote " << path << "\n";
        }
        if (!report.certified()) {
            throw CertifiedInfeasible(
                "support is not certified recoverable at this truncation");
        }
    });

    // ---- example ----
    auto* example_cmd = app.add_subcommand("example", "worked examples");
    example_cmd->require_subcommand(1);
    example_cmd->fallthrough();
    int example_id = 0;
    auto* example_run =
        example_cmd->add_subcommand("run", "run one documented example");
    example_run->add_option("id", example_id, "example id (0-3)")
        ->required()
        ->check(CLI::Range(0, 3));
    example_run->fallthrough();
    example_run->callback([&] {
        const Config cfg = globals.config();
        const ExampleBundle bundle =
            run_example(example_id, cfg, globals.seed);
        std::cout << "example " << bundle.id << " on " << bundle.domain
                  << " (sigma " << bundle.conductivity << ", k " << bundle.k
                  << ")\n";
        std::cout << "certificate: "
                  << (bundle.certificate.certified() ? "certified"
                                                     : "not certified")
                  << ", alpha_max " << bundle.certificate.alpha_max << "\n";
        for (const auto& run : bundle.runs) {
            std::cout << "  run " << run.label << ": alpha " << run.alpha
                      << ", support "
                      << (run.support_matches_truth ? "matches truth"
                                                    : "differs from truth")
                      << ", signs "
                      << (run.sign_consistent ? "consistent" : "inconsistent");
            if (run.morozov_alpha >= 0.0) {
                std::cout << ", morozov alpha " << run.morozov_alpha;
            }
            if (run.expected_degraded) std::cout << " (degradation expected)";
            std::cout << "\n";
        }
        for (const auto& study : bundle.studies) {
            std::cout << "  study " << to_string(study.formulation)
                      << ": slope " << study.slope << ", R^2 "
                      << study.r_squared << "\n";
        }
        const std::string dir =
            globals.out_or("out/example" + std::to_string(example_id));
        for (const auto& path : export_artifacts(bundle, dir)) {
            std::cout << "wrote " << path << "\n";
        }
    });

    // ---- convergence ----
    auto* convergence_cmd = app.add_subcommand(
        "convergence", "noise-versus-error study for both formulations");
    convergence_cmd->fallthrough();
    convergence_cmd->callback([&] {
        const Config cfg = globals.config();
        const ExampleBundle bundle = run_example(3, cfg, globals.seed);
        for (const auto& study : bundle.studies) {
            std::cout << to_string(study.formulation) << ": slope "
                      << study.slope << ", intercept " << study.intercept
                      << ", R^2 " << study.r_squared << " (C " << study.C
                      << ")\n";
            for (const auto& warning : study.warnings) {
                std::cout << "  warning: " << warning << "\n";
            }
        }
        const std::string dir = globals.out_or("out/convergence");
        for (const auto& path : export_artifacts(bundle, dir)) {
            std::cout << "wrote " << path << "\n";
        }
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    } catch (const CertifiedInfeasible& e) {
        std::cout << "certified infeasible: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
