#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "invsrc/certify.hpp"
#include "invsrc/conductivity.hpp"
#include "invsrc/config.hpp"
#include "invsrc/forward.hpp"
#include "invsrc/mesh.hpp"
#include "invsrc/solvers.hpp"
#include "invsrc/source.hpp"
#include "invsrc/spectral.hpp"
#include "invsrc/types.hpp"

namespace invsrc {

struct NoisySpec {
    double noise_level = 0.0;
    double tau = 0.0;
    std::uint64_t seed = 0;
    double delta = 0.0; // realized |b_delta - b_true|
};

struct Observation {
    Vec b_delta;
    Vec b_true;
    NoisySpec spec;
};

/// b_true = A x*; tau scales iid standard normal noise so that
/// tau / (max b_true - min b_true) equals the requested level.
Observation make_noisy_observation(const Mat& A, const SourceConfig& source,
                                   double noise_level, std::uint64_t seed);

/// Everything the inversion side needs: the coarse operator, its SVD, the
/// truncated projection, and the weights.
struct InverseModel {
    Mesh mesh;
    Conductivity sigma;
    Mat A;
    SpectralModel spectral;
    Index k = 0; // active truncation (requested level clamped to the rank)
    Mat P;
    Vec w;
};

InverseModel build_inverse_model(Mesh mesh, const Conductivity& sigma,
                                 Index k_requested);

/// Boundary data for x* computed on refine(inverse mesh) so the inversion
/// never sees its own discretization; rows follow the coarse trace order.
Vec forward_data_on_refined(const Mesh& inverse_mesh,
                            const Conductivity& sigma,
                            const Vec& coarse_coefficients);

std::vector<double> log_alpha_grid(double alpha_top, double alpha_bottom,
                                   int points_per_decade = 25);

struct MorozovSelection {
    double alpha = 0.0;
    double residual = 0.0;
    bool satisfied = false; // false: no grid point met the bound
    std::vector<double> alphas; // evaluated, largest first
    std::vector<double> residuals;
};

/// Walks the grid from the largest alpha down and returns the first (hence
/// largest) alpha whose fidelity residual is at most eta * delta; the grid
/// minimum with satisfied = false when none qualifies.
MorozovSelection morozov_select_alpha(
    const std::function<double(double)>& fidelity_residual, double delta,
    const std::vector<double>& alpha_grid, double eta = 1.1);

enum class Formulation { formA, formAd };

const char* to_string(Formulation f);

struct ConvergenceRecord {
    double delta = 0.0;
    double alpha = 0.0;
    double error_w = 0.0; // |W (x_alpha - x*)|
    double residual = 0.0;
    bool converged = true;
};

struct ConvergenceStudy {
    Formulation formulation = Formulation::formA;
    double C = 0.0; // alpha = C delta
    std::vector<ConvergenceRecord> records; // delta descending
    double slope = 0.0;
    double intercept = 0.0;
    double r_squared = 0.0;
    std::vector<std::string> warnings;
};

/// Per delta: model-consistent data A x*, exact-norm noise, alpha = C delta,
/// one weighted solve of the chosen formulation; least-squares line through
/// the loglog points.
ConvergenceStudy convergence_study(const InverseModel& model,
                                   const SourceConfig& source, double C,
                                   const std::vector<double>& deltas,
                                   Formulation formulation,
                                   std::uint64_t seed);

struct RunRecord {
    std::string label;
    double alpha = 0.0;
    NoisySpec noise;
    double delta_fidelity = 0.0; // noise magnitude seen by the fidelity term
    double morozov_alpha = -1.0; // < 0 when Morozov was not used
    bool weighted = true;
    SolveResult solve;
    double support_threshold = 0.0; // absolute cut used for the support below
    std::vector<Index> support;
    bool support_matches_truth = false;
    bool sign_consistent = false;
    bool expected_degraded = false;
    SourceConfig truth; // what this run tried to recover
};

struct ExampleBundle {
    int id = -1;
    std::uint64_t seed = 0;
    std::string domain;
    std::string conductivity;
    Index k = 0;
    Mesh inverse_mesh;
    Vec singular_values;
    Vec weights;
    SourceConfig truth;
    CertificateReport certificate; // battery for the configured truth
    std::vector<RunRecord> runs;
    std::vector<ConvergenceStudy> studies; // example 3 only
};

/// Reproduces the documented scenarios 0-3. Config keys override the
/// declared defaults (divisions, k, alpha, source placement, noise levels).
ExampleBundle run_example(int id, const Config& config, std::uint64_t seed);

/// results.csv, certificates.json, singular_values.csv, one SVG heatmap per
/// run plus one for the truth; convergence CSVs when studies are present.
std::vector<std::string> export_artifacts(const ExampleBundle& bundle,
                                          const std::string& out_dir);

/// The certificate battery serialized as an indented JSON object.
std::string certificate_json_string(const CertificateReport& report,
                                    int indent = 2);

} // namespace invsrc
