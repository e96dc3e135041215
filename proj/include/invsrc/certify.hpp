#pragma once

#include <utility>
#include <vector>

#include "invsrc/source.hpp"
#include "invsrc/types.hpp"

namespace invsrc {

struct ParallelColumnsReport {
    std::vector<std::pair<Index, Index>> pairs; // near-parallel column pairs
    std::vector<Index> degenerate;              // zero columns
    double worst_cosine = 0.0; // largest off-diagonal |cos| seen
    bool ok() const { return pairs.empty() && degenerate.empty(); }
};

/// Flags column pairs of A with |cos angle| > 1 - angle_tol. An empty report
/// certifies that no two columns are parallel, the hypothesis behind the
/// maximum property and single-source recovery.
ParallelColumnsReport check_parallel_columns(const Mat& A,
                                             double angle_tol = 1e-8);

struct CertificateReport {
    bool c1_feasible = false;
    Vec a; // sign-system coefficients, aligned with the support
    double c2_margin = 0.0; // max off-support |v_i|; pass iff < 1
    bool c2_holds = false;

    Vec dual_certificate; // c; empty when not constructed
    double nbp1_residual = 0.0;
    double nbp2_margin = 0.0;
    bool dual_valid = false;

    double sigma_min_support = 0.0;
    bool injective_on_support = false;

    bool disjoint_supports = false;
    Vec ortho_members; // |P e_j| per support index

    double alpha_max = 0.0; // +infinity when unconstrained

    bool certified() const { return c1_feasible && c2_holds; }
};

/// Two-step recoverability test: solve the s x s sign system
/// M a = sgn(x*_J) with M_ij = P_ij / w_i, then bound the induced
/// off-support values v_i strictly inside (-1, 1). A singular sign system is
/// reported as inconclusive, not an error. The outcome depends on the signs
/// of x* only; alpha_max additionally uses the magnitudes. On a pass the
/// induced dual certificate is built and verified.
CertificateReport check_c1_c2(const Mat& projection, const Vec& weights,
                              const SourceConfig& source);

struct DualCertificateReport {
    double nbp1_residual = 0.0; // on-support sign mismatch
    double nbp2_margin = 0.0;   // off-support magnitude
    bool valid = false;         // residual <= tol and margin < 1
};

/// Tests a candidate certificate c: the normalized projections P e_i /
/// |P e_i| must pair with c to sgn(x*_i) on the support and stay strictly
/// inside (-1, 1) off it.
DualCertificateReport verify_dual_certificate(const Mat& projection,
                                              const SourceConfig& source,
                                              const Vec& c, double tol = 1e-8);

struct DisjointSupportsReport {
    bool disjoint = false;
    Mat overlap; // s x s, max co-located relative magnitude per pair
};

/// Numerical support of P e_j is taken relative to its largest entry.
DisjointSupportsReport check_disjoint_supports(const Mat& projection,
                                               const std::vector<Index>& J,
                                               double supp_tol = 1e-3);

struct OrthocomplementReport {
    bool member = false;
    double norm = 0.0; // |P e_j|
};

/// |P e_j| = 1 means e_j is orthogonal to the null space; the tolerance
/// admits the near-members the experiments select.
OrthocomplementReport check_orthocomplement(const Mat& projection, Index j,
                                            double ortho_tol = 0.05);

struct InjectivityReport {
    bool injective = false;
    double sigma_min = 0.0; // smallest singular value of A restricted to J
};

/// sigma_min of the support columns of A against inj_tol * sigma_max(A);
/// with a valid certificate this decides uniqueness of the sparse solution.
InjectivityReport check_injective_on_support(const Mat& A,
                                             const std::vector<Index>& J,
                                             double inj_tol = 1e-8);

/// True iff every component of x is either below tau_supp in magnitude or
/// carries the sign of the true source there (zero where x* is zero).
bool check_sign_consistency(const Vec& x, const SourceConfig& source,
                            double tau_supp);

struct CertifyOptions {
    double angle_tol = 1e-8;
    double supp_tol = 1e-3;
    double ortho_tol = 0.05;
    double inj_tol = 1e-8;
};

/// The full battery for one configuration: C.1/C.2 with the induced dual
/// certificate, injectivity on the support, disjointness, and per-index
/// orthocomplement norms.
CertificateReport run_certificates(const Mat& A, const Mat& projection,
                                   const Vec& weights,
                                   const SourceConfig& source,
                                   CertifyOptions options = {});

} // namespace invsrc
