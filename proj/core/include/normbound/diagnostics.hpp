#ifndef NORMBOUND_DIAGNOSTICS_HPP
#define NORMBOUND_DIAGNOSTICS_HPP

#include "normbound/autodiff.hpp"
#include "normbound/loss.hpp"
#include "normbound/model.hpp"
#include "normbound/normpower.hpp"

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

namespace normbound {

// Dense symmetric matrix, row-major n x n.
struct SymmetricMatrix {
    std::size_t n = 0;
    std::vector<double> data;

    double& at(std::size_t i, std::size_t j) { return data[i * n + j]; }
    double at(std::size_t i, std::size_t j) const { return data[i * n + j]; }
};

// Gram matrix J^T J of the output-parameter Jacobian at input x (m_f x m_f).
SymmetricMatrix structural_matrix(const ParamModel& model, std::span<const double> theta,
                                  std::span<const double> x);
SymmetricMatrix gram_of(const Jacobian& j);

// Cyclic Jacobi rotations; eigenvalues sorted ascending. Converged when the
// off-diagonal Frobenius norm drops below tol (default 1e-10 * ||A||_F).
std::vector<double> sym_eigenvalues(const SymmetricMatrix& a, double tol = -1.0,
                                    int max_sweeps = 100);

struct GershgorinDisc {
    double center = 0;
    double radius = 0;
};

std::vector<GershgorinDisc> gershgorin_bounds(const SymmetricMatrix& a);

struct StructuralWeights {
    double alpha = 1.0; // weight of D
    double beta = 1.0;  // weight of U
    double gamma = 1.0; // weight of L
};

struct StructuralError {
    double u = 0; // -log lambda_min
    double l = 0; // -log lambda_max
    double d = 0; // u - l
    double s = 0; // alpha d + beta u + gamma l
    bool degenerate = false; // lambda_min fell below the floor
};

// Natural-log structural error of a spectrum with an eigenvalue floor.
StructuralError structural_error(std::span<const double> eigs,
                                 const StructuralWeights& weights, double floor);

struct BoundConstants {
    double c_upper = 0; // multiplies the upper (lambda_min) side
    double c_lower = 0; // multiplies the lower (lambda_max) side
    double r_conj = 2;  // conjugate order of the smooth part
};

// Constants of the gradient-based risk sandwich; basis sums are evaluated
// through the norm-power module.
BoundConstants bound_constants(const SmoothnessProfile& profile, std::size_t mf);

struct StructuralReport {
    std::vector<double> eigenvalues; // ascending
    double lambda_min = 0;
    double lambda_max = 0;
    StructuralError err;
    double loss = 0;
    double grad_theta_norm2 = 0;     // ||grad_theta ell||_2
    double local_grad_norm_r = 0;    // ||grad_theta ell||_2^r_conj
    double lower_bound = 0;
    double upper_bound = 0;          // +inf when degenerate
    bool degenerate = false;
};

struct DiagnosticsOptions {
    StructuralWeights weights{};
    double eig_floor_scale = 1e-12; // floor = scale * max(lambda_max, 1)
    double jacobi_tol_scale = 1e-10;
    int max_sweeps = 100;
};

// Per-sample bounds: lower = C_Phi ||g||^r / lambda_max^(r/2) - c_Phi and
// upper = C_phi ||g||^r / lambda_min^(r/2) + c_phi, with g = grad_theta ell
// computed by a single VJP (cotangent = grad_f ell).
StructuralReport sample_report(const ParamModel& model, std::span<const double> theta,
                               std::span<const double> x, std::span<const double> y,
                               const LossKind& kind, const SmoothnessProfile& profile,
                               const DiagnosticsOptions& opts = {});

struct DatasetSample {
    std::vector<double> x;
    std::vector<double> y;
};

struct DatasetStructural {
    double lambda_min = 0; // min over samples
    double lambda_max = 0; // max over samples
    StructuralError err;
};

struct DatasetBounds {
    double lower = 0;
    double upper = 0;         // +inf when degenerate
    double upper_floored = 0; // same bound with lambda_min raised to the floor
    double mean_loss = 0;
    double mean_local_grad_norm_r = 0; // E ||grad_theta ell||^r_conj
    DatasetStructural structural;
    bool degenerate = false;
};

DatasetStructural dataset_structural(const ParamModel& model, std::span<const double> theta,
                                     std::span<const DatasetSample> samples,
                                     const DiagnosticsOptions& opts = {});

DatasetBounds dataset_bounds(const ParamModel& model, std::span<const double> theta,
                             std::span<const DatasetSample> samples, const LossKind& kind,
                             const SmoothnessProfile& profile,
                             const DiagnosticsOptions& opts = {}, unsigned threads = 1);

// (1/n) sum_i ||grad_theta ell(f(x_i), y_i)||_2^r
double local_grad_norm(const ParamModel& model, std::span<const double> theta,
                       std::span<const DatasetSample> samples, const LossKind& kind,
                       double r);

// Output-space sandwich (Phi*(grad_f) - c_Phi, phi*(grad_f) + c_phi).
std::pair<double, double> output_space_bounds(const SmoothnessProfile& profile,
                                              std::span<const double> grad_f);

// Smallest softmax component over the samples' model outputs (data-dependent
// profiles are computed once per diagnostic batch from this).
BatchContext batch_context(const ParamModel& model, std::span<const double> theta,
                           std::span<const DatasetSample> samples, const LossKind& kind);

} // namespace normbound

#endif
