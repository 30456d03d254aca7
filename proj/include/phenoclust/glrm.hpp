#pragma once

#include "phenoclust/dataset.hpp"

#include <json.hpp>

#include <cstdint>
#include <iosfwd>
#include <vector>

namespace phenoclust::glrm {

/// Quadratic loss for numeric columns, hinge loss for binary ones.
enum class LossKind { Quadratic, Hinge };

const char* to_string(LossKind kind) noexcept;

struct FitOptions {
    int max_iters = 500;
    double rel_tol = 1e-7;
    /// Multiplier on each block's curvature-based initial step.
    double step_init = 1.0;
    std::uint64_t seed = 0;
    /// Fixed per-column offsets added to XY: the column mean for quadratic
    /// columns and the best constant hinge prediction (+1 / -1) for binary ones.
    bool offsets = true;
    /// Independent seeded starts; the lowest final objective wins, ties to
    /// the earliest. Start 0 uses `seed` itself.
    int restarts = 1;
};

/// Rank-k factorization A ~ XY + offsets. Columns of X are kept inside the
/// ball of radius 1/sqrt(m).
struct GlrmModel {
    Matrix x; // m x k
    Matrix y; // k x n
    int rank = 0;
    double gamma = 0.0;
    std::vector<LossKind> loss_kinds;
    Vector offsets; // length n
    std::vector<double> objective_trace;
    int iterations = 0;
    bool converged = false;
};

/// Quadratic for numeric columns, hinge for binary; categorical is rejected.
std::vector<LossKind> loss_kinds_for(const Dataset& data);

/// Offsets `fit` would use for this data.
Vector default_offsets(const Dataset& data);

/// Loss terms without the L1 penalty. Binary cells enter the hinge as
/// 2a - 1 in {-1, +1}.
double data_fit(const GlrmModel& model, const Dataset& data);

/// data_fit + gamma * sum_ij |Y_ij|.
double objective(const GlrmModel& model, const Dataset& data);

struct Gradient {
    Matrix x;
    Matrix y;
};

/// Gradient of data_fit with respect to X and Y. Hinge terms sitting exactly
/// on the margin contribute zero.
Gradient data_fit_gradient(const GlrmModel& model, const Dataset& data);

/// Elementwise soft threshold sign(v) max(|v| - threshold, 0).
Vector prox_l1(const Vector& v, double threshold);

/// Alternating proximal minimization with backtracking, repeated from
/// `restarts` initializations. Deterministic given (data, options). Throws NumericalError("divergence") on a non-finite objective.
GlrmModel fit(const Dataset& data, int rank, double gamma, const FitOptions& options = {});

/// Columns j with max_i |Y_ij| > tol, ascending.
std::vector<std::size_t> selected_features(const GlrmModel& model, double tol = 1e-8);

/// Smallest gamma at which every column of Y is zero for the given X: the
/// largest entry of |d data_fit / dY| evaluated at Y = 0.
double zero_threshold(const GlrmModel& model, const Dataset& data);

nlohmann::json to_json(const GlrmModel& model);
GlrmModel model_from_json(const nlohmann::json& doc);

} // namespace phenoclust::glrm
