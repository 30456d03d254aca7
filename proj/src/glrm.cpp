#include "phenoclust/glrm.hpp"

#include "phenoclust/error.hpp"
#include "phenoclust/random.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace phenoclust::glrm {
namespace {

constexpr int kMaxHalvings = 60;
constexpr int kInnerSteps = 8;
constexpr double kTiny = 1e-300;

/// Loss-ready view of a finalized dataset.
struct Problem {
    Matrix target; // numeric values as-is; binary recoded to -1/+1
    Vector weight; // 1/sigma^2 for quadratic columns, 1 for hinge
    std::vector<LossKind> kinds;

    Eigen::Index rows() const { return target.rows(); }
    Eigen::Index cols() const { return target.cols(); }
};

Problem make_problem(const Dataset& data) {
    if (data.missing.any()) throw DataError("ingestion", "GLRM requires complete data");
    Problem p;
    p.kinds = loss_kinds_for(data);
    p.target = data.values;
    p.weight.resize(static_cast<Eigen::Index>(data.cols()));
    for (std::size_t j = 0; j < data.cols(); ++j) {
        const auto jj = static_cast<Eigen::Index>(j);
        if (p.kinds[j] == LossKind::Hinge) {
            p.target.col(jj) = (2.0 * data.values.col(jj).array() - 1.0).matrix();
            p.weight(jj) = 1.0;
        } else {
            const double var = data.columns[j].variance;
            p.weight(jj) = var > 0.0 ? 1.0 / var : 1.0;
        }
    }
    return p;
}

void check_shapes(const GlrmModel& model, const Problem& p) {
    if (model.x.rows() != p.rows() || model.y.cols() != p.cols() || model.x.cols() != model.y.rows() ||
        model.offsets.size() != p.cols() || model.loss_kinds.size() != static_cast<std::size_t>(p.cols())) {
        throw DataError("shape", "model factors do not match the data dimensions");
    }
    for (std::size_t j = 0; j < p.kinds.size(); ++j) {
        if (model.loss_kinds[j] != p.kinds[j]) throw DataError("shape", "model loss kinds do not match the data");
    }
}

inline double cell_loss(LossKind kind, double z, double a, double w) {
    if (kind == LossKind::Quadratic) {
        const double r = z - a;
        return w * r * r;
    }
    return std::max(0.0, 1.0 - a * z);
}

inline double cell_derivative(LossKind kind, double z, double a, double w) {
    if (kind == LossKind::Quadratic) return 2.0 * w * (z - a);
    return 1.0 - a * z > 0.0 ? -a : 0.0;
}

/// Data-fit of column j for coefficient vector y (length k).
double column_fit(const Problem& p, const Matrix& x, const Vector& y, double offset, Eigen::Index j) {
    const Vector z = x * y;
    const auto kind = p.kinds[static_cast<std::size_t>(j)];
    const double w = p.weight(j);
    double sum = 0.0;
    for (Eigen::Index i = 0; i < z.size(); ++i) sum += cell_loss(kind, z(i) + offset, p.target(i, j), w);
    return sum;
}

/// Per-column data-fit values.
Vector column_fits(const Problem& p, const Matrix& x, const Matrix& y, const Vector& offsets) {
    Vector fits(p.cols());
    for (Eigen::Index j = 0; j < p.cols(); ++j) fits(j) = column_fit(p, x, y.col(j), offsets(j), j);
    return fits;
}

/// Sum of per-column (fit + gamma * |y_j|_1), always accumulated in column
/// order so block-wise acceptance tests imply a nonincreasing total.
double total(const Vector& fits, const Matrix& y, double gamma) {
    double sum = 0.0;
    for (Eigen::Index j = 0; j < fits.size(); ++j) sum += fits(j) + gamma * y.col(j).lpNorm<1>();
    return sum;
}

double fit_sum(const Vector& fits) {
    double sum = 0.0;
    for (Eigen::Index j = 0; j < fits.size(); ++j) sum += fits(j);
    return sum;
}

Vector column_derivative(const Problem& p, const Matrix& x, const Vector& y, double offset, Eigen::Index j) {
    Vector z = x * y;
    const auto kind = p.kinds[static_cast<std::size_t>(j)];
    for (Eigen::Index i = 0; i < z.size(); ++i) z(i) = cell_derivative(kind, z(i) + offset, p.target(i, j), p.weight(j));
    return z;
}

Matrix derivative_matrix(const Problem& p, const Matrix& x, const Matrix& y, const Vector& offsets) {
    Matrix z = x * y;
    for (Eigen::Index j = 0; j < p.cols(); ++j) {
        const auto kind = p.kinds[static_cast<std::size_t>(j)];
        for (Eigen::Index i = 0; i < p.rows(); ++i) {
            z(i, j) = cell_derivative(kind, z(i, j) + offsets(j), p.target(i, j), p.weight(j));
        }
    }
    return z;
}

void project_columns(Matrix& x) {
    const double radius = 1.0 / std::sqrt(static_cast<double>(x.rows()));
    for (Eigen::Index l = 0; l < x.cols(); ++l) {
        const double norm = x.col(l).norm();
        if (norm > radius) x.col(l) *= radius / norm;
    }
}

} // namespace

const char* to_string(LossKind kind) noexcept {
    return kind == LossKind::Quadratic ? "quadratic" : "hinge";
}

std::vector<LossKind> loss_kinds_for(const Dataset& data) {
    std::vector<LossKind> kinds;
    kinds.reserve(data.cols());
    for (const auto& c : data.columns) {
        if (c.kind == ColumnKind::Categorical) {
            throw DataError("type", "column '" + c.name + "' must be dummy coded before fitting");
        }
        kinds.push_back(c.kind == ColumnKind::Numeric ? LossKind::Quadratic : LossKind::Hinge);
    }
    return kinds;
}

Vector default_offsets(const Dataset& data) {
    Vector offsets(static_cast<Eigen::Index>(data.cols()));
    for (std::size_t j = 0; j < data.cols(); ++j) {
        const auto jj = static_cast<Eigen::Index>(j);
        if (data.columns[j].kind == ColumnKind::Binary) {
            const double ones = data.values.col(jj).sum();
            const double zeros = static_cast<double>(data.rows()) - ones;
            offsets(jj) = ones > zeros ? 1.0 : (ones < zeros ? -1.0 : 0.0);
        } else {
            offsets(jj) = data.values.col(jj).mean();
        }
    }
    return offsets;
}

double data_fit(const GlrmModel& model, const Dataset& data) {
    const Problem p = make_problem(data);
    check_shapes(model, p);
    return fit_sum(column_fits(p, model.x, model.y, model.offsets));
}

double objective(const GlrmModel& model, const Dataset& data) {
    const Problem p = make_problem(data);
    check_shapes(model, p);
    return total(column_fits(p, model.x, model.y, model.offsets), model.y, model.gamma);
}

Gradient data_fit_gradient(const GlrmModel& model, const Dataset& data) {
    const Problem p = make_problem(data);
    check_shapes(model, p);
    const Matrix g = derivative_matrix(p, model.x, model.y, model.offsets);
    return {g * model.y.transpose(), model.x.transpose() * g};
}

Vector prox_l1(const Vector& v, double threshold) {
    Vector out(v.size());
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        const double mag = std::abs(v(i)) - threshold;
        out(i) = mag > 0.0 ? std::copysign(mag, v(i)) : 0.0;
    }
    return out;
}

namespace {

GlrmModel fit_once(const Problem& p, const Vector& offsets, int rank, double gamma, const FitOptions& options,
                   std::uint64_t seed) {
    const Eigen::Index m = p.rows();
    const Eigen::Index n = p.cols();
    const Eigen::Index k = rank;

    GlrmModel model;
    model.rank = rank;
    model.gamma = gamma;
    model.loss_kinds = p.kinds;
    model.offsets = offsets;

    const double scale = 1.0 / std::sqrt(static_cast<double>(k));
    model.x.resize(m, k);
    model.y.resize(k, n);
    for (Eigen::Index i = 0; i < m; ++i) {
        for (Eigen::Index l = 0; l < k; ++l) {
            model.x(i, l) = scale * rng::gaussian(seed, 0, static_cast<std::uint64_t>(i), static_cast<std::uint64_t>(l));
        }
    }
    for (Eigen::Index l = 0; l < k; ++l) {
        for (Eigen::Index j = 0; j < n; ++j) {
            model.y(l, j) = scale * rng::gaussian(seed, 1, static_cast<std::uint64_t>(l), static_cast<std::uint64_t>(j));
        }
    }
    project_columns(model.x);

    Matrix& x = model.x;
    Matrix& y = model.y;
    Vector fits = column_fits(p, x, y, model.offsets);
    double current = total(fits, y, gamma);
    if (!std::isfinite(current)) throw NumericalError("divergence", "non-finite objective at initialization");
    model.objective_trace.push_back(current);

    // Per-block step sizes, seeded from curvature bounds and adapted by
    // doubling after success and halving during backtracking.
    double step_x = -1.0;
    Vector step_y = Vector::Constant(n, -1.0);

    for (int iter = 1; iter <= options.max_iters; ++iter) {
        // X-step: projected gradient on the data-fit term.
        {
            if (step_x <= 0.0) {
                double curvature = 0.0;
                for (Eigen::Index j = 0; j < n; ++j) curvature += p.weight(j) * y.col(j).squaredNorm();
                step_x = options.step_init / std::max(2.0 * curvature, kTiny);
            }
            for (int inner = 0; inner < kInnerSteps; ++inner) {
                const Matrix grad = derivative_matrix(p, x, y, model.offsets) * y.transpose();
                const double before = fit_sum(fits);
                double t = step_x;
                bool moved = false;
                for (int h = 0; h < kMaxHalvings; ++h, t *= 0.5) {
                    Matrix candidate = x - t * grad;
                    project_columns(candidate);
                    Vector candidate_fits = column_fits(p, candidate, y, model.offsets);
                    if (fit_sum(candidate_fits) <= before) {
                        x = std::move(candidate);
                        fits = std::move(candidate_fits);
                        step_x = 2.0 * t;
                        moved = true;
                        break;
                    }
                }
                if (!moved) break;
            }
        }

        // Y-step: columns are separable given X; proximal step per column.
        {
            const double x_norm2 = x.squaredNorm();
            for (Eigen::Index j = 0; j < n; ++j) {
                if (step_y(j) <= 0.0) step_y(j) = options.step_init / std::max(2.0 * p.weight(j) * x_norm2, kTiny);
                for (int inner = 0; inner < kInnerSteps; ++inner) {
                    const Vector yj = y.col(j);
                    const Vector grad = x.transpose() * column_derivative(p, x, yj, model.offsets(j), j);
                    const double before = fits(j) + gamma * yj.lpNorm<1>();
                    double t = step_y(j);
                    bool moved = false;
                    for (int h = 0; h < kMaxHalvings; ++h, t *= 0.5) {
                        const Vector candidate = prox_l1(yj - t * grad, gamma * t);
                        const double cfit = column_fit(p, x, candidate, model.offsets(j), j);
                        if (cfit + gamma * candidate.lpNorm<1>() <= before) {
                            y.col(j) = candidate;
                            fits(j) = cfit;
                            step_y(j) = 2.0 * t;
                            moved = true;
                            break;
                        }
                    }
                    if (!moved) break;
                }
            }
        }

        const double next = total(fits, y, gamma);
        if (!std::isfinite(next)) {
            throw NumericalError("divergence", "non-finite objective at iteration " + std::to_string(iter));
        }
        model.objective_trace.push_back(next);
        model.iterations = iter;
        const double change = (current - next) / std::max(std::abs(current), kTiny);
        current = next;
        if (change < options.rel_tol) {
            model.converged = true;
            break;
        }
    }
    return model;
}

} // namespace

GlrmModel fit(const Dataset& data, int rank, double gamma, const FitOptions& options) {
    if (rank < 1) throw ConfigError("parameter", "rank must be at least 1");
    if (static_cast<std::size_t>(rank) >= data.cols()) {
        throw ConfigError("parameter", "rank must be smaller than the number of columns");
    }
    if (!(gamma >= 0.0) || !std::isfinite(gamma)) throw ConfigError("parameter", "gamma must be finite and >= 0");
    if (options.max_iters < 1 || !(options.rel_tol > 0.0) || !(options.step_init > 0.0) || options.restarts < 1) {
        throw ConfigError("parameter", "invalid fit options");
    }
    if (data.rows() < 2) throw DataError("insufficient-data", "at least two rows are required");

    const Problem p = make_problem(data);
    const Vector offsets = options.offsets ? default_offsets(data) : Vector::Zero(p.cols());
    GlrmModel best;
    double best_objective = std::numeric_limits<double>::infinity();
    for (int r = 0; r < options.restarts; ++r) {
        const std::uint64_t seed = r == 0 ? options.seed : rng::hash(options.seed, 0x7265ULL, static_cast<std::uint64_t>(r));
        GlrmModel candidate = fit_once(p, offsets, rank, gamma, options, seed);
        if (candidate.objective_trace.back() < best_objective) {
            best_objective = candidate.objective_trace.back();
            best = std::move(candidate);
        }
    }
    return best;
}

std::vector<std::size_t> selected_features(const GlrmModel& model, double tol) {
    std::vector<std::size_t> out;
    for (Eigen::Index j = 0; j < model.y.cols(); ++j) {
        if (model.y.col(j).cwiseAbs().maxCoeff() > tol) out.push_back(static_cast<std::size_t>(j));
    }
    return out;
}

double zero_threshold(const GlrmModel& model, const Dataset& data) {
    const Problem p = make_problem(data);
    check_shapes(model, p);
    const Matrix zero = Matrix::Zero(model.y.rows(), model.y.cols());
    const Matrix g = derivative_matrix(p, model.x, zero, model.offsets);
    return (model.x.transpose() * g).cwiseAbs().maxCoeff();
}

nlohmann::json to_json(const GlrmModel& model) {
    auto matrix_json = [](const Matrix& mat) {
        nlohmann::json rows = nlohmann::json::array();
        for (Eigen::Index i = 0; i < mat.rows(); ++i) {
            nlohmann::json row = nlohmann::json::array();
            for (Eigen::Index j = 0; j < mat.cols(); ++j) row.push_back(mat(i, j));
            rows.push_back(std::move(row));
        }
        return rows;
    };
    nlohmann::json doc;
    doc["rank"] = model.rank;
    doc["gamma"] = model.gamma;
    doc["loss_kinds"] = nlohmann::json::array();
    for (auto kind : model.loss_kinds) doc["loss_kinds"].push_back(to_string(kind));
    doc["offsets"] = std::vector<double>(model.offsets.data(), model.offsets.data() + model.offsets.size());
    doc["x"] = matrix_json(model.x);
    doc["y"] = matrix_json(model.y);
    doc["objective_trace"] = model.objective_trace;
    doc["iterations"] = model.iterations;
    doc["converged"] = model.converged;
    return doc;
}

GlrmModel model_from_json(const nlohmann::json& doc) {
    auto matrix_from = [](const nlohmann::json& rows, Eigen::Index expected_cols) {
        const auto r = static_cast<Eigen::Index>(rows.size());
        Matrix mat(r, expected_cols);
        for (Eigen::Index i = 0; i < r; ++i) {
            const auto& row = rows.at(static_cast<std::size_t>(i));
            if (static_cast<Eigen::Index>(row.size()) != expected_cols) throw DataError("shape", "ragged matrix in model");
            for (Eigen::Index j = 0; j < expected_cols; ++j) mat(i, j) = row.at(static_cast<std::size_t>(j)).get<double>();
        }
        return mat;
    };
    try {
        GlrmModel model;
        model.rank = doc.at("rank").get<int>();
        model.gamma = doc.at("gamma").get<double>();
        for (const auto& kind : doc.at("loss_kinds")) {
            const auto text = kind.get<std::string>();
            if (text == "quadratic") model.loss_kinds.push_back(LossKind::Quadratic);
            else if (text == "hinge") model.loss_kinds.push_back(LossKind::Hinge);
            else throw DataError("ingestion", "unknown loss kind '" + text + "'");
        }
        const auto offsets = doc.at("offsets").get<std::vector<double>>();
        model.offsets = Eigen::Map<const Vector>(offsets.data(), static_cast<Eigen::Index>(offsets.size()));
        model.x = matrix_from(doc.at("x"), model.rank);
        model.y = matrix_from(doc.at("y"), static_cast<Eigen::Index>(model.loss_kinds.size()));
        model.objective_trace = doc.at("objective_trace").get<std::vector<double>>();
        model.iterations = doc.value("iterations", 0);
        model.converged = doc.value("converged", false);
        if (model.y.rows() != model.rank) throw DataError("shape", "Y row count does not match rank");
        return model;
    } catch (const nlohmann::json::exception& e) {
        throw DataError("ingestion", std::string("malformed model document: ") + e.what());
    }
}

} // namespace phenoclust::glrm
