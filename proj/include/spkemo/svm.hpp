#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <future>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "spkemo/embedding.hpp"
#include "spkemo/error.hpp"

namespace spkemo {

struct TrainParams {
    double C = 1000.0;
    double gamma = 0.1;
    double kkt_tol = 1e-3;
    /// 0 selects max(10000, ceil(10 n^2 / 100)).
    std::size_t max_iter = 0;

    void validate() const {
        if (!(C > 0.0)) throw Error(ErrorCode::InvalidArgument, "C must be positive");
        if (!(gamma > 0.0)) throw Error(ErrorCode::InvalidArgument, "gamma must be positive");
        if (!(kkt_tol > 0.0)) throw Error(ErrorCode::InvalidArgument, "kkt_tol must be positive");
    }

    std::size_t iteration_cap(std::size_t n) const {
        if (max_iter > 0) return max_iter;
        std::size_t scaled = (10 * n * n + 99) / 100;
        return std::max<std::size_t>(10000, scaled);
    }
};

inline double rbf_kernel(std::span<const double> x, std::span<const double> y, double gamma) {
    return std::exp(-gamma * squared_distance(x, y));
}

/// Binary rbf SVM: f(x) = sum_j coef_j K(sv_j, x) + bias, with coef_j = alpha_j y_j.
struct BinarySvmModel {
    std::vector<Embedding> support_vectors;
    std::vector<double> dual_coefs;
    double bias = 0.0;
    double gamma = 0.1;

    std::size_t dim() const { return support_vectors.empty() ? 0 : support_vectors.front().dim(); }

    bool operator==(const BinarySvmModel&) const = default;
};

inline double decision_function(const BinarySvmModel& model, std::span<const double> x) {
    double f = model.bias;
    for (std::size_t j = 0; j < model.support_vectors.size(); ++j)
        f += model.dual_coefs[j] * rbf_kernel(model.support_vectors[j].view(), x, model.gamma);
    return f;
}

/// Full SMO output, including the zero multipliers a model discards.
struct SmoSolution {
    std::vector<double> alpha;
    double bias = 0.0;
    double dual_objective = 0.0;
    double violation_gap = 0.0;  // m(alpha) - M(alpha) at exit
    std::size_t iterations = 0;
    bool converged = false;
};

namespace detail {

// Kernel rows: a dense n x n table for n <= 4096, otherwise rows are
// recomputed on demand into a scratch buffer.
class KernelRows {
public:
    static constexpr std::size_t kDenseLimit = 4096;

    KernelRows(std::span<const Embedding> x, double gamma) : x_(x), gamma_(gamma), n_(x.size()) {
        if (n_ <= kDenseLimit) {
            dense_.resize(n_ * n_);
            for (std::size_t i = 0; i < n_; ++i) {
                dense_[i * n_ + i] = 1.0;
                for (std::size_t j = i + 1; j < n_; ++j) {
                    double k = rbf_kernel(x_[i].view(), x_[j].view(), gamma_);
                    dense_[i * n_ + j] = k;
                    dense_[j * n_ + i] = k;
                }
            }
        } else {
            scratch_[0].resize(n_);
            scratch_[1].resize(n_);
        }
    }

    // slot selects one of two scratch buffers so two rows can be live at once.
    std::span<const double> row(std::size_t i, int slot) {
        if (!dense_.empty()) return {dense_.data() + i * n_, n_};
        auto& buf = scratch_[slot];
        for (std::size_t t = 0; t < n_; ++t) buf[t] = rbf_kernel(x_[i].view(), x_[t].view(), gamma_);
        return buf;
    }

private:
    std::span<const Embedding> x_;
    double gamma_;
    std::size_t n_;
    std::vector<double> dense_;
    std::vector<double> scratch_[2];
};

inline void validate_binary_input(std::span<const Embedding> x, std::span<const int> y) {
    if (x.size() != y.size())
        throw Error(ErrorCode::LengthMismatch, std::to_string(x.size()) + " samples vs " +
                                                   std::to_string(y.size()) + " labels");
    if (x.size() < 2) throw Error(ErrorCode::SingleClassInput, "need at least two samples");
    const std::size_t d = x.front().dim();
    if (d == 0) throw Error(ErrorCode::DimMismatch, "zero-dimensional samples");
    bool pos = false, neg = false;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (x[i].dim() != d) throw Error(ErrorCode::DimMismatch, "sample " + std::to_string(i) + " has wrong dim");
        if (y[i] == 1) pos = true;
        else if (y[i] == -1) neg = true;
        else throw Error(ErrorCode::InvalidArgument, "binary labels must be +1 or -1");
    }
    if (!pos || !neg) throw Error(ErrorCode::SingleClassInput, "both +1 and -1 labels are required");
    bool all_same = true;
    for (std::size_t i = 1; i < x.size() && all_same; ++i) all_same = x[i] == x[0];
    if (all_same) throw Error(ErrorCode::DegenerateInput, "all training points are identical");
}

}  // namespace detail

/// Dual SMO with maximal-violating-pair / second-order working-set selection.
/// Stops once m(alpha) - M(alpha) < kkt_tol, which bounds every KKT residual of
/// y_i f(x_i) by kkt_tol, or when the iteration cap is hit.
inline SmoSolution solve_smo(std::span<const Embedding> x, std::span<const int> y, const TrainParams& params) {
    params.validate();
    detail::validate_binary_input(x, y);

    constexpr double kTau = 1e-12;
    const std::size_t n = x.size();
    const double C = params.C;
    detail::KernelRows kernel(x, params.gamma);

    SmoSolution sol;
    sol.alpha.assign(n, 0.0);
    std::vector<double> grad(n, -1.0);  // G = Q alpha - 1
    auto& alpha = sol.alpha;

    auto in_up = [&](std::size_t t) { return (y[t] == 1 && alpha[t] < C) || (y[t] == -1 && alpha[t] > 0.0); };
    auto in_low = [&](std::size_t t) { return (y[t] == 1 && alpha[t] > 0.0) || (y[t] == -1 && alpha[t] < C); };

    const std::size_t cap = params.iteration_cap(n);
    while (true) {
        double g_max = -std::numeric_limits<double>::infinity();
        std::size_t i = n;
        for (std::size_t t = 0; t < n; ++t) {
            if (in_up(t) && -y[t] * grad[t] > g_max) {
                g_max = -y[t] * grad[t];
                i = t;
            }
        }
        double g_min = std::numeric_limits<double>::infinity();
        for (std::size_t t = 0; t < n; ++t)
            if (in_low(t)) g_min = std::min(g_min, -y[t] * grad[t]);
        sol.violation_gap = g_max - g_min;
        if (i == n || sol.violation_gap < params.kkt_tol) {
            sol.converged = true;
            break;
        }
        if (sol.iterations >= cap) break;

        auto k_i = kernel.row(i, 0);
        std::size_t j = n;
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t t = 0; t < n; ++t) {
            if (!in_low(t)) continue;
            double b = g_max + y[t] * grad[t];
            if (b <= 0.0) continue;
            double a = 2.0 - 2.0 * k_i[t];  // K_ii + K_tt - 2 K_it with unit diagonal
            if (a <= 0.0) a = kTau;
            double obj = -(b * b) / a;
            if (obj < best) {
                best = obj;
                j = t;
            }
        }
        if (j == n) {
            sol.converged = true;
            break;
        }
        auto k_j = kernel.row(j, 1);

        const double old_i = alpha[i], old_j = alpha[j];
        const double q_ij = y[i] * y[j] * k_i[j];
        if (y[i] != y[j]) {
            double quad = 2.0 + 2.0 * q_ij;
            if (quad <= 0.0) quad = kTau;
            double delta = (-grad[i] - grad[j]) / quad;
            double diff = alpha[i] - alpha[j];
            alpha[i] += delta;
            alpha[j] += delta;
            if (diff > 0.0) {
                if (alpha[j] < 0.0) { alpha[j] = 0.0; alpha[i] = diff; }
            } else {
                if (alpha[i] < 0.0) { alpha[i] = 0.0; alpha[j] = -diff; }
            }
            if (diff > 0.0) {
                if (alpha[i] > C) { alpha[i] = C; alpha[j] = C - diff; }
            } else {
                if (alpha[j] > C) { alpha[j] = C; alpha[i] = C + diff; }
            }
        } else {
            double quad = 2.0 - 2.0 * q_ij;
            if (quad <= 0.0) quad = kTau;
            double delta = (grad[i] - grad[j]) / quad;
            double sum = alpha[i] + alpha[j];
            alpha[i] -= delta;
            alpha[j] += delta;
            if (sum > C) {
                if (alpha[i] > C) { alpha[i] = C; alpha[j] = sum - C; }
            } else {
                if (alpha[j] < 0.0) { alpha[j] = 0.0; alpha[i] = sum; }
            }
            if (sum > C) {
                if (alpha[j] > C) { alpha[j] = C; alpha[i] = sum - C; }
            } else {
                if (alpha[i] < 0.0) { alpha[i] = 0.0; alpha[j] = sum; }
            }
        }

        const double d_i = alpha[i] - old_i, d_j = alpha[j] - old_j;
        for (std::size_t t = 0; t < n; ++t)
            grad[t] += y[t] * (y[i] * k_i[t] * d_i + y[j] * k_j[t] * d_j);
        ++sol.iterations;
    }

    // Bias: mean over free multipliers, else the midpoint of the feasible interval.
    double ub = std::numeric_limits<double>::infinity(), lb = -std::numeric_limits<double>::infinity();
    double free_sum = 0.0;
    std::size_t n_free = 0;
    for (std::size_t t = 0; t < n; ++t) {
        double yg = y[t] * grad[t];
        bool at_upper = alpha[t] >= C, at_lower = alpha[t] <= 0.0;
        if (at_upper) {
            if (y[t] == -1) ub = std::min(ub, yg);
            else lb = std::max(lb, yg);
        } else if (at_lower) {
            if (y[t] == 1) ub = std::min(ub, yg);
            else lb = std::max(lb, yg);
        } else {
            ++n_free;
            free_sum += yg;
        }
    }
    double rho = n_free > 0 ? free_sum / static_cast<double>(n_free) : (ub + lb) / 2.0;
    sol.bias = -rho;

    double obj = 0.0;
    for (std::size_t t = 0; t < n; ++t) obj += alpha[t] * (1.0 - grad[t]);
    sol.dual_objective = obj / 2.0;
    return sol;
}

/// Keeps only samples with nonzero multipliers.
inline BinarySvmModel model_from_solution(std::span<const Embedding> x, std::span<const int> y,
                                          const SmoSolution& sol, double gamma) {
    BinarySvmModel model;
    model.gamma = gamma;
    model.bias = sol.bias;
    for (std::size_t t = 0; t < x.size(); ++t) {
        if (sol.alpha[t] > 0.0) {
            model.support_vectors.push_back(x[t]);
            model.dual_coefs.push_back(sol.alpha[t] * y[t]);
        }
    }
    return model;
}

inline BinarySvmModel train_binary_smo(std::span<const Embedding> x, std::span<const int> y,
                                       const TrainParams& params) {
    auto sol = solve_smo(x, y, params);
    return model_from_solution(x, y, sol, params.gamma);
}

/// One binary model per unordered class pair; the pair's first class is +1.
struct PairwiseModel {
    std::size_t first = 0;   // index into MulticlassSvmModel::classes
    std::size_t second = 0;
    BinarySvmModel model;

    bool operator==(const PairwiseModel&) const = default;
};

struct MulticlassSvmModel {
    std::vector<int> classes;  // ascending
    std::vector<PairwiseModel> pairwise_models;

    std::size_t dim() const { return pairwise_models.empty() ? 0 : pairwise_models.front().model.dim(); }

    bool operator==(const MulticlassSvmModel&) const = default;
};

inline MulticlassSvmModel train_multiclass(std::span<const Embedding> x, std::span<const int> labels,
                                           const TrainParams& params) {
    params.validate();
    if (x.size() != labels.size())
        throw Error(ErrorCode::LengthMismatch, std::to_string(x.size()) + " samples vs " +
                                                   std::to_string(labels.size()) + " labels");
    MulticlassSvmModel model;
    model.classes.assign(labels.begin(), labels.end());
    std::sort(model.classes.begin(), model.classes.end());
    model.classes.erase(std::unique(model.classes.begin(), model.classes.end()), model.classes.end());
    if (model.classes.size() < 2)
        throw Error(ErrorCode::SingleClassInput, "multiclass training needs at least two classes");

    const std::size_t k = model.classes.size();
    std::vector<std::future<PairwiseModel>> jobs;
    for (std::size_t a = 0; a < k; ++a) {
        for (std::size_t b = a + 1; b < k; ++b) {
            jobs.push_back(std::async(std::launch::async, [&, a, b] {
                std::vector<Embedding> px;
                std::vector<int> py;
                for (std::size_t t = 0; t < x.size(); ++t) {
                    if (labels[t] == model.classes[a]) { px.push_back(x[t]); py.push_back(1); }
                    else if (labels[t] == model.classes[b]) { px.push_back(x[t]); py.push_back(-1); }
                }
                try {
                    return PairwiseModel{a, b, train_binary_smo(px, py, params)};
                } catch (const Error& e) {
                    throw Error(e.code(), "class pair (" + std::to_string(model.classes[a]) + ", " +
                                              std::to_string(model.classes[b]) + "): " + e.what());
                }
            }));
        }
    }
    for (auto& job : jobs) model.pairwise_models.push_back(job.get());
    return model;
}

inline std::vector<double> pairwise_decisions(const MulticlassSvmModel& model, std::span<const double> x) {
    std::vector<double> out;
    out.reserve(model.pairwise_models.size());
    for (const auto& p : model.pairwise_models) out.push_back(decision_function(p.model, x));
    return out;
}

/// Majority vote over pairwise decisions (> 0 votes for the pair's first class).
/// Ties: larger sum of |clamp(d, -1, 1)| over the pairs each tied class won,
/// then lower class index. Returns an index into `classes`.
inline std::size_t vote(std::size_t n_classes, std::span<const PairwiseModel> pairs,
                        std::span<const double> decisions) {
    std::vector<int> votes(n_classes, 0);
    std::vector<double> confidence(n_classes, 0.0);
    for (std::size_t p = 0; p < pairs.size(); ++p) {
        std::size_t winner = decisions[p] > 0.0 ? pairs[p].first : pairs[p].second;
        ++votes[winner];
        confidence[winner] += std::abs(std::clamp(decisions[p], -1.0, 1.0));
    }
    const int top = *std::max_element(votes.begin(), votes.end());
    std::size_t best = n_classes;
    for (std::size_t c = 0; c < n_classes; ++c) {
        if (votes[c] != top) continue;
        if (best == n_classes || confidence[c] > confidence[best]) best = c;
    }
    return best;
}

inline int predict_multiclass(const MulticlassSvmModel& model, std::span<const double> x) {
    auto d = pairwise_decisions(model, x);
    return model.classes[vote(model.classes.size(), model.pairwise_models, d)];
}

}  // namespace spkemo
