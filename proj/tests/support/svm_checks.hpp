#pragma once

#include <cmath>
#include <random>
#include <vector>

#include "spkemo/svm.hpp"

namespace testkit {

struct BinaryInstance {
    std::vector<spkemo::Embedding> x;
    std::vector<std::vector<double>> raw;
    std::vector<int> y;
    double C = 1.0;
    double gamma = 0.1;
};

// n in [4, 20], dim in [1, 8], both labels present.
inline BinaryInstance random_instance(std::mt19937_64& rng) {
    std::uniform_int_distribution<int> n_dist(4, 20), d_dist(1, 8), coin(0, 1);
    std::normal_distribution<double> g(0.0, 1.0);
    const double cs[] = {0.5, 1.0, 10.0, 100.0, 1000.0};
    const double gs[] = {0.1, 0.5, 1.0};
    BinaryInstance inst;
    int n = n_dist(rng), d = d_dist(rng);
    inst.C = cs[std::uniform_int_distribution<int>(0, 4)(rng)];
    inst.gamma = gs[std::uniform_int_distribution<int>(0, 2)(rng)];
    for (int i = 0; i < n; ++i) {
        int label = (i == 0) ? 1 : (i == 1) ? -1 : (coin(rng) ? 1 : -1);
        std::vector<double> v(d);
        for (auto& c : v) c = g(rng) + 0.7 * label;
        inst.raw.push_back(v);
        inst.x.emplace_back(v);
        inst.y.push_back(label);
    }
    return inst;
}

struct KktAudit {
    std::size_t violations = 0;
    double worst = 0.0;
};

// alpha = 0  => y f >= 1 - tol;  0 < alpha < C => |y f - 1| <= tol;  alpha = C => y f <= 1 + tol
inline KktAudit kkt_audit(const BinaryInstance& inst, const spkemo::SmoSolution& sol, double tol) {
    const std::size_t n = inst.x.size();
    KktAudit audit;
    for (std::size_t i = 0; i < n; ++i) {
        double f = sol.bias;
        for (std::size_t j = 0; j < n; ++j)
            f += sol.alpha[j] * inst.y[j] * spkemo::rbf_kernel(inst.x[j].view(), inst.x[i].view(), inst.gamma);
        double m = inst.y[i] * f;
        double a = sol.alpha[i], excess = 0.0;
        if (a <= 0.0) excess = (1.0 - tol) - m;
        else if (a >= inst.C) excess = m - (1.0 + tol);
        else excess = std::abs(m - 1.0) - tol;
        if (excess > 0.0) {
            ++audit.violations;
            audit.worst = std::max(audit.worst, excess);
        }
    }
    return audit;
}

}  // namespace testkit
