/**
 * @file tuner.hpp
 * @brief Exhaustive grid minimization of J - Jhat over the (beta1, beta2) triangle.
 */
#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <ostream>
#include <vector>

#include "essmc/convergence.hpp"
#include "essmc/core.hpp"

namespace essmc {

struct TuningEntry {
    double beta1 = 0.0;
    double beta2 = 0.0;
    double J = 0.0;
    double Jhat = 0.0;
    double objective = 0.0;
    bool sum_ok = false;     ///< beta1 + beta2 > 2 delta/U
    bool beta1_ok = false;   ///< 0 <= beta1 < 1
    bool beta2_ok = false;   ///< -1 < beta2 < beta1
    bool feasible = false;   ///< triangle, finite costs, Jhat < Jhat_max and J - Jhat < 0
};

struct ColumnOptimum {
    double beta1 = 0.0;
    double beta2 = 0.0;
    double objective = 0.0;
};

struct TuningResult {
    bool found = false;
    double beta1 = std::nan("");
    double beta2 = std::nan("");
    double objective = std::nan("");
    double J = std::nan("");
    double Jhat = std::nan("");
    double jhat_min = std::nan("");
    double jhat_max = std::nan("");
    std::size_t negative_cells = 0;
    std::vector<ColumnOptimum> columns;  ///< best beta2 for every beta1 with an admissible cell

    /// Column optimum at the grid column nearest to `beta1`.
    std::optional<ColumnOptimum> column(double beta1) const
    {
        std::optional<ColumnOptimum> best;
        double gap = std::numeric_limits<double>::infinity();
        for (const auto& c : columns) {
            if (std::fabs(c.beta1 - beta1) < gap) {
                gap = std::fabs(c.beta1 - beta1);
                best = c;
            }
        }
        return best;
    }
};

struct TuningGrid {
    double delta_ratio = 0.0;
    int resolution = 0;
    std::vector<TuningEntry> entries;
};

struct TuningOptions {
    int resolution = 200;
    std::optional<double> jhat_max;  ///< defaults to jhat_max_factor * min Jhat
    double jhat_max_factor = 10.0;
    WorstCaseModel model = WorstCaseModel::OuterEnvelope;
};

inline bool feasible_region(double delta_ratio, double beta1, double beta2)
{
    return strictly_greater(beta1 + beta2, 2.0 * delta_ratio) && at_least(beta1, 0.0) && beta1 < 1.0 &&
           beta2 > -1.0 && strictly_greater(beta1, beta2);
}

struct TuneOutput {
    TuningGrid grid;
    TuningResult result;
};

/// beta1 = i/n (i = 0..n-1), beta2 = -1 + 2j/n (j = 1..n-1); costs at U = 1, delta = delta_ratio.
inline TuneOutput tune(double delta_ratio, const TuningOptions& options = {})
{
    if (!(delta_ratio >= 0.0 && delta_ratio < 1.0)) throw ConfigError("delta_ratio must lie in [0, 1)");
    if (options.resolution < 50) throw ConfigError("grid resolution must be >= 50");
    const int n = options.resolution;
    const double U = 1.0;
    const double delta = delta_ratio;

    std::vector<CostValue> jhat(static_cast<std::size_t>(n));
    double jhat_min = std::numeric_limits<double>::infinity();
    for (int i = 0; i < n; ++i) {
        const double b1 = static_cast<double>(i) / n;
        jhat[static_cast<std::size_t>(i)] = cost_sosmc(U, delta, b1, options.model);
        if (jhat[static_cast<std::size_t>(i)].finite) jhat_min = std::fmin(jhat_min, jhat[static_cast<std::size_t>(i)].value);
    }
    double jhat_max = options.jhat_max.value_or(options.jhat_max_factor * jhat_min);
    if (!std::isfinite(jhat_min)) {
        jhat_max = std::nan("");
    } else if (!(jhat_max > jhat_min)) {
        throw ConfigError("jhat_max must exceed the minimum of Jhat (" + format_number(jhat_min) + ")");
    }

    TuneOutput out;
    out.grid.delta_ratio = delta_ratio;
    out.grid.resolution = n;
    out.grid.entries.reserve(static_cast<std::size_t>(n) * static_cast<std::size_t>(n - 1));
    auto& res = out.result;
    res.jhat_min = jhat_min;
    res.jhat_max = jhat_max;

    for (int i = 0; i < n; ++i) {
        const double b1 = static_cast<double>(i) / n;
        const CostValue& jh = jhat[static_cast<std::size_t>(i)];
        std::optional<ColumnOptimum> column;
        for (int j = 1; j < n; ++j) {
            TuningEntry e;
            e.beta1 = b1;
            e.beta2 = -1.0 + 2.0 * static_cast<double>(j) / n;
            e.sum_ok = strictly_greater(e.beta1 + e.beta2, 2.0 * delta_ratio);
            e.beta1_ok = at_least(e.beta1, 0.0) && e.beta1 < 1.0;
            e.beta2_ok = e.beta2 > -1.0 && strictly_greater(e.beta1, e.beta2);
            e.Jhat = jh.value;
            if (e.sum_ok && e.beta1_ok && e.beta2_ok) {
                const CostValue J = cost_es(U, delta, e.beta1, e.beta2, options.model);
                e.J = J.value;
                e.objective = J.value - jh.value;
                e.feasible = J.finite && jh.finite && jh.value < jhat_max && e.objective < 0.0;
            } else {
                e.J = std::numeric_limits<double>::infinity();
                e.objective = std::nan("");
            }
            if (e.feasible) {
                ++res.negative_cells;
                if (!column || e.objective < column->objective) column = ColumnOptimum{e.beta1, e.beta2, e.objective};
                if (!res.found || e.objective < res.objective) {
                    res.found = true;
                    res.beta1 = e.beta1;
                    res.beta2 = e.beta2;
                    res.objective = e.objective;
                    res.J = e.J;
                    res.Jhat = e.Jhat;
                }
            }
            out.grid.entries.push_back(e);
        }
        if (column) res.columns.push_back(*column);
    }
    return out;
}

inline void write_tuning_csv(std::ostream& os, const TuningGrid& grid)
{
    os << "beta1,beta2,J,Jhat,objective,feasible\n";
    for (const auto& e : grid.entries) {
        os << format_number(e.beta1) << ',' << format_number(e.beta2) << ',' << format_number(e.J) << ','
           << format_number(e.Jhat) << ',' << format_number(e.objective) << ',' << (e.feasible ? 1 : 0) << '\n';
    }
}

}  // namespace essmc
