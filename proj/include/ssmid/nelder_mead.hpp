#pragma once

#include <climits>
#include <functional>
#include <string>
#include <vector>

#include "ssmid/types.hpp"

namespace ssmid {

/// Objective convention throughout: values are MAXIMIZED. Internally the
/// simplex logic minimizes the negation, matching the usual presentation.
using ObjectiveFn = std::function<double(const Vec&)>;

struct NmCoefficients {
    double reflection = 1.0;  // alpha > 0
    double expansion = 2.0;   // gamma > 1
    double contraction = 0.5; // rho in (0, 1)
    double shrink = 0.5;      // sigma in (0, 1)
    double no_improve_tol = 1e-9;

    void validate() const {
        if (!(reflection > 0.0)) throw ConfigError("nelder-mead: reflection must be > 0");
        if (!(expansion > 1.0)) throw ConfigError("nelder-mead: expansion must be > 1");
        if (!(contraction > 0.0 && contraction < 1.0))
            throw ConfigError("nelder-mead: contraction must be in (0, 1)");
        if (!(shrink > 0.0 && shrink < 1.0))
            throw ConfigError("nelder-mead: shrink must be in (0, 1)");
    }
};

struct Vertex {
    Vec x;
    double value; // objective value (maximizing convention)
};

struct Simplex {
    std::vector<Vertex> vertices; // dim + 1 entries
    NmCoefficients coeff;

    Eigen::Index dim() const {
        return vertices.empty() ? 0 : vertices.front().x.size();
    }
    void validate() const {
        coeff.validate();
        if (vertices.empty() ||
            static_cast<Eigen::Index>(vertices.size()) != dim() + 1)
            throw ConfigError("simplex: need exactly dim+1 vertices");
    }
};

Simplex make_simplex(std::vector<Vertex> vertices, NmCoefficients coeff = {});

/// Axis-aligned initial simplex around x0 with the given step, evaluated
/// through `f`. Steps flip direction where x0 + step would leave the box.
Simplex make_simplex_around(const Vec& x0, double step, const ObjectiveFn& f,
                            const Box* clamp = nullptr, NmCoefficients coeff = {});

/// Sort vertices best-first (stable; insertion order breaks ties).
Simplex order_simplex(Simplex s);

/// Mean of all vertices except the worst. Requires an ordered simplex.
Vec centroid(const Simplex& s);

/// Mean pairwise Euclidean distance over all vertex pairs.
double average_vertex_distance(const Simplex& s);

struct NmStepResult {
    std::vector<std::pair<Vec, double>> evaluations; // every objective call made
    std::string action;  // reflect | expand | contract_out | contract_in | shrink
    bool completed = true; // false when max_evals ran out mid-step
};

/// One pass of the reflect / expand / contract / shrink decision tree on an
/// ordered simplex. Trial points are clamped to `clamp` when given; NaN
/// objective values are treated as -inf. The simplex is re-ordered on exit.
NmStepResult nm_step(Simplex& s, const ObjectiveFn& f, const Box* clamp = nullptr,
                     long max_evals = LONG_MAX);

enum class NmTermination { Converged, NoImprovement, EvalBudget };
std::string to_string(NmTermination t);

struct NmStop {
    double d_lim = 0.0;             // stop when average vertex distance < d_lim
    int max_no_improve = INT_MAX;   // stop after p iterations without improvement
    long max_evals = LONG_MAX;      // objective call budget
};

struct NmRunResult {
    Vertex best;
    std::vector<std::pair<Vec, double>> evaluations;
    NmTermination reason;
    long iterations = 0;
    Simplex simplex; // final state
};

/// Iterate nm_step until a stop condition fires. The initial simplex must be
/// non-degenerate (positive average vertex distance); vertices must carry
/// their objective values already.
NmRunResult nm_run(const ObjectiveFn& f, Simplex initial, const NmStop& stop,
                   const Box* clamp = nullptr);

} // namespace ssmid
