#include "ssmid/nelder_mead.hpp"

#include <algorithm>
#include <cmath>

namespace ssmid {

namespace {

// L-minus ordering key: we maximize `value`, the algorithm sorts ascending
// in -value. NaN was already mapped to -inf by the evaluation wrapper.
inline bool better(double a, double b) { return a > b; }

double sanitized(double v) { return std::isnan(v) ? kNegInf : v; }

} // namespace

Simplex make_simplex(std::vector<Vertex> vertices, NmCoefficients coeff) {
    Simplex s{std::move(vertices), coeff};
    s.validate();
    return s;
}

Simplex make_simplex_around(const Vec& x0, double step, const ObjectiveFn& f,
                            const Box* clamp, NmCoefficients coeff) {
    const Eigen::Index n = x0.size();
    std::vector<Vertex> vertices;
    vertices.reserve(static_cast<size_t>(n) + 1);
    auto eval_at = [&](Vec x) {
        if (clamp) x = clamp->clamp(x);
        const double v = sanitized(f(x));
        vertices.push_back({std::move(x), v});
    };
    eval_at(x0);
    for (Eigen::Index i = 0; i < n; ++i) {
        Vec x = x0;
        double d = step;
        if (clamp && x0[i] + d > clamp->upper[i]) d = -step;
        x[i] += d;
        eval_at(std::move(x));
    }
    return make_simplex(std::move(vertices), coeff);
}

Simplex order_simplex(Simplex s) {
    s.validate();
    std::stable_sort(s.vertices.begin(), s.vertices.end(),
                     [](const Vertex& a, const Vertex& b) {
                         return better(a.value, b.value);
                     });
    return s;
}

Vec centroid(const Simplex& s) {
    const size_t n = s.vertices.size() - 1; // exclude the worst
    Vec c = Vec::Zero(s.dim());
    for (size_t i = 0; i < n; ++i) c += s.vertices[i].x;
    return c / static_cast<double>(n);
}

double average_vertex_distance(const Simplex& s) {
    const size_t m = s.vertices.size();
    if (m < 2) return 0.0;
    double sum = 0.0;
    size_t pairs = 0;
    for (size_t i = 0; i < m; ++i)
        for (size_t j = i + 1; j < m; ++j) {
            sum += (s.vertices[i].x - s.vertices[j].x).norm();
            ++pairs;
        }
    return sum / static_cast<double>(pairs);
}

NmStepResult nm_step(Simplex& s, const ObjectiveFn& f, const Box* clamp,
                     long max_evals) {
    s.validate();
    NmStepResult result;
    auto evaluate = [&](Vec x) -> std::pair<bool, Vertex> {
        if (static_cast<long>(result.evaluations.size()) >= max_evals) {
            result.completed = false;
            return {false, {}};
        }
        if (clamp) x = clamp->clamp(x);
        const double v = sanitized(f(x));
        result.evaluations.emplace_back(x, v);
        return {true, Vertex{std::move(x), v}};
    };

    const size_t worst = s.vertices.size() - 1;
    const size_t second_worst = s.vertices.size() - 2;
    const double l_best = s.vertices.front().value;
    const double l_second = s.vertices[second_worst].value;
    const double l_worst = s.vertices[worst].value;
    const Vec origin = centroid(s);

    auto finish = [&](const char* action) {
        result.action = action;
        s = order_simplex(std::move(s));
    };

    // Reflection
    auto [ok_r, refl] =
        evaluate(origin + s.coeff.reflection * (origin - s.vertices[worst].x));
    if (!ok_r) return result;

    if (!better(refl.value, l_best) && better(refl.value, l_second)) {
        s.vertices[worst] = std::move(refl);
        finish("reflect");
        return result;
    }

    if (better(refl.value, l_best)) {
        // Expansion
        auto [ok_e, exp] = evaluate(origin + s.coeff.expansion * (refl.x - origin));
        if (!ok_e) {
            s.vertices[worst] = std::move(refl); // keep the improvement we have
            finish("reflect");
            return result;
        }
        if (better(exp.value, refl.value)) {
            s.vertices[worst] = std::move(exp);
            finish("expand");
        } else {
            s.vertices[worst] = std::move(refl);
            finish("reflect");
        }
        return result;
    }

    // Contraction: outside when the reflected point beats the worst vertex,
    // inside otherwise.
    const bool outside = better(refl.value, l_worst);
    const Vec target = outside ? refl.x : s.vertices[worst].x;
    auto [ok_c, contr] = evaluate(origin + s.coeff.contraction * (target - origin));
    if (!ok_c) return result;
    if (better(contr.value, refl.value)) {
        s.vertices[worst] = std::move(contr);
        finish(outside ? "contract_out" : "contract_in");
        return result;
    }

    // Shrink toward the best vertex.
    for (size_t i = 1; i < s.vertices.size(); ++i) {
        auto [ok_s, shr] = evaluate(s.vertices.front().x +
                                    s.coeff.shrink *
                                        (s.vertices[i].x - s.vertices.front().x));
        if (!ok_s) {
            finish("shrink");
            return result;
        }
        s.vertices[i] = std::move(shr);
    }
    finish("shrink");
    return result;
}

std::string to_string(NmTermination t) {
    switch (t) {
        case NmTermination::Converged: return "converged";
        case NmTermination::NoImprovement: return "no_improvement";
        case NmTermination::EvalBudget: return "eval_budget";
    }
    return "?";
}

NmRunResult nm_run(const ObjectiveFn& f, Simplex initial, const NmStop& stop,
                   const Box* clamp) {
    initial.validate();
    if (!(average_vertex_distance(initial) > 0.0))
        throw ConfigError("nm_run: initial simplex is degenerate");

    NmRunResult out;
    out.simplex = order_simplex(std::move(initial));
    int no_improve = 0;

    while (true) {
        if (average_vertex_distance(out.simplex) < stop.d_lim) {
            out.reason = NmTermination::Converged;
            break;
        }
        if (static_cast<long>(out.evaluations.size()) >= stop.max_evals) {
            out.reason = NmTermination::EvalBudget;
            break;
        }
        const double best_before = out.simplex.vertices.front().value;
        auto step = nm_step(out.simplex, f, clamp,
                            stop.max_evals - static_cast<long>(out.evaluations.size()));
        out.evaluations.insert(out.evaluations.end(), step.evaluations.begin(),
                               step.evaluations.end());
        ++out.iterations;
        if (!step.completed) {
            out.reason = NmTermination::EvalBudget;
            break;
        }
        const double best_after = out.simplex.vertices.front().value;
        if (best_after - best_before < out.simplex.coeff.no_improve_tol)
            ++no_improve;
        else
            no_improve = 0;
        if (no_improve >= stop.max_no_improve) {
            out.reason = NmTermination::NoImprovement;
            break;
        }
    }
    out.best = out.simplex.vertices.front();
    return out;
}

} // namespace ssmid
