#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>
#include <vector>

namespace ssmid {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// A parameter vector; names, units and bounds live in ParameterSpace.
using ParameterPoint = Eigen::VectorXd;

// ---------------------------------------------------------------------------
// Errors
// ---------------------------------------------------------------------------

/// Malformed configuration or schema violation. CLI maps this to exit code 2.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// A model equation was evaluated outside its mathematical domain
/// (log of a non-positive quantity, non-positive resistance, ...).
struct DomainError : std::runtime_error {
    explicit DomainError(const std::string& component, const std::string& what)
        : std::runtime_error(component + ": " + what), component(component) {}
    std::string component;
};

/// NaN or infinity showed up where a finite value is required.
struct NonFiniteError : std::runtime_error {
    NonFiniteError(const std::string& where, long index)
        : std::runtime_error(where + " is non-finite at index " + std::to_string(index)),
          index(index) {}
    long index;
};

/// A covariance lost positive definiteness beyond what jitter can repair,
/// or every particle weight underflowed.
struct DegeneracyError : std::runtime_error {
    explicit DegeneracyError(const std::string& what, long time_index = -1)
        : std::runtime_error(what), time_index(time_index) {}
    long time_index;
};

/// Every initial sample of an optimization run was infeasible.
/// CLI maps this to exit code 3.
struct InfeasibleSpaceError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Axis-aligned box, used for clamping trial points
// ---------------------------------------------------------------------------

struct Box {
    Vec lower;
    Vec upper;

    Eigen::Index dim() const { return lower.size(); }

    Vec clamp(const Vec& x) const {
        return x.cwiseMax(lower).cwiseMin(upper);
    }
    bool contains(const Vec& x, double tol = 0.0) const {
        return (x.array() >= lower.array() - tol).all() &&
               (x.array() <= upper.array() + tol).all();
    }
    static Box unit(Eigen::Index n) {
        return Box{Vec::Zero(n), Vec::Ones(n)};
    }
};

// ---------------------------------------------------------------------------
// ParameterSpace
// ---------------------------------------------------------------------------

/// Named, bounded, unit-annotated parameter vector space. Immutable after
/// construction. Optimizers work in normalized [0,1]^n coordinates obtained
/// through to_unit/from_unit.
class ParameterSpace {
public:
    ParameterSpace(std::vector<std::string> names, Vec lower, Vec upper,
                   std::vector<std::string> units = {})
        : names_(std::move(names)), units_(std::move(units)),
          lower_(std::move(lower)), upper_(std::move(upper)) {
        const auto n = static_cast<Eigen::Index>(names_.size());
        if (units_.empty()) units_.assign(names_.size(), "-");
        if (lower_.size() != n || upper_.size() != n ||
            static_cast<Eigen::Index>(units_.size()) != n)
            throw ConfigError("parameter space: names/bounds/units lengths differ");
        for (Eigen::Index i = 0; i < n; ++i)
            if (!(lower_[i] < upper_[i]))
                throw ConfigError("parameter space: lower must be < upper for '" +
                                  names_[static_cast<size_t>(i)] + "'");
    }

    Eigen::Index dim() const { return lower_.size(); }
    const std::vector<std::string>& names() const { return names_; }
    const std::vector<std::string>& units() const { return units_; }
    const Vec& lower() const { return lower_; }
    const Vec& upper() const { return upper_; }
    Vec width() const { return upper_ - lower_; }

    Vec to_unit(const Vec& theta) const {
        return ((theta - lower_).array() / (upper_ - lower_).array()).matrix();
    }
    Vec from_unit(const Vec& u) const {
        return lower_ + (u.array() * (upper_ - lower_).array()).matrix();
    }
    Vec clamp(const Vec& theta) const {
        return theta.cwiseMax(lower_).cwiseMin(upper_);
    }
    bool contains(const Vec& theta, double tol = 0.0) const {
        return Box{lower_, upper_}.contains(theta, tol);
    }
    Box box() const { return Box{lower_, upper_}; }

    int index_of(const std::string& name) const {
        for (size_t i = 0; i < names_.size(); ++i)
            if (names_[i] == name) return static_cast<int>(i);
        return -1;
    }

private:
    std::vector<std::string> names_;
    std::vector<std::string> units_;
    Vec lower_;
    Vec upper_;
};

// ---------------------------------------------------------------------------
// Dataset
// ---------------------------------------------------------------------------

/// Time-indexed input/measurement record with fixed sampling interval.
/// Row k holds u_{k+1} / z_{k+1} in the one-based recursion convention.
struct Dataset {
    Mat inputs;        // T x n_u
    Mat measurements;  // T x n_z
    double dt = 1.0;
    std::string label;

    Eigen::Index length() const { return inputs.rows(); }
    Eigen::Index input_dim() const { return inputs.cols(); }
    Eigen::Index meas_dim() const { return measurements.cols(); }

    void validate() const {
        if (inputs.rows() != measurements.rows())
            throw ConfigError("dataset '" + label + "': input/measurement lengths differ");
        if (inputs.rows() < 1)
            throw ConfigError("dataset '" + label + "': empty");
        if (!(dt > 0.0))
            throw ConfigError("dataset '" + label + "': dt must be positive");
    }
};

// ---------------------------------------------------------------------------
// NoiseSpec
// ---------------------------------------------------------------------------

/// Additive Gaussian noise covariances: Q (process, PSD) and R (measurement, PD).
struct NoiseSpec {
    Mat Q;
    Mat R;

    static NoiseSpec isotropic(Eigen::Index state_dim, double q,
                               Eigen::Index meas_dim, double r) {
        return NoiseSpec{q * Mat::Identity(state_dim, state_dim),
                         r * Mat::Identity(meas_dim, meas_dim)};
    }
    static NoiseSpec diagonal(const Vec& q_diag, const Vec& r_diag) {
        return NoiseSpec{Vec(q_diag).asDiagonal().toDenseMatrix(),
                         Vec(r_diag).asDiagonal().toDenseMatrix()};
    }
};

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

} // namespace ssmid
