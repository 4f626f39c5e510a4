#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "exitlab/linalg.hpp"

namespace exitlab {

using VecFn = std::function<void(std::span<const double>, std::span<double>)>;
using MatFn = std::function<void(std::span<const double>, Matrix&)>;

// Result of probing diag(sigma sigma') over a deterministic point set in the
// closed unit ball around the initial state.
struct DiffusivityProbe {
    bool passed = false;
    double best_min_diag = 0.0;  // max over k of (min over points of (sigma sigma')_kk)
    double sigma_max = 0.0;      // sqrt(max over points of max_k (sigma sigma')_kk)
};

struct SdeModel {
    std::string name;
    std::size_t dim = 1;
    VecFn drift;      // R^d -> R^d
    MatFn diffusion;  // R^d -> d x d
    std::vector<double> initial;
    bool constant_diffusion = false;  // lets the stepper hoist sigma out of the loop
    DiffusivityProbe probe;
};

struct Observable {
    std::string name;
    std::size_t in_dim = 1;
    std::size_t out_dim = 1;
    VecFn f;
    MatFn jacobian_analytic;      // empty -> central finite differences
    std::vector<MatFn> hessians;  // optional, one d x d map per component

    void eval(std::span<const double> y, std::span<double> out) const;
    Matrix jacobian(std::span<const double> y) const;
    bool has_analytic_jacobian() const { return static_cast<bool>(jacobian_analytic); }
};

// Central finite-difference Jacobian, step 1e-6.
Matrix finite_difference_jacobian(const Observable& obs, std::span<const double> y);

// Deterministic points covering the closed unit ball around `center`: the
// center itself, the 2d axis boundary points, and n_random interior points
// from a fixed-seed stream.
std::vector<std::vector<double>> ball_probe_points(std::span<const double> center,
                                                   std::size_t n_random);

// Probes >= 10^3 deterministic points in the closed unit ball around
// model.initial (plus the center and the axis boundary points).
DiffusivityProbe run_diffusivity_probe(const SdeModel& model);

// Dimension checks on drift/diffusion outputs plus the diffusivity probe;
// throws DomainError on a dimension mismatch. Fills model.probe.
void validate_model(SdeModel& model);

// Checks the analytic Jacobian against central differences at 100 points in
// the closed unit ball around `center` (relative error <= 1e-5 in Frobenius
// norm). No-op for FD-backed observables. Throws DomainError on mismatch.
void validate_observable(const Observable& obs, std::span<const double> center);

// Built-in catalogs, addressed by name from experiment configs.
const SdeModel& model_by_name(const std::string& name);
const Observable& observable_by_name(const std::string& name);
std::vector<std::string> model_names();
std::vector<std::string> observable_names();

}  // namespace exitlab
