#include "exitlab/model.hpp"

#include <cmath>
#include <map>
#include <algorithm>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "exitlab/errors.hpp"
#include "exitlab/rng.hpp"

namespace exitlab {

void Observable::eval(std::span<const double> y, std::span<double> out) const {
    if (y.size() != in_dim || out.size() != out_dim) {
        throw DomainError("observable '" + name + "': dimension mismatch");
    }
    f(y, out);
}

Matrix finite_difference_jacobian(const Observable& obs, std::span<const double> y) {
    constexpr double kStep = 1e-6;
    Matrix jac(obs.out_dim, obs.in_dim);
    std::vector<double> yp(y.begin(), y.end());
    std::vector<double> fp(obs.out_dim), fm(obs.out_dim);
    for (std::size_t j = 0; j < obs.in_dim; ++j) {
        const double yj = yp[j];
        yp[j] = yj + kStep;
        obs.f(yp, fp);
        yp[j] = yj - kStep;
        obs.f(yp, fm);
        yp[j] = yj;
        for (std::size_t i = 0; i < obs.out_dim; ++i) {
            jac.at(i, j) = (fp[i] - fm[i]) / (2.0 * kStep);
        }
    }
    return jac;
}

Matrix Observable::jacobian(std::span<const double> y) const {
    if (y.size() != in_dim) throw DomainError("observable '" + name + "': dimension mismatch");
    if (jacobian_analytic) {
        Matrix jac(out_dim, in_dim);
        jacobian_analytic(y, jac);
        return jac;
    }
    return finite_difference_jacobian(*this, y);
}

// Deterministic points in the closed unit ball around `center`: fixed-seed
// Gaussian directions with radius u^(1/d), plus the center and the axis
// boundary points.
std::vector<std::vector<double>> ball_probe_points(std::span<const double> center,
                                                   std::size_t n_random) {
    const std::size_t d = center.size();
    const StreamKey key{0x9E3779B97F4A7C15ull, 0, 0};
    const auto dirs = gaussian_increments(key, n_random * d, 1.0);
    std::vector<std::vector<double>> pts;
    pts.reserve(n_random + 1 + 2 * d);
    pts.emplace_back(center.begin(), center.end());
    for (std::size_t k = 0; k < d; ++k) {
        for (double sign : {-1.0, 1.0}) {
            std::vector<double> p(center.begin(), center.end());
            p[k] += sign;
            pts.push_back(std::move(p));
        }
    }
    for (std::size_t i = 0; i < n_random; ++i) {
        std::span<const double> g(dirs.data() + i * d, d);
        double nrm = norm(g);
        if (nrm == 0.0) nrm = 1.0;
        const double u = uniform_pair_at(key, static_cast<std::uint32_t>(i)).second;
        const double radius = std::pow(u, 1.0 / static_cast<double>(d));
        std::vector<double> p(d);
        for (std::size_t k = 0; k < d; ++k) p[k] = center[k] + radius * g[k] / nrm;
        pts.push_back(std::move(p));
    }
    return pts;
}

DiffusivityProbe run_diffusivity_probe(const SdeModel& model) {
    const std::size_t d = model.dim;
    const auto pts = ball_probe_points(model.initial, 1024);
    std::vector<double> min_diag(d, std::numeric_limits<double>::infinity());
    double max_diag = 0.0;
    Matrix sigma(d, d);
    for (const auto& p : pts) {
        model.diffusion(p, sigma);
        for (std::size_t k = 0; k < d; ++k) {
            double diag = 0.0;
            for (std::size_t j = 0; j < d; ++j) diag += sigma.at(k, j) * sigma.at(k, j);
            if (diag < min_diag[k]) min_diag[k] = diag;
            if (diag > max_diag) max_diag = diag;
        }
    }
    DiffusivityProbe probe;
    for (double v : min_diag) probe.best_min_diag = std::max(probe.best_min_diag, v);
    probe.passed = probe.best_min_diag > 0.0;
    probe.sigma_max = std::sqrt(max_diag);
    return probe;
}

void validate_model(SdeModel& model) {
    if (model.dim == 0) throw DomainError("model '" + model.name + "': dimension must be positive");
    if (model.initial.size() != model.dim) {
        throw DomainError("model '" + model.name + "': initial point has wrong dimension");
    }
    std::vector<double> mu(model.dim);
    model.drift(model.initial, mu);
    Matrix sigma(model.dim, model.dim);
    model.diffusion(model.initial, sigma);
    if (sigma.rows != model.dim || sigma.cols != model.dim) {
        throw DomainError("model '" + model.name + "': diffusion has wrong shape");
    }
    model.probe = run_diffusivity_probe(model);
}

void validate_observable(const Observable& obs, std::span<const double> center) {
    if (!obs.has_analytic_jacobian()) return;
    const auto pts = ball_probe_points(center, 97);  // + center + 2d axis points = 100+
    for (const auto& p : pts) {
        const Matrix ja = obs.jacobian(p);
        const Matrix jfd = finite_difference_jacobian(obs, p);
        Matrix diff(ja.rows, ja.cols);
        for (std::size_t i = 0; i < ja.a.size(); ++i) diff.a[i] = ja.a[i] - jfd.a[i];
        const double rel = frobenius_norm(diff) / std::max(frobenius_norm(ja), 1.0);
        if (rel > 1e-5) {
            throw DomainError("observable '" + obs.name +
                              "': analytic Jacobian disagrees with finite differences");
        }
    }
}

namespace {

SdeModel make_bm(std::size_t d, const std::string& name) {
    SdeModel m;
    m.name = name;
    m.dim = d;
    m.initial.assign(d, 0.0);
    m.drift = [d](std::span<const double>, std::span<double> out) {
        for (std::size_t i = 0; i < d; ++i) out[i] = 0.0;
    };
    m.diffusion = [d](std::span<const double>, Matrix& out) { out = Matrix::identity(d); };
    m.constant_diffusion = true;
    return m;
}

SdeModel make_ou_1d() {
    SdeModel m;
    m.name = "ou_1d";
    m.dim = 1;
    m.initial = {0.0};
    m.drift = [](std::span<const double> y, std::span<double> out) { out[0] = -y[0]; };
    m.diffusion = [](std::span<const double>, Matrix& out) { out = Matrix::identity(1); };
    m.constant_diffusion = true;
    return m;
}

SdeModel make_rot_bm_2d() {
    SdeModel m;
    m.name = "rot_bm_2d";
    m.dim = 2;
    m.initial = {0.0, 0.0};
    const Matrix rot = rotation2d(std::numbers::pi / 6.0);
    m.drift = [](std::span<const double>, std::span<double> out) { out[0] = out[1] = 0.0; };
    m.diffusion = [rot](std::span<const double>, Matrix& out) { out = rot; };
    m.constant_diffusion = true;
    return m;
}

SdeModel make_statedep_2d() {
    SdeModel m;
    m.name = "statedep_2d";
    m.dim = 2;
    m.initial = {0.0, 0.0};
    m.drift = [](std::span<const double> y, std::span<double> out) {
        out[0] = -y[0];
        out[1] = -y[1];
    };
    m.diffusion = [](std::span<const double> y, Matrix& out) {
        out = Matrix(2, 2);
        const double y1sq = y[0] * y[0];
        out.at(0, 0) = 1.0 + y1sq / (1.0 + y1sq);  // smooth, bounded in [1, 2)
        out.at(1, 1) = 1.0;
    };
    return m;
}

Observable make_expm1(bool analytic_jacobian) {
    Observable o;
    o.name = analytic_jacobian ? "expm1" : "expm1_fd";
    o.in_dim = 1;
    o.out_dim = 1;
    o.f = [](std::span<const double> y, std::span<double> out) { out[0] = std::expm1(y[0]); };
    if (analytic_jacobian) {
        o.jacobian_analytic = [](std::span<const double> y, Matrix& out) {
            out.at(0, 0) = std::exp(y[0]);
        };
        o.hessians.push_back([](std::span<const double> y, Matrix& out) {
            out = Matrix(1, 1);
            out.at(0, 0) = std::exp(y[0]);
        });
    }
    return o;
}

Observable make_identity(std::size_t d, const std::string& name) {
    Observable o;
    o.name = name;
    o.in_dim = d;
    o.out_dim = d;
    o.f = [d](std::span<const double> y, std::span<double> out) {
        for (std::size_t i = 0; i < d; ++i) out[i] = y[i];
    };
    o.jacobian_analytic = [d](std::span<const double>, Matrix& out) {
        out = Matrix::identity(d);
    };
    for (std::size_t k = 0; k < d; ++k) {
        o.hessians.push_back([d](std::span<const double>, Matrix& out) { out = Matrix(d, d); });
    }
    return o;
}

Observable make_linear_2d() {
    Observable o;
    o.name = "linear_2d";
    o.in_dim = 2;
    o.out_dim = 2;
    Matrix a(2, 2);
    a.at(0, 0) = 1.0;
    a.at(0, 1) = 0.5;
    a.at(1, 0) = -0.3;
    a.at(1, 1) = 2.0;
    o.f = [a](std::span<const double> y, std::span<double> out) { matvec(a, y, out); };
    o.jacobian_analytic = [a](std::span<const double>, Matrix& out) { out = a; };
    for (int k = 0; k < 2; ++k) {
        o.hessians.push_back([](std::span<const double>, Matrix& out) { out = Matrix(2, 2); });
    }
    return o;
}

const std::map<std::string, SdeModel>& model_catalog() {
    static const std::map<std::string, SdeModel> catalog = [] {
        std::map<std::string, SdeModel> c;
        for (SdeModel m : {make_bm(1, "bm_1d"), make_bm(2, "bm_2d"), make_ou_1d(),
                           make_rot_bm_2d(), make_statedep_2d()}) {
            validate_model(m);
            c.emplace(m.name, std::move(m));
        }
        return c;
    }();
    return catalog;
}

const std::map<std::string, Observable>& observable_catalog() {
    static const std::map<std::string, Observable> catalog = [] {
        std::map<std::string, Observable> c;
        const std::vector<double> origin1{0.0};
        const std::vector<double> origin2{0.0, 0.0};
        for (Observable o : {make_expm1(true), make_expm1(false),
                             make_identity(1, "identity_1d"), make_identity(2, "identity_2d"),
                             make_linear_2d()}) {
            validate_observable(o, o.in_dim == 1 ? std::span<const double>(origin1)
                                                 : std::span<const double>(origin2));
            c.emplace(o.name, std::move(o));
        }
        return c;
    }();
    return catalog;
}

}  // namespace

const SdeModel& model_by_name(const std::string& name) {
    const auto& c = model_catalog();
    auto it = c.find(name);
    if (it == c.end()) throw ConfigError("config error: field 'model': unknown model '" + name + "'");
    return it->second;
}

const Observable& observable_by_name(const std::string& name) {
    const auto& c = observable_catalog();
    auto it = c.find(name);
    if (it == c.end()) {
        throw ConfigError("config error: field 'observable': unknown observable '" + name + "'");
    }
    return it->second;
}

std::vector<std::string> model_names() {
    std::vector<std::string> names;
    for (const auto& [k, v] : model_catalog()) names.push_back(k);
    return names;
}

std::vector<std::string> observable_names() {
    std::vector<std::string> names;
    for (const auto& [k, v] : observable_catalog()) names.push_back(k);
    return names;
}

}  // namespace exitlab
