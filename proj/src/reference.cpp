#include "exitlab/reference.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "exitlab/engine.hpp"
#include "exitlab/errors.hpp"
#include "exitlab/parallel.hpp"
#include "exitlab/rng.hpp"

namespace exitlab {

namespace {
// Disjoint path-index ranges per sampler kind.
constexpr std::uint64_t kStoppedOffset = 0;
constexpr std::uint64_t kSphereOffset = 1ull << 36;
constexpr std::uint64_t kTwoPointOffset = 1ull << 37;
}  // namespace

const char* reference_kind_name(ReferenceKind k) {
    switch (k) {
        case ReferenceKind::stopped_sigma_bm: return "stopped_sigma_bm";
        case ReferenceKind::uniform_sphere: return "uniform_sphere";
        case ReferenceKind::two_point: return "two_point";
    }
    return "unknown";
}

ReferenceSample sample_stopped_sigma_bm(const Matrix& sigma, std::size_t count, double step,
                                        std::uint64_t master_seed, unsigned workers) {
    if (sigma.rows != sigma.cols || sigma.rows == 0) {
        throw ConfigError("config error: field 'sigma': must be a square matrix");
    }
    const std::size_t d = sigma.rows;
    bool diffusive = false;
    for (std::size_t k = 0; k < d && !diffusive; ++k) {
        double diag = 0.0;
        for (std::size_t j = 0; j < d; ++j) diag += sigma.at(k, j) * sigma.at(k, j);
        diffusive = diag > 0.0;
    }
    if (!diffusive) {
        throw ConfigError("config error: field 'sigma': no positive diagonal in sigma sigma'");
    }

    SdeModel model;
    model.name = "reference_sigma_bm";
    model.dim = d;
    model.initial.assign(d, 0.0);
    model.drift = [d](std::span<const double>, std::span<double> out) {
        for (std::size_t i = 0; i < d; ++i) out[i] = 0.0;
    };
    model.diffusion = [sigma](std::span<const double>, Matrix& out) { out = sigma; };
    model.constant_diffusion = true;
    validate_model(model);

    ReferenceSample out;
    out.kind = ReferenceKind::stopped_sigma_bm;
    out.dimension = d;
    out.taus.resize(count);
    out.values = Matrix(count, d);

    ExitSimOptions options;
    options.method = DetectionMethod::substepped;
    options.keep_grid = false;
    parallel_for_indexed(count, workers, [&](std::size_t i) {
        const StreamKey key{master_seed, kReferencePathBase + kStoppedOffset + i, kMainSubstream};
        const ExitRecord rec = simulate_until_exit(model, model.initial, 1.0, step, key, options);
        out.taus[i] = rec.exit_time;
        for (std::size_t k = 0; k < d; ++k) out.values.at(i, k) = rec.exit_state[k];
    });
    return out;
}

ReferenceSample sample_uniform_sphere(std::size_t dimension, std::size_t count,
                                      std::uint64_t master_seed) {
    if (dimension == 0) throw DomainError("sample_uniform_sphere: dimension must be >= 1");
    ReferenceSample out;
    out.kind = ReferenceKind::uniform_sphere;
    out.dimension = dimension;
    out.values = Matrix(count, dimension);
    std::vector<double> g(dimension);
    for (std::size_t i = 0; i < count; ++i) {
        GaussianStream stream({master_seed, kReferencePathBase + kSphereOffset + i, kMainSubstream});
        double nrm = 0.0;
        do {  // zero-norm redraw is a probability-zero guard
            for (std::size_t k = 0; k < dimension; ++k) g[k] = stream.next();
            nrm = norm(g);
        } while (nrm == 0.0);
        for (std::size_t k = 0; k < dimension; ++k) out.values.at(i, k) = g[k] / nrm;
    }
    return out;
}

ReferenceSample exact_two_point(std::size_t count, std::uint64_t master_seed) {
    ReferenceSample out;
    out.kind = ReferenceKind::two_point;
    out.dimension = 1;
    out.values = Matrix(count, 1);
    const StreamKey key{master_seed, kReferencePathBase + kTwoPointOffset, kMainSubstream};
    for (std::size_t i = 0; i < count; ++i) {
        const double u = uniform_pair_at(key, static_cast<std::uint32_t>(i)).second;
        out.values.at(i, 0) = u < 0.5 ? -1.0 : 1.0;
    }
    return out;
}

void save_reference_csv(const ReferenceSample& sample, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw IoError("cannot open reference file for writing: " + path);
    os << "kind,dimension\n";
    os << reference_kind_name(sample.kind) << "," << sample.dimension << "\n";
    os << "tau";
    for (std::size_t k = 0; k < sample.dimension; ++k) os << ",v" << k;
    os << "\n";
    char buf[32];
    const bool has_tau = !sample.taus.empty();
    for (std::size_t i = 0; i < sample.count(); ++i) {
        if (has_tau) {
            std::snprintf(buf, sizeof buf, "%.17g", sample.taus[i]);
            os << buf;
        }
        for (std::size_t k = 0; k < sample.dimension; ++k) {
            std::snprintf(buf, sizeof buf, "%.17g", sample.values.at(i, k));
            os << "," << buf;
        }
        os << "\n";
    }
    if (!os) throw IoError("failed writing reference file: " + path);
}

ReferenceSample load_reference_csv(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw IoError("cannot open reference file: " + path);
    std::string line;
    if (!std::getline(is, line)) throw IoError("reference file truncated: " + path);
    if (!std::getline(is, line)) throw IoError("reference file truncated: " + path);
    std::istringstream header(line);
    std::string kind_name;
    std::getline(header, kind_name, ',');
    std::size_t dimension = 0;
    header >> dimension;
    ReferenceKind kind;
    if (kind_name == "stopped_sigma_bm") kind = ReferenceKind::stopped_sigma_bm;
    else if (kind_name == "uniform_sphere") kind = ReferenceKind::uniform_sphere;
    else if (kind_name == "two_point") kind = ReferenceKind::two_point;
    else throw IoError("reference file has unknown kind: " + kind_name);
    if (!std::getline(is, line)) throw IoError("reference file truncated: " + path);

    ReferenceSample out;
    out.kind = kind;
    out.dimension = dimension;
    std::vector<double> row;
    std::vector<double> flat;
    std::vector<double> taus;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string cell;
        row.clear();
        while (std::getline(ls, cell, ',')) {
            row.push_back(cell.empty() ? std::numeric_limits<double>::quiet_NaN()
                                       : std::stod(cell));
        }
        if (row.size() != dimension + 1) throw IoError("reference file has a malformed row");
        if (!std::isnan(row[0])) taus.push_back(row[0]);
        flat.insert(flat.end(), row.begin() + 1, row.end());
    }
    out.values.rows = flat.size() / dimension;
    out.values.cols = dimension;
    out.values.a = std::move(flat);
    if (taus.size() == out.values.rows) out.taus = std::move(taus);
    return out;
}

}  // namespace exitlab
