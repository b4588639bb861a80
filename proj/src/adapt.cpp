#include "fosls/adapt.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace fosls::adapt {

std::set<int> mark_doerfler(const std::vector<double>& eta, double theta) {
    if (eta.empty()) throw std::invalid_argument("mark_doerfler: empty estimator");
    if (!(theta > 0.0) || theta > 1.0)
        throw std::invalid_argument("mark_doerfler: theta must be in (0,1]");
    double total = 0;
    for (double e : eta) total += e * e;
    std::vector<int> order(eta.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        return eta[a] != eta[b] ? eta[a] > eta[b] : a < b;
    });
    std::set<int> marked;
    double acc = 0;
    for (int k : order) {
        if (acc >= theta * total) break;
        if (eta[k] == 0.0) break;  // theta-fraction already reached of a zero tail
        marked.insert(k);
        acc += eta[k] * eta[k];
    }
    return marked;
}

std::set<int> mark_maximum(const std::vector<double>& eta, double sigma) {
    if (eta.empty()) throw std::invalid_argument("mark_maximum: empty estimator");
    if (!(sigma > 0.0) || !(sigma < 1.0))
        throw std::invalid_argument("mark_maximum: sigma must be in (0,1)");
    const double mx = *std::max_element(eta.begin(), eta.end());
    std::set<int> marked;
    if (mx == 0.0) return marked;
    for (std::size_t k = 0; k < eta.size(); ++k)
        if (eta[k] >= sigma * mx) marked.insert(static_cast<int>(k));
    return marked;
}

std::string ConvergenceRecord::to_csv() const {
    std::ostringstream os;
    os << "level,ndof,eta,error,seconds\n";
    char buf[64];
    for (const auto& l : levels) {
        os << l.level << "," << l.ndof << ",";
        std::snprintf(buf, sizeof buf, "%.17g", l.eta);
        os << buf << ",";
        if (l.error) {
            std::snprintf(buf, sizeof buf, "%.17g", *l.error);
            os << buf;
        }
        std::snprintf(buf, sizeof buf, "%.3f", l.seconds);
        os << "," << buf << "\n";
    }
    return os.str();
}

double ConvergenceRecord::rate_estimate(int window) const {
    std::vector<std::pair<double, double>> pts;
    for (const auto& l : levels)
        if (l.ndof > 0 && l.eta > 0) pts.emplace_back(std::log(l.ndof), std::log(l.eta));
    if (pts.size() < 2) return 0.0;
    if (static_cast<int>(pts.size()) > window)
        pts.erase(pts.begin(), pts.end() - window);
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (auto [x, y] : pts) {
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    const double n = static_cast<double>(pts.size());
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

ConvergenceRecord afem_run(const SystemOperator& sys, fespace::ProblemTag tag,
                           const mesh::SimplicialMesh& mesh0, const AfemOptions& opts) {
    ConvergenceRecord rec;
    mesh::SimplicialMesh current = mesh0;
    for (int level = 0; level < opts.stop.max_levels; ++level) {
        const auto t0 = std::chrono::steady_clock::now();
        const ProductSpace sp = fespace::make_product(tag, current);
        LevelRecord lr;
        lr.level = level;
        lr.ndof = sp.total_dim();

        const auto ls = lsq::assemble(sys, sp, opts.quad_degree);
        const auto sol = lsq::solve(ls, opts.solver);
        if (!sol.converged) {
            rec.solver_failed = true;
            std::ostringstream os;
            os << "solver did not converge at level " << level << " (ndof " << lr.ndof
               << ", achieved residual " << sol.residual << ")";
            rec.failure = os.str();
            return rec;
        }
        const auto ef = lsq::estimate(sys, sp, sol.coeffs);
        lr.eta = ef.total;
        if (opts.keep_elementwise) lr.eta_per_element = ef.per_element;
        if (opts.exact)
            lr.error = lsq::vnorm_error(sys, sp, sol.coeffs, opts.exact);
        lr.seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        rec.levels.push_back(std::move(lr));
        if (opts.keep_meshes) rec.meshes.push_back(current);

        if (ef.total <= opts.stop.eta_tol) break;
        if (sp.total_dim() >= opts.stop.max_ndof) break;
        if (level + 1 >= opts.stop.max_levels) break;

        std::set<int> marked;
        switch (opts.marking.strategy) {
            case MarkingConfig::Strategy::Doerfler:
                marked = mark_doerfler(ef.per_element, opts.marking.parameter);
                break;
            case MarkingConfig::Strategy::Maximum:
                marked = mark_maximum(ef.per_element, opts.marking.parameter);
                break;
            case MarkingConfig::Strategy::Uniform:
                for (int K = 0; K < current.num_triangles(); ++K) marked.insert(K);
                break;
        }
        if (marked.empty()) break;
        current = mesh::refine_nvb(current, marked);
    }
    return rec;
}

}  // namespace fosls::adapt
