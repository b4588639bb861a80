#include "fosls/lsq.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "fosls/quadrature.hpp"

namespace fosls::lsq {

using fespace::FeSpace;
using fespace::ShapeEval;
using kernels::Csr;
using mesh::Vec2;
using systems::StateEval;

namespace {

int worker_count(int njobs) {
    unsigned hw = std::thread::hardware_concurrency();
    if (const char* env = std::getenv("FOSLS_THREADS")) {
        const int n = std::atoi(env);
        if (n > 0) hw = static_cast<unsigned>(n);
    }
    if (hw == 0) hw = 1;
    return static_cast<int>(std::min<unsigned>(hw, static_cast<unsigned>(std::max(1, njobs))));
}

// global dof indices (or -1) and factor index per local dof of an element
struct LocalMap {
    std::vector<int> gdof;
    std::vector<int> factor;
    std::vector<int> entity;
};

LocalMap local_map(const ProductSpace& sp, int K) {
    LocalMap lm;
    for (int k = 0; k < sp.num_factors(); ++k) {
        for (const auto& ld : sp.factors[k].local_dofs(K)) {
            lm.gdof.push_back(ld.dof < 0 ? -1 : sp.offset[k] + ld.dof);
            lm.factor.push_back(k);
            lm.entity.push_back(ld.entity);
        }
    }
    return lm;
}

// columns of L applied to each local basis function at x
void basis_images(const SystemOperator& sys, const ProductSpace& sp, const LocalMap& lm, int K,
                  Vec2 x, std::vector<double>& img) {
    const int nv = sys.n_volume();
    img.assign(nv * lm.gdof.size(), 0.0);
    for (std::size_t j = 0; j < lm.gdof.size(); ++j) {
        if (lm.gdof[j] < 0) continue;
        const FeSpace& f = sp.factors[lm.factor[j]];
        const ShapeEval s = f.eval_entity_local(lm.entity[j], K, x, false);
        sys.basis_image(lm.factor[j], s, x, img.data() + nv * j);
    }
}

void trace_basis_images(const SystemOperator& sys, const ProductSpace& sp, const LocalMap& lm,
                        int K, Vec2 x, std::vector<double>& img) {
    const int nt = sys.n_trace();
    img.assign(nt * lm.gdof.size(), 0.0);
    for (std::size_t j = 0; j < lm.gdof.size(); ++j) {
        if (lm.gdof[j] < 0) continue;
        const FeSpace& f = sp.factors[lm.factor[j]];
        const ShapeEval s = f.eval_entity_local(lm.entity[j], K, x, false);
        sys.trace_basis_image(lm.factor[j], s, img.data() + nt * j);
    }
}

struct Accumulator {
    std::vector<std::tuple<int, int, double>> triplets;
    std::vector<double> load;
    double data_norm = 0;
};

void assemble_element(const SystemOperator& sys, const ProductSpace& sp, int K,
                      const quad::QuadRule& vol_rule, const quad::QuadRule& seg_rule,
                      Accumulator& acc) {
    const auto& m = sp.mesh();
    const LocalMap lm = local_map(sp, K);
    const std::size_t nloc = lm.gdof.size();
    const int nv = sys.n_volume();
    const auto& tr = m.tri(K);
    const Vec2 a = m.vertex(tr[0]), b = m.vertex(tr[1]), c = m.vertex(tr[2]);
    const double two_area = 2.0 * m.area(K);

    std::vector<double> gloc(nloc * nloc, 0.0), bloc(nloc, 0.0), img, fval(nv);
    for (std::size_t q = 0; q < vol_rule.size(); ++q) {
        const auto& l = vol_rule.bary[q];
        const Vec2 x = a * l[0] + b * l[1] + c * l[2];
        const double w = two_area * vol_rule.weights[q];
        basis_images(sys, sp, lm, K, x, img);
        sys.data(x, fval.data());
        for (std::size_t i = 0; i < nloc; ++i) {
            if (lm.gdof[i] < 0) continue;
            const double* bi = img.data() + nv * i;
            for (std::size_t j = i; j < nloc; ++j) {
                if (lm.gdof[j] < 0) continue;
                double s = 0;
                const double* bj = img.data() + nv * j;
                for (int r = 0; r < nv; ++r) s += bi[r] * bj[r];
                gloc[i * nloc + j] += w * s;
            }
            double s = 0;
            for (int r = 0; r < nv; ++r) s += bi[r] * fval[r];
            bloc[i] += w * s;
        }
        double fn = 0;
        for (int r = 0; r < nv; ++r) fn += fval[r] * fval[r];
        acc.data_norm += w * fn;
    }

    if (sys.has_initial_trace()) {
        const int nt = sys.n_trace();
        std::vector<double> tval(nt);
        for (int e : systems::owned_initial_edges(sp, K)) {
            const auto [p, q] = m.edges()[e];
            const Vec2 pa = m.vertex(p), pb = m.vertex(q);
            const double len = (pb - pa).norm();
            for (std::size_t s = 0; s < seg_rule.size(); ++s) {
                const Vec2 x = pa + (pb - pa) * seg_rule.bary[s][0];
                const double w = len * seg_rule.weights[s];
                trace_basis_images(sys, sp, lm, K, x, img);
                sys.trace_data(x, tval.data());
                for (std::size_t i = 0; i < nloc; ++i) {
                    if (lm.gdof[i] < 0) continue;
                    const double* bi = img.data() + nt * i;
                    for (std::size_t j = i; j < nloc; ++j) {
                        if (lm.gdof[j] < 0) continue;
                        double sum = 0;
                        const double* bj = img.data() + nt * j;
                        for (int r = 0; r < nt; ++r) sum += bi[r] * bj[r];
                        gloc[i * nloc + j] += w * sum;
                    }
                    double sum = 0;
                    for (int r = 0; r < nt; ++r) sum += bi[r] * tval[r];
                    bloc[i] += w * sum;
                }
                double fn = 0;
                for (int r = 0; r < nt; ++r) fn += tval[r] * tval[r];
                acc.data_norm += w * fn;
            }
        }
    }

    for (std::size_t i = 0; i < nloc; ++i) {
        if (lm.gdof[i] < 0) continue;
        acc.load[lm.gdof[i]] += bloc[i];
        for (std::size_t j = i; j < nloc; ++j) {
            if (lm.gdof[j] < 0) continue;
            const double v = gloc[i * nloc + j];
            acc.triplets.emplace_back(lm.gdof[i], lm.gdof[j], v);
            if (j != i) acc.triplets.emplace_back(lm.gdof[j], lm.gdof[i], v);
        }
    }
}

}  // namespace

LsqSystem assemble(const SystemOperator& sys, const ProductSpace& sp, int quad_degree) {
    const auto& m = sp.mesh();
    const int deg = quad_degree >= 0 ? quad_degree : sys.default_quad_degree();
    const auto vol_rule = quad::triangle_rule(deg);
    const auto seg_rule = quad::segment_rule(std::min(7, deg));
    const int nt = m.num_triangles();
    const int nw = worker_count(nt);

    std::vector<Accumulator> accs(nw);
    for (auto& a : accs) a.load.assign(sp.total_dim(), 0.0);
    auto run = [&](int w) {
        for (int K = w; K < nt; K += nw)
            assemble_element(sys, sp, K, vol_rule, seg_rule, accs[w]);
    };
    if (nw == 1) {
        run(0);
    } else {
        std::vector<std::thread> pool;
        for (int w = 0; w < nw; ++w) pool.emplace_back(run, w);
        for (auto& t : pool) t.join();
    }

    LsqSystem out;
    out.ndof = sp.total_dim();
    out.load.assign(sp.total_dim(), 0.0);
    std::vector<std::tuple<int, int, double>> triplets;
    for (const auto& a : accs) {
        out.data_norm += a.data_norm;
        for (int i = 0; i < sp.total_dim(); ++i) out.load[i] += a.load[i];
        triplets.insert(triplets.end(), a.triplets.begin(), a.triplets.end());
    }
    // deterministic: triplets are sorted and summed inside from_triplets
    out.gram = Csr::from_triplets(sp.total_dim(), sp.total_dim(), std::move(triplets));
    return out;
}

double LsqSystem::diag_ratio() const {
    double lo = 0, hi = 0;
    bool first = true;
    for (int r = 0; r < gram.rows; ++r) {
        for (int k = gram.rowptr[r]; k < gram.rowptr[r + 1]; ++k) {
            if (gram.colidx[k] != r) continue;
            const double d = std::abs(gram.vals[k]);
            if (first) { lo = hi = d; first = false; }
            lo = std::min(lo, d);
            hi = std::max(hi, d);
        }
    }
    return lo > 0 ? hi / lo : 0.0;
}

std::string LsqSystem::dump_coo() const {
    std::ostringstream os;
    os.precision(17);
    for (int r = 0; r < gram.rows; ++r)
        for (int k = gram.rowptr[r]; k < gram.rowptr[r + 1]; ++k)
            os << r << " " << gram.colidx[k] << " " << gram.vals[k] << "\n";
    return os.str();
}

namespace {

SolveResult solve_cg(const LsqSystem& ls, const SolveOptions& opts) {
    const int n = ls.ndof;
    SolveResult res;
    res.coeffs.assign(n, 0.0);
    if (n == 0) return res;
    std::vector<double> diag(n, 1.0);
    for (int r = 0; r < n; ++r)
        for (int k = ls.gram.rowptr[r]; k < ls.gram.rowptr[r + 1]; ++k)
            if (ls.gram.colidx[k] == r && ls.gram.vals[k] > 0) diag[r] = ls.gram.vals[k];

    std::vector<double> x(n, 0.0), r(ls.load), z(n), p(n), q(n);
    const double bnorm = kernels::nrm2(ls.load);
    if (bnorm == 0.0) return res;
    for (int i = 0; i < n; ++i) z[i] = r[i] / diag[i];
    p = z;
    double rz = kernels::dot(r, z);
    const int maxit = std::max(100, opts.maxit_factor * n);
    int it = 0;
    double rnorm = kernels::nrm2(r);
    while (rnorm > opts.tol * bnorm && it < maxit) {
        kernels::spmv(ls.gram, p, q);
        const double pq = kernels::dot(p, q);
        if (pq <= 0) break;  // loss of positive definiteness in exact arithmetic
        const double alpha = rz / pq;
        kernels::axpy(alpha, p, x);
        kernels::axpy(-alpha, q, r);
        for (int i = 0; i < n; ++i) z[i] = r[i] / diag[i];
        const double rz_next = kernels::dot(r, z);
        kernels::axpby(1.0, z, rz_next / rz, p);
        rz = rz_next;
        rnorm = kernels::nrm2(r);
        ++it;
    }
    res.coeffs = std::move(x);
    res.iterations = it;
    res.residual = rnorm / bnorm;
    res.converged = rnorm <= opts.tol * bnorm;
    return res;
}

SolveResult solve_direct(const LsqSystem& ls) {
    const int n = ls.ndof;
    SolveResult res;
    res.coeffs.assign(n, 0.0);
    if (n == 0) return res;
    // dense Cholesky G = L L'
    std::vector<double> a(static_cast<std::size_t>(n) * n, 0.0);
    for (int r = 0; r < n; ++r)
        for (int k = ls.gram.rowptr[r]; k < ls.gram.rowptr[r + 1]; ++k)
            a[static_cast<std::size_t>(r) * n + ls.gram.colidx[k]] = ls.gram.vals[k];
    for (int j = 0; j < n; ++j) {
        double* colj = a.data() + static_cast<std::size_t>(j) * n;
        double d = colj[j] - kernels::active().dot(colj, colj, j);
        if (d <= 0) throw std::runtime_error("solve: Gram matrix not positive definite");
        d = std::sqrt(d);
        colj[j] = d;
        for (int i = j + 1; i < n; ++i) {
            double* coli = a.data() + static_cast<std::size_t>(i) * n;
            coli[j] = (coli[j] - kernels::active().dot(coli, colj, j)) / d;
        }
    }
    std::vector<double>& x = res.coeffs;
    x = ls.load;
    for (int i = 0; i < n; ++i) {
        const double* row = a.data() + static_cast<std::size_t>(i) * n;
        x[i] = (x[i] - kernels::active().dot(row, x.data(), i)) / row[i];
    }
    for (int i = n - 1; i >= 0; --i) {
        double s = x[i];
        for (int k = i + 1; k < n; ++k) s -= a[static_cast<std::size_t>(k) * n + i] * x[k];
        x[i] = s / a[static_cast<std::size_t>(i) * n + i];
    }
    std::vector<double> r(n);
    kernels::spmv(ls.gram, x, r);
    for (int i = 0; i < n; ++i) r[i] -= ls.load[i];
    const double bn = kernels::nrm2(ls.load);
    res.residual = bn > 0 ? kernels::nrm2(r) / bn : kernels::nrm2(r);
    return res;
}

}  // namespace

SolveResult solve(const LsqSystem& ls, SolveOptions opts) {
    return opts.method == SolveOptions::Method::Direct ? solve_direct(ls) : solve_cg(ls, opts);
}

double ls_value_gram(const LsqSystem& ls, const std::vector<double>& coeffs) {
    if (static_cast<int>(coeffs.size()) != ls.ndof)
        throw std::invalid_argument("ls_value_gram: size mismatch");
    std::vector<double> gv(ls.ndof, 0.0);
    if (ls.ndof > 0) kernels::spmv(ls.gram, coeffs, gv);
    return kernels::dot(coeffs, gv) - 2.0 * kernels::dot(coeffs, ls.load) + ls.data_norm;
}

namespace {

// squared residual contribution of element K at the given quadrature degree
double element_eta_sq(const SystemOperator& sys, const ProductSpace& sp,
                      const std::vector<double>& coeffs, int K, const quad::QuadRule& vol_rule,
                      const quad::QuadRule& seg_rule) {
    const auto& m = sp.mesh();
    const auto& tr = m.tri(K);
    const Vec2 a = m.vertex(tr[0]), b = m.vertex(tr[1]), c = m.vertex(tr[2]);
    const double two_area = 2.0 * m.area(K);
    double s = 0;
    for (std::size_t q = 0; q < vol_rule.size(); ++q) {
        const auto& l = vol_rule.bary[q];
        const Vec2 x = a * l[0] + b * l[1] + c * l[2];
        const auto r = systems::residual_at(sys, sp, coeffs, K, x);
        double rr = 0;
        for (double v : r) rr += v * v;
        s += two_area * vol_rule.weights[q] * rr;
    }
    if (sys.has_initial_trace()) {
        for (int e : systems::owned_initial_edges(sp, K)) {
            const auto [p, q] = m.edges()[e];
            const Vec2 pa = m.vertex(p), pb = m.vertex(q);
            const double len = (pb - pa).norm();
            for (std::size_t i = 0; i < seg_rule.size(); ++i) {
                const Vec2 x = pa + (pb - pa) * seg_rule.bary[i][0];
                const auto r = systems::trace_residual_at(sys, sp, coeffs, K, x);
                double rr = 0;
                for (double v : r) rr += v * v;
                s += len * seg_rule.weights[i] * rr;
            }
        }
    }
    return s;
}

}  // namespace

EstimatorField estimate(const SystemOperator& sys, const ProductSpace& sp,
                        const std::vector<double>& coeffs) {
    const int deg = sys.default_quad_degree();
    const auto vol_rule = quad::triangle_rule(deg);
    const auto seg_rule = quad::segment_rule(std::min(7, deg));
    EstimatorField ef;
    double total_sq = 0;
    for (int K = 0; K < sp.mesh().num_triangles(); ++K) {
        const double e2 = element_eta_sq(sys, sp, coeffs, K, vol_rule, seg_rule);
        ef.per_element.push_back(std::sqrt(std::max(0.0, e2)));
        total_sq += e2;
    }
    ef.total = std::sqrt(std::max(0.0, total_sq));
    return ef;
}

double ls_value(const SystemOperator& sys, const ProductSpace& sp,
                const std::vector<double>& coeffs) {
    const auto ef = estimate(sys, sp, coeffs);
    return ef.total * ef.total;
}

double discrete_loss(const SystemOperator& sys, const ProductSpace& sp,
                     const std::vector<double>& coeffs, int quad_degree) {
    const auto vol_rule = quad::triangle_rule(quad_degree);
    const auto seg_rule = quad::segment_rule(std::min(7, quad_degree));
    double s = 0;
    for (int K = 0; K < sp.mesh().num_triangles(); ++K)
        s += element_eta_sq(sys, sp, coeffs, K, vol_rule, seg_rule);
    return s;
}

double residual_orthogonality(const LsqSystem& ls, const std::vector<double>& coeffs) {
    if (ls.ndof == 0) return 0.0;
    std::vector<double> gv(ls.ndof, 0.0);
    kernels::spmv(ls.gram, coeffs, gv);
    double num = 0, den = 1.0;
    for (int i = 0; i < ls.ndof; ++i) {
        num = std::max(num, std::abs(gv[i] - ls.load[i]));
        den = std::max(den, std::abs(ls.load[i]));
    }
    return num / den;
}

double vnorm_error(const SystemOperator& sys, const ProductSpace& sp,
                   const std::vector<double>& coeffs,
                   const std::function<StateEval(Vec2)>& exact) {
    double s = 0;
    auto diff = [&](int K, Vec2 x) {
        StateEval d = systems::eval_state(sp, coeffs, K, x, false);
        const StateEval u = exact(x);
        for (std::size_t k = 0; k < d.f.size(); ++k) {
            d.f[k].value[0] -= u.f[k].value[0];
            d.f[k].value[1] -= u.f[k].value[1];
            d.f[k].grad[0] -= u.f[k].grad[0];
            d.f[k].grad[1] -= u.f[k].grad[1];
            d.f[k].div -= u.f[k].div;
        }
        return d;
    };
    for (int K = 0; K < sp.mesh().num_triangles(); ++K)
        s += systems::vnorm_squared_element(sys, sp, K, diff, 8);
    return std::sqrt(std::max(0.0, s));
}

}  // namespace fosls::lsq
