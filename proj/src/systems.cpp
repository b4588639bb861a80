#include "fosls/systems.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "fosls/quadrature.hpp"

namespace fosls::systems {

using fespace::FeSpace;
using fespace::SpaceKind;

int SystemOperator::default_quad_degree() const {
    if (residual_degree_ < 0) return 6;
    return std::min(6, 2 * residual_degree_);
}

void SystemOperator::trace_basis_image(int, const ShapeEval&, double*) const {}
void SystemOperator::trace_data(Vec2, double*) const {}
double SystemOperator::vnorm_trace_density(const StateEval&) const { return 0.0; }

namespace {

int max_deg(std::initializer_list<int> l) {
    int m = 0;
    for (int d : l) {
        if (d < 0) return -1;
        m = std::max(m, d);
    }
    return m;
}

// ---- Poisson / Helmholtz ----
// components: (r0, r1, r2) = (-div sigma - k^2 u, grad u - sigma)
class PoissonOp final : public SystemOperator {
  public:
    PoissonOp(double k, Field f, Field g1, Field g2)
        : SystemOperator(ProblemTag::Poisson, 3, 0,
                         max_deg({1, f.degree, g1.degree, g2.degree})),
          k_(k), f_(std::move(f)), g1_(std::move(g1)), g2_(std::move(g2)) {
        if (k < 0) throw std::invalid_argument("poisson_helmholtz: k must be >= 0");
    }

    void basis_image(int factor, const ShapeEval& s, Vec2, double* out) const override {
        out[0] = out[1] = out[2] = 0;
        if (factor == 0) {  // u in S1
            out[0] = -k_ * k_ * s.value[0];
            out[1] = s.grad[0];
            out[2] = s.grad[1];
        } else {  // sigma in RT0
            out[0] = -s.div;
            out[1] = -s.value[0];
            out[2] = -s.value[1];
        }
    }

    void data(Vec2 x, double* out) const override {
        out[0] = f_(x);
        out[1] = g1_(x);
        out[2] = g2_(x);
    }

    double vnorm_volume_density(const StateEval& st) const override {
        const auto& u = st.f[0];
        const auto& sg = st.f[1];
        return u.value[0] * u.value[0] + u.grad[0] * u.grad[0] + u.grad[1] * u.grad[1] +
               sg.value[0] * sg.value[0] + sg.value[1] * sg.value[1] + sg.div * sg.div;
    }

  private:
    double k_;
    Field f_, g1_, g2_;
};

// ---- linear elastostatics, d = 2 ----
// components: (-div sigma - f [2], C^{-1/2} sigma - C^{1/2} eps(u) [4])
class ElasticityOp final : public SystemOperator {
  public:
    ElasticityOp(double lambda, double mu, Field f1, Field f2)
        : SystemOperator(ProblemTag::Elasticity, 6, 0, max_deg({1, f1.degree, f2.degree})),
          lambda_(lambda), mu_(mu), f1_(std::move(f1)), f2_(std::move(f2)) {
        if (lambda <= 0 || mu <= 0)
            throw std::invalid_argument("elasticity: Lame constants must be positive");
    }

    void basis_image(int factor, const ShapeEval& s, Vec2, double* out) const override {
        std::fill(out, out + 6, 0.0);
        double m[4], r[4];
        if (factor == 0 || factor == 1) {
            // eps(u) for u = theta * e_row: sym(e_row (x) grad)
            const int row = factor;
            m[0] = row == 0 ? s.grad[0] : 0.0;
            m[3] = row == 1 ? s.grad[1] : 0.0;
            m[1] = m[2] = 0.5 * (row == 0 ? s.grad[1] : s.grad[0]);
            elasticity_tensor_pow(lambda_, mu_, 0.5, m, r);
            for (int i = 0; i < 4; ++i) out[2 + i] = -r[i];
        } else {
            const int row = factor - 2;
            out[row] = -s.div;
            m[0] = row == 0 ? s.value[0] : 0.0;
            m[1] = row == 0 ? s.value[1] : 0.0;
            m[2] = row == 1 ? s.value[0] : 0.0;
            m[3] = row == 1 ? s.value[1] : 0.0;
            elasticity_tensor_pow(lambda_, mu_, -0.5, m, r);
            for (int i = 0; i < 4; ++i) out[2 + i] = r[i];
        }
    }

    void data(Vec2 x, double* out) const override {
        std::fill(out, out + 6, 0.0);
        out[0] = f1_(x);
        out[1] = f2_(x);
    }

    double vnorm_volume_density(const StateEval& st) const override {
        // ||C^{1/2} eps(u)||^2 + ||C^{-1/2} sigma||^2 + ||div sigma||^2
        double eps[4] = {st.f[0].grad[0], 0.5 * (st.f[0].grad[1] + st.f[1].grad[0]),
                         0.5 * (st.f[0].grad[1] + st.f[1].grad[0]), st.f[1].grad[1]};
        double sig[4] = {st.f[2].value[0], st.f[2].value[1], st.f[3].value[0],
                         st.f[3].value[1]};
        double a[4], b[4];
        elasticity_tensor_pow(lambda_, mu_, 0.5, eps, a);
        elasticity_tensor_pow(lambda_, mu_, -0.5, sig, b);
        double s = 0;
        for (int i = 0; i < 4; ++i) s += a[i] * a[i] + b[i] * b[i];
        s += st.f[2].div * st.f[2].div + st.f[3].div * st.f[3].div;
        return s;
    }

  private:
    double lambda_, mu_;
    Field f1_, f2_;
};

// ---- space-time advection-reaction-diffusion, 1+1D, coordinates (t,x) ----
// volume components: (u2 + a dx(u1), dt(u1) + dx(u2) + b dx(u1) + c u1)
// trace component: u1(0,.)
class HeatOp final : public SystemOperator {
  public:
    HeatOp(Field a, Field b, Field c, Field f, Field u0)
        : SystemOperator(ProblemTag::Heat, 2, 1,
                         max_deg({1, a.degree, b.degree,
                                  c.degree < 0 ? -1 : c.degree + 1, f.degree, u0.degree})),
          a_(std::move(a)), b_(std::move(b)), c_(std::move(c)), f_(std::move(f)),
          u0_(std::move(u0)) {}

    void basis_image(int factor, const ShapeEval& s, Vec2 x, double* out) const override {
        out[0] = out[1] = 0;
        if (factor == 0) {  // u1
            out[0] = a_(x) * s.grad[1];
            out[1] = s.grad[0] + b_(x) * s.grad[1] + c_(x) * s.value[0];
        } else {  // u2
            out[0] = s.value[0];
            out[1] = s.grad[1];
        }
    }

    void trace_basis_image(int factor, const ShapeEval& s, double* out) const override {
        out[0] = factor == 0 ? s.value[0] : 0.0;
    }

    void data(Vec2 x, double* out) const override {
        out[0] = 0.0;
        out[1] = f_(x);
    }

    void trace_data(Vec2 x, double* out) const override { out[0] = u0_(x); }

    double vnorm_volume_density(const StateEval& st) const override {
        const auto& u1 = st.f[0];
        const auto& u2 = st.f[1];
        const double div_st = u1.grad[0] + u2.grad[1];  // dt u1 + dx u2
        return u1.value[0] * u1.value[0] + u1.grad[1] * u1.grad[1] +
               u2.value[0] * u2.value[0] + div_st * div_st;
    }

    double vnorm_trace_density(const StateEval& st) const override {
        return st.f[0].value[0] * st.f[0].value[0];
    }

  private:
    Field a_, b_, c_, f_, u0_;
};

// ---- space-time acoustic wave, 1+1D ----
// volume components: (dt v - dx sigma, dt sigma - dx v)
// trace components: (v(0,.), sigma(0,.))
class WaveOp final : public SystemOperator {
  public:
    WaveOp(Field f, Field g, Field v0, Field s0)
        : SystemOperator(ProblemTag::Wave, 2, 2,
                         max_deg({1, f.degree, g.degree, v0.degree, s0.degree})),
          f_(std::move(f)), g_(std::move(g)), v0_(std::move(v0)), s0_(std::move(s0)) {}

    void basis_image(int factor, const ShapeEval& s, Vec2, double* out) const override {
        if (factor == 0) {  // v
            out[0] = s.grad[0];
            out[1] = -s.grad[1];
        } else {  // sigma
            out[0] = -s.grad[1];
            out[1] = s.grad[0];
        }
    }

    void trace_basis_image(int factor, const ShapeEval& s, double* out) const override {
        out[0] = factor == 0 ? s.value[0] : 0.0;
        out[1] = factor == 1 ? s.value[0] : 0.0;
    }

    void data(Vec2 x, double* out) const override {
        out[0] = f_(x);
        out[1] = g_(x);
    }

    void trace_data(Vec2 x, double* out) const override {
        out[0] = v0_(x);
        out[1] = s0_(x);
    }

    double vnorm_volume_density(const StateEval& st) const override {
        const auto& v = st.f[0];
        const auto& sg = st.f[1];
        const double r1 = sg.grad[0] - v.grad[1];   // dt sigma - dx v
        const double r2 = v.grad[0] - sg.grad[1];   // div(v, -sigma)
        return v.value[0] * v.value[0] + r1 * r1 + sg.value[0] * sg.value[0] + r2 * r2;
    }

    double vnorm_trace_density(const StateEval& st) const override {
        return st.f[0].value[0] * st.f[0].value[0] + st.f[1].value[0] * st.f[1].value[0];
    }

  private:
    Field f_, g_, v0_, s0_;
};

// ---- OCP constrained by Poisson ----
// factors (u, sigma_y, p, sigma_p); components:
//   block Y: (-div sigma_y + p/lambda - f, grad u - sigma_y - g)
//   block P: (-div sigma_p - u + z, grad p - sigma_p)
class OcpPoissonOp final : public SystemOperator {
  public:
    OcpPoissonOp(double lambda, Field f, Field g1, Field g2, Field z)
        : SystemOperator(ProblemTag::OcpPoisson, 6, 0,
                         max_deg({1, f.degree, g1.degree, g2.degree, z.degree})),
          lambda_(lambda), f_(std::move(f)), g1_(std::move(g1)), g2_(std::move(g2)),
          z_(std::move(z)) {
        if (lambda <= 0) throw std::invalid_argument("ocp_poisson: lambda must be positive");
    }

    void basis_image(int factor, const ShapeEval& s, Vec2, double* out) const override {
        std::fill(out, out + 6, 0.0);
        switch (factor) {
            case 0:  // u
                out[1] = s.grad[0];
                out[2] = s.grad[1];
                out[3] = -s.value[0];
                break;
            case 1:  // sigma_y
                out[0] = -s.div;
                out[1] = -s.value[0];
                out[2] = -s.value[1];
                break;
            case 2:  // p
                out[0] = s.value[0] / lambda_;
                out[4] = s.grad[0];
                out[5] = s.grad[1];
                break;
            case 3:  // sigma_p
                out[3] = -s.div;
                out[4] = -s.value[0];
                out[5] = -s.value[1];
                break;
        }
    }

    void data(Vec2 x, double* out) const override {
        std::fill(out, out + 6, 0.0);
        out[0] = f_(x);
        out[1] = g1_(x);
        out[2] = g2_(x);
        out[3] = -z_(x);
    }

    double vnorm_volume_density(const StateEval& st) const override {
        double s = 0;
        for (int block = 0; block < 2; ++block) {
            const auto& u = st.f[2 * block];
            const auto& sg = st.f[2 * block + 1];
            s += u.value[0] * u.value[0] + u.grad[0] * u.grad[0] + u.grad[1] * u.grad[1] +
                 sg.value[0] * sg.value[0] + sg.value[1] * sg.value[1] + sg.div * sg.div;
        }
        return s;
    }

    double lambda() const { return lambda_; }

  private:
    double lambda_;
    Field f_, g1_, g2_, z_;
};

}  // namespace

void elasticity_tensor_pow(double lambda, double mu, double s, const double m[4],
                           double out[4]) {
    const double tr_half = 0.5 * (m[0] + m[3]);
    const double dev_scale = std::pow(2.0 * mu, s);
    const double tr_scale = std::pow(2.0 * mu + 2.0 * lambda, s);
    out[0] = dev_scale * (m[0] - tr_half) + tr_scale * tr_half;
    out[1] = dev_scale * m[1];
    out[2] = dev_scale * m[2];
    out[3] = dev_scale * (m[3] - tr_half) + tr_scale * tr_half;
}

std::unique_ptr<SystemOperator> poisson_helmholtz(double k, Field f) {
    return std::make_unique<PoissonOp>(k, std::move(f), Field::zero(), Field::zero());
}

std::unique_ptr<SystemOperator> poisson_general(double k, Field f, Field g1, Field g2) {
    return std::make_unique<PoissonOp>(k, std::move(f), std::move(g1), std::move(g2));
}

std::unique_ptr<SystemOperator> elasticity(double lambda, double mu, Field f1, Field f2) {
    return std::make_unique<ElasticityOp>(lambda, mu, std::move(f1), std::move(f2));
}

std::unique_ptr<SystemOperator> heat(Field a, Field b, Field c, Field f, Field u0) {
    return std::make_unique<HeatOp>(std::move(a), std::move(b), std::move(c), std::move(f),
                                    std::move(u0));
}

std::unique_ptr<SystemOperator> wave(Field f, Field g, Field v0, Field sigma0) {
    return std::make_unique<WaveOp>(std::move(f), std::move(g), std::move(v0),
                                    std::move(sigma0));
}

std::unique_ptr<SystemOperator> ocp_poisson(double lambda, Field f, Field z) {
    return std::make_unique<OcpPoissonOp>(lambda, std::move(f), Field::zero(), Field::zero(),
                                          std::move(z));
}

std::unique_ptr<SystemOperator> ocp_poisson_general(double lambda, Field f, Field g1, Field g2,
                                                    Field z) {
    return std::make_unique<OcpPoissonOp>(lambda, std::move(f), std::move(g1), std::move(g2),
                                          std::move(z));
}

StateEval eval_state(const ProductSpace& sp, const std::vector<double>& coeffs, int K, Vec2 x,
                     bool check_inside) {
    if (static_cast<int>(coeffs.size()) != sp.total_dim())
        throw std::invalid_argument("eval_state: coefficient size mismatch");
    StateEval st;
    st.f.resize(sp.num_factors());
    for (int k = 0; k < sp.num_factors(); ++k) {
        const FeSpace& f = sp.factors[k];
        ShapeEval acc;
        acc.ncomp = f.ncomp();
        for (const auto& ld : f.local_dofs(K)) {
            if (ld.dof < 0) continue;
            const double c = coeffs[sp.offset[k] + ld.dof];
            if (c == 0.0) continue;
            const ShapeEval s = f.eval_entity_local(ld.entity, K, x, check_inside);
            acc.value[0] += c * s.value[0];
            acc.value[1] += c * s.value[1];
            acc.grad[0] += c * s.grad[0];
            acc.grad[1] += c * s.grad[1];
            acc.div += c * s.div;
        }
        st.f[k] = acc;
    }
    return st;
}

std::vector<double> residual_at(const SystemOperator& sys, const ProductSpace& sp,
                                const std::vector<double>& coeffs, int K, Vec2 x) {
    return residual_from_state(sys, eval_state(sp, coeffs, K, x), x);
}

std::vector<double> residual_from_state(const SystemOperator& sys, const StateEval& st,
                                        Vec2 x) {
    std::vector<double> r(sys.n_volume());
    sys.data(x, r.data());
    std::vector<double> img(sys.n_volume());
    for (std::size_t k = 0; k < st.f.size(); ++k) {
        sys.basis_image(static_cast<int>(k), st.f[k], x, img.data());
        for (int i = 0; i < sys.n_volume(); ++i) r[i] -= img[i];
    }
    return r;
}

std::vector<double> trace_residual_at(const SystemOperator& sys, const ProductSpace& sp,
                                      const std::vector<double>& coeffs, int K, Vec2 x) {
    return trace_residual_from_state(sys, eval_state(sp, coeffs, K, x), x);
}

std::vector<double> trace_residual_from_state(const SystemOperator& sys, const StateEval& st,
                                              Vec2 x) {
    std::vector<double> r(sys.n_trace());
    if (sys.n_trace() == 0) return r;
    sys.trace_data(x, r.data());
    std::vector<double> img(sys.n_trace());
    for (std::size_t k = 0; k < st.f.size(); ++k) {
        sys.trace_basis_image(static_cast<int>(k), st.f[k], img.data());
        for (int i = 0; i < sys.n_trace(); ++i) r[i] -= img[i];
    }
    return r;
}

std::vector<int> owned_initial_edges(const ProductSpace& sp, int K) {
    std::vector<int> out;
    const auto& m = sp.mesh();
    for (int e : m.tri_edges(K)) {
        auto l = m.boundary_label(e);
        if (l && *l == mesh::BoundaryLabel::Initial && m.edge_owner(e) == K) out.push_back(e);
    }
    return out;
}

double vnorm_squared_element(const SystemOperator& sys, const ProductSpace& sp, int K,
                             const std::function<StateEval(int, Vec2)>& state_at,
                             int quad_degree) {
    const auto& m = sp.mesh();
    const bool composite = quad_degree > 6;  // one midpoint subdivision instead
    const auto rule = quad::triangle_rule_interior(std::min(6, quad_degree));
    const auto& tr = m.tri(K);
    const Vec2 v0 = m.vertex(tr[0]), v1 = m.vertex(tr[1]), v2 = m.vertex(tr[2]);
    std::vector<std::array<Vec2, 3>> cells;
    if (composite) {
        const Vec2 m01 = (v0 + v1) * 0.5, m12 = (v1 + v2) * 0.5, m02 = (v0 + v2) * 0.5;
        cells = {{v0, m01, m02}, {m01, v1, m12}, {m02, m12, v2}, {m01, m12, m02}};
    } else {
        cells = {{v0, v1, v2}};
    }
    double s = 0;
    for (const auto& cell : cells) {
        const double two_area = (cell[1] - cell[0]).cross(cell[2] - cell[0]);
        for (std::size_t q = 0; q < rule.size(); ++q) {
            const auto& l = rule.bary[q];
            const Vec2 x = cell[0] * l[0] + cell[1] * l[1] + cell[2] * l[2];
            s += two_area * rule.weights[q] * sys.vnorm_volume_density(state_at(K, x));
        }
    }
    if (sys.has_initial_trace()) {
        const auto seg = quad::segment_rule(std::min(7, quad_degree));
        for (int e : owned_initial_edges(sp, K)) {
            const auto [p, q] = m.edges()[e];
            const Vec2 pa = m.vertex(p), pb = m.vertex(q);
            const double len = (pb - pa).norm();
            for (std::size_t i = 0; i < seg.size(); ++i) {
                const Vec2 x = pa + (pb - pa) * seg.bary[i][0];
                s += len * seg.weights[i] * sys.vnorm_trace_density(state_at(K, x));
            }
        }
    }
    return s;
}

}  // namespace fosls::systems
