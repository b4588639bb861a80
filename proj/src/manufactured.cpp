#include "fosls/manufactured.hpp"

#include <cmath>
#include <stdexcept>

namespace fosls::manufactured {

using fespace::ProblemTag;
using fespace::ShapeEval;
using mesh::Vec2;
using systems::Field;
using systems::StateEval;

namespace {

const double PI = std::acos(-1.0);

Manufactured poisson_sine() {
    Manufactured m;
    m.tag = ProblemTag::Poisson;
    m.name = "poisson_sine";
    m.exact = [](Vec2 p) {
        StateEval st;
        st.f.resize(2);
        const double sx = std::sin(PI * p.x), sy = std::sin(PI * p.y);
        const double cx = std::cos(PI * p.x), cy = std::cos(PI * p.y);
        ShapeEval u;
        u.ncomp = 1;
        u.value[0] = sx * sy;
        u.grad[0] = PI * cx * sy;
        u.grad[1] = PI * sx * cy;
        ShapeEval sg;
        sg.ncomp = 2;
        sg.value[0] = PI * cx * sy;
        sg.value[1] = PI * sx * cy;
        sg.div = -2.0 * PI * PI * sx * sy;
        st.f = {u, sg};
        return st;
    };
    m.factor_fields = {
        [](Vec2 p, double* out) { out[0] = std::sin(PI * p.x) * std::sin(PI * p.y); },
        [](Vec2 p, double* out) {
            out[0] = PI * std::cos(PI * p.x) * std::sin(PI * p.y);
            out[1] = PI * std::sin(PI * p.x) * std::cos(PI * p.y);
        }};
    m.make_system = [] {
        Field f{[](Vec2 p) {
                    return 2.0 * PI * PI * std::sin(PI * p.x) * std::sin(PI * p.y);
                },
                -1};
        return systems::poisson_helmholtz(0.0, f);
    };
    return m;
}

// coordinates (t, x)
Manufactured heat_decay() {
    Manufactured m;
    m.tag = ProblemTag::Heat;
    m.name = "heat_decay";
    m.exact = [](Vec2 p) {
        const double t = p.x, x = p.y;
        const double e = std::exp(-PI * PI * t);
        StateEval st;
        ShapeEval u1;
        u1.ncomp = 1;
        u1.value[0] = e * std::sin(PI * x);
        u1.grad[0] = -PI * PI * e * std::sin(PI * x);
        u1.grad[1] = PI * e * std::cos(PI * x);
        ShapeEval u2;  // u2 = -dx u1
        u2.ncomp = 1;
        u2.value[0] = -PI * e * std::cos(PI * x);
        u2.grad[0] = PI * PI * PI * e * std::cos(PI * x);
        u2.grad[1] = PI * PI * e * std::sin(PI * x);
        st.f = {u1, u2};
        return st;
    };
    m.factor_fields = {
        [](Vec2 p, double* out) { out[0] = std::exp(-PI * PI * p.x) * std::sin(PI * p.y); },
        [](Vec2 p, double* out) {
            out[0] = -PI * std::exp(-PI * PI * p.x) * std::cos(PI * p.y);
        }};
    m.make_system = [] {
        Field u0{[](Vec2 p) { return std::sin(PI * p.y); }, -1};
        return systems::heat(Field::constant(1.0), Field::zero(), Field::zero(),
                             Field::zero(), u0);
    };
    return m;
}

// standing wave from u = cos(pi t) sin(pi x): v = du/dt, sigma = du/dx
Manufactured wave_standing() {
    Manufactured m;
    m.tag = ProblemTag::Wave;
    m.name = "wave_standing";
    m.exact = [](Vec2 p) {
        const double t = p.x, x = p.y;
        StateEval st;
        ShapeEval v;
        v.ncomp = 1;
        v.value[0] = -PI * std::sin(PI * t) * std::sin(PI * x);
        v.grad[0] = -PI * PI * std::cos(PI * t) * std::sin(PI * x);
        v.grad[1] = -PI * PI * std::sin(PI * t) * std::cos(PI * x);
        ShapeEval s;
        s.ncomp = 1;
        s.value[0] = PI * std::cos(PI * t) * std::cos(PI * x);
        s.grad[0] = -PI * PI * std::sin(PI * t) * std::cos(PI * x);
        s.grad[1] = -PI * PI * std::cos(PI * t) * std::sin(PI * x);
        st.f = {v, s};
        return st;
    };
    m.factor_fields = {
        [](Vec2 p, double* out) {
            out[0] = -PI * std::sin(PI * p.x) * std::sin(PI * p.y);
        },
        [](Vec2 p, double* out) {
            out[0] = PI * std::cos(PI * p.x) * std::cos(PI * p.y);
        }};
    m.make_system = [] {
        Field v0 = Field::zero();
        Field s0{[](Vec2 p) { return PI * std::cos(PI * p.y); }, -1};
        return systems::wave(Field::zero(), Field::zero(), v0, s0);
    };
    return m;
}

}  // namespace

bool known(const std::string& name) {
    return name == "poisson_sine" || name == "heat_decay" || name == "wave_standing";
}

Manufactured get(const std::string& name) {
    if (name == "poisson_sine") return poisson_sine();
    if (name == "heat_decay") return heat_decay();
    if (name == "wave_standing") return wave_standing();
    throw std::invalid_argument("unknown manufactured solution: " + name);
}

}  // namespace fosls::manufactured
