#pragma once

// Built-in closed-form solutions for convergence studies and error tracking.

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "fosls/systems.hpp"

namespace fosls::manufactured {

struct Manufactured {
    fespace::ProblemTag tag;
    std::string name;
    // exact state with first-order derivative data, per product factor
    std::function<systems::StateEval(mesh::Vec2)> exact;
    // component fields per factor, for interpolation (value[ncomp])
    std::vector<std::function<void(mesh::Vec2, double*)>> factor_fields;
    std::function<std::unique_ptr<systems::SystemOperator>()> make_system;
};

// names: poisson_sine, heat_decay, wave_standing
Manufactured get(const std::string& name);
bool known(const std::string& name);

}  // namespace fosls::manufactured
