#pragma once

// Marking strategies satisfying the abstract marking assumption and the
// Solve-Estimate-Mark-Refine driver.

#include <functional>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "fosls/lsq.hpp"

namespace fosls::adapt {

using systems::ProductSpace;
using systems::SystemOperator;

// minimal-cardinality set M with sum_{K in M} eta_K^2 >= theta * sum eta_K^2,
// greedy over sorted eta, ties by element index
std::set<int> mark_doerfler(const std::vector<double>& eta, double theta);

// {K : eta_K >= sigma * max eta}; empty for all-zero eta
std::set<int> mark_maximum(const std::vector<double>& eta, double sigma);

struct MarkingConfig {
    enum class Strategy { Doerfler, Maximum, Uniform } strategy = Strategy::Doerfler;
    double parameter = 0.5;
};

struct StopCriteria {
    double eta_tol = 0.0;
    int max_levels = 10;
    int max_ndof = 1 << 22;
};

struct LevelRecord {
    int level = 0;
    int ndof = 0;
    double eta = 0;
    std::vector<double> eta_per_element;
    std::optional<double> error;  // exact V-norm error when available
    double seconds = 0;
};

struct ConvergenceRecord {
    std::vector<LevelRecord> levels;
    std::vector<mesh::SimplicialMesh> meshes;  // per level when keep_meshes
    bool solver_failed = false;
    std::string failure;

    std::string to_csv() const;
    // least-squares slope of log eta vs log ndof over the last `window` levels
    double rate_estimate(int window = 4) const;
};

struct AfemOptions {
    MarkingConfig marking;
    StopCriteria stop;
    lsq::SolveOptions solver;
    int quad_degree = -1;
    bool keep_meshes = false;
    bool keep_elementwise = false;
    // exact solution hook for error tracking
    std::function<systems::StateEval(mesh::Vec2)> exact;
};

ConvergenceRecord afem_run(const SystemOperator&, fespace::ProblemTag,
                           const mesh::SimplicialMesh& mesh0, const AfemOptions&);

}  // namespace fosls::adapt
