// Copyright 2026 The pseudomode authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <atomic>
#include <cmath>
#include <functional>
#include <limits>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <thread>
#include <vector>

#include "pseudomode/entanglement.hpp"
#include "pseudomode/errors.hpp"
#include "pseudomode/hilbert.hpp"
#include "pseudomode/model.hpp"
#include "pseudomode/propagate.hpp"

// Concurrence-versus-time experiments: prepared two-atom states evolved under
// one of the three reservoir backends, reduced to the bare basis, and fed to
// the X-state concurrence. Death intervals are windows where both closed-form
// branches are negative; their endpoints are refined by bisecting a fresh
// propagation from t = 0, not by interpolating grid samples.

namespace pseudomode {

// Off-X leakage above this is a pipeline defect, not physics: the generators
// here cannot couple the X pattern to the rest.
inline constexpr double kXFormTol = 1e-10;

enum class StateFamily { kEntangled, kFactorized };

inline const char* family_name(StateFamily f) {
  return f == StateFamily::kEntangled ? "entangled" : "factorized";
}

inline StateFamily family_from_name(const std::string& name) {
  if (name == "entangled") return StateFamily::kEntangled;
  if (name == "factorized") return StateFamily::kFactorized;
  throw ConfigError("family: unknown value '" + name +
                    "' (expected entangled or factorized)");
}

struct InitialStateSpec {
  StateFamily family = StateFamily::kEntangled;
  double alpha_sq = 0.1;  // weight of |00> (entangled) or per-atom ground weight (factorized)
  double theta = 0.0;     // relative phase, entangled family only
};

namespace detail {
inline void check_alpha_sq(double alpha_sq, const char* where) {
  if (!(alpha_sq >= 0.0 && alpha_sq <= 1.0))
    throw std::invalid_argument(std::string(where) + ": alpha_sq must lie in [0,1], got " +
                                std::to_string(alpha_sq));
}
}  // namespace detail

// Pure superposition sqrt(alpha_sq)|00> + e^{i theta} sqrt(1-alpha_sq)|11>.
inline ComplexMatrix initial_entangled(double alpha_sq, double theta = 0.0) {
  detail::check_alpha_sq(alpha_sq, "initial_entangled");
  ComplexVector psi = ComplexVector::Zero(4);
  psi(basis::kGG) = std::sqrt(alpha_sq);
  psi(basis::kEE) = std::polar(std::sqrt(1.0 - alpha_sq), theta);
  return psi * psi.adjoint();
}

// Product of two identical diagonal one-atom states with ground weight
// alpha_sq: diag(alpha^4, alpha^2 beta^2, alpha^2 beta^2, beta^4).
inline ComplexMatrix initial_factorized(double alpha_sq) {
  detail::check_alpha_sq(alpha_sq, "initial_factorized");
  ComplexMatrix one = ComplexMatrix::Zero(2, 2);
  one(0, 0) = alpha_sq;
  one(1, 1) = 1.0 - alpha_sq;
  return two_qubit_op(one, one);
}

inline ComplexMatrix initial_state(const InitialStateSpec& spec) {
  return spec.family == StateFamily::kEntangled
             ? initial_entangled(spec.alpha_sq, spec.theta)
             : initial_factorized(spec.alpha_sq);
}

// Bare atomic state -> dressed basis, tensored with the mode vacuum.
inline ComplexMatrix embed_with_mode_vacuum(const ComplexMatrix& rho_bare, int fock_dim) {
  if (rho_bare.rows() != 4 || rho_bare.cols() != 4)
    throw std::invalid_argument("embed_with_mode_vacuum: expected a 4x4 atomic state");
  return kron(to_dressed(rho_bare), ket_bra(fock_dim, 0, 0));
}

struct ConcurrenceTrace {
  TimeGrid grid;
  std::vector<double> c;          // concurrence
  std::vector<double> c1;         // outer-coherence branch (NaN off the X pipeline)
  std::vector<double> c2;         // inner-coherence branch (NaN off the X pipeline)
  std::vector<double> pop_minus;  // subradiant population <-|rho|->
  std::vector<double> trace_err;  // |tr rho - 1| of the propagated state
  bool x_form_pipeline = true;
  double max_off_x = 0.0;  // largest off-X magnitude seen in the reduced state
  int warn_count = 0;
};

namespace detail {

struct ReducedPoint {
  ComplexMatrix bare;     // 4x4 bare-basis atomic state
  ComplexMatrix dressed;  // same state, dressed basis
  StateDiagnostics diag;
};

inline void append_point(ConcurrenceTrace& trace, const ReducedPoint& pt, bool x_pipeline,
                         double x_tol) {
  const XFormCheck xc = is_x_form(pt.bare, x_tol);
  trace.max_off_x = std::max(trace.max_off_x, xc.max_off_x);
  if (x_pipeline) {
    if (!xc.is_x_form)
      throw ValidationError("run_trace: X form broken (off-pattern magnitude " +
                            std::to_string(xc.max_off_x) + ")");
    const XConcurrence xb = concurrence_x_branches(x_state_from_matrix(pt.bare));
    trace.c.push_back(xb.value);
    trace.c1.push_back(xb.c1);
    trace.c2.push_back(xb.c2);
  } else {
    trace.c.push_back(concurrence_general(pt.bare));
    trace.c1.push_back(std::numeric_limits<double>::quiet_NaN());
    trace.c2.push_back(std::numeric_limits<double>::quiet_NaN());
  }
  trace.pop_minus.push_back(pt.dressed(basis::kSub, basis::kSub).real());
  trace.trace_err.push_back(pt.diag.trace_error);
}

}  // namespace detail

// Precomputed propagation machinery for one (params, backend, grid) triple.
// Sharing one engine across initial states amortizes the expensive pieces:
// the step propagator for the common backends, the per-point pair maps for
// independent reservoirs. Safe to use from several threads concurrently.
class TraceEngine {
 public:
  TraceEngine(const ModelParams& params, Backend backend, const TimeGrid& grid,
              const ValidationOptions& opt = {})
      : params_(params), backend_(backend), grid_(grid), opt_(opt) {
    params_.validate();
    grid_.validate();
    switch (backend_) {
      case Backend::kCommonStructured: {
        const Liouvillian l = liouvillian_common_structured(params_);
        fock_dim_ = l.fock_dim;
        dim_ = l.dim;
        step_ = expm(l.matrix * grid_.dt());
        if (grid_.t_start > 0.0) start_ = expm(l.matrix * grid_.t_start);
        break;
      }
      case Backend::kCommonMarkov: {
        const Liouvillian l = liouvillian_common_markov(params_.gamma0());
        fock_dim_ = 0;
        dim_ = l.dim;
        step_ = expm(l.matrix * grid_.dt());
        if (grid_.t_start > 0.0) start_ = expm(l.matrix * grid_.t_start);
        break;
      }
      case Backend::kIndependent: {
        const Liouvillian l = liouvillian_single_qubit_structured(params_);
        const ComplexMatrix step = expm(l.matrix * grid_.dt());
        std::array<ComplexVector, 4> dyads = single_qubit_basis_states(params_.fock_dim());
        if (grid_.t_start > 0.0) {
          const ComplexMatrix to_start = expm(l.matrix * grid_.t_start);
          for (auto& d : dyads) d = to_start * d;
        }
        pair_maps_.reserve(grid_.n_points);
        for (int k = 0; k < grid_.n_points; ++k) {
          pair_maps_.push_back(
              pair_map_from_single(single_qubit_map_from_states(dyads, params_.fock_dim())));
          if (k + 1 < grid_.n_points)
            for (auto& d : dyads) d = step * d;
        }
        break;
      }
    }
  }

  const TimeGrid& grid() const { return grid_; }
  const ModelParams& params() const { return params_; }
  Backend backend() const { return backend_; }

  ConcurrenceTrace run(const ComplexMatrix& rho0_bare) const {
    validate_density_matrix(rho0_bare, opt_, 0, "run_trace: initial state");
    const bool x_pipeline = is_x_form(rho0_bare, kXFormTol).is_x_form;
    ConcurrenceTrace trace;
    trace.grid = grid_;
    trace.x_form_pipeline = x_pipeline;
    reserve(trace);

    if (backend_ == Backend::kIndependent) {
      const ComplexVector v0 = vec(rho0_bare);
      for (int k = 0; k < grid_.n_points; ++k) {
        detail::ReducedPoint pt;
        pt.bare = unvec(pair_maps_[k] * v0, 4);
        pt.diag = validate_density_matrix(pt.bare, opt_, 0, "run_trace");
        if (classify(pt.diag, opt_) == ValidationLevel::kWarn) ++trace.warn_count;
        pt.dressed = to_dressed(pt.bare);
        detail::append_point(trace, pt, x_pipeline, kXFormTol);
      }
      return trace;
    }

    ComplexVector v = backend_ == Backend::kCommonStructured
                          ? vec(embed_with_mode_vacuum(rho0_bare, fock_dim_))
                          : vec(rho0_bare);
    if (start_.size() > 0) v = start_ * v;
    for (int k = 0; k < grid_.n_points; ++k) {
      const ComplexMatrix full = unvec(v, dim_);
      detail::ReducedPoint pt;
      pt.diag = validate_density_matrix(full, opt_, fock_dim_, "run_trace");
      if (classify(pt.diag, opt_) == ValidationLevel::kWarn) ++trace.warn_count;
      if (backend_ == Backend::kCommonStructured) {
        pt.dressed = partial_trace_pseudomode(full, fock_dim_);
        pt.bare = to_bare(pt.dressed);
      } else {
        pt.bare = full;
        pt.dressed = to_dressed(pt.bare);
      }
      detail::append_point(trace, pt, x_pipeline, kXFormTol);
      if (k + 1 < grid_.n_points) v = step_ * v;
    }
    return trace;
  }

 private:
  void reserve(ConcurrenceTrace& trace) const {
    trace.c.reserve(grid_.n_points);
    trace.c1.reserve(grid_.n_points);
    trace.c2.reserve(grid_.n_points);
    trace.pop_minus.reserve(grid_.n_points);
    trace.trace_err.reserve(grid_.n_points);
  }

  ModelParams params_;
  Backend backend_;
  TimeGrid grid_;
  ValidationOptions opt_;
  Eigen::Index dim_ = 0;
  int fock_dim_ = 0;
  ComplexMatrix step_;
  ComplexMatrix start_;
  std::vector<ComplexMatrix> pair_maps_;  // independent backend, one per grid point
};

inline ConcurrenceTrace run_trace_from_state(const ComplexMatrix& rho0_bare,
                                             const ModelParams& params, Backend backend,
                                             const TimeGrid& grid,
                                             const ValidationOptions& opt = {}) {
  return TraceEngine(params, backend, grid, opt).run(rho0_bare);
}

inline ConcurrenceTrace run_trace(const InitialStateSpec& spec, const ModelParams& params,
                                  Backend backend, const TimeGrid& grid,
                                  const ValidationOptions& opt = {}) {
  return run_trace_from_state(initial_state(spec), params, backend, grid, opt);
}

// Same pipeline with the adaptive integrator instead of the step propagator;
// the two routes share no numerics. For independent reservoirs the four
// single-qubit dyads are integrated (they are not density matrices, so the
// raw segment integrator is used directly).
inline ConcurrenceTrace run_trace_rk(const ComplexMatrix& rho0_bare, const ModelParams& params,
                                     Backend backend, const TimeGrid& grid, double rtol = 1e-10,
                                     double atol = 1e-12, const ValidationOptions& opt = {}) {
  params.validate();
  grid.validate();
  validate_density_matrix(rho0_bare, opt, 0, "run_trace_rk: initial state");
  const bool x_pipeline = is_x_form(rho0_bare, kXFormTol).is_x_form;
  ConcurrenceTrace trace;
  trace.grid = grid;
  trace.x_form_pipeline = x_pipeline;

  if (backend == Backend::kIndependent) {
    const Liouvillian l = liouvillian_single_qubit_structured(params);
    std::array<ComplexVector, 4> dyads = single_qubit_basis_states(params.fock_dim());
    std::array<ComplexVector, 4> k1;
    std::array<bool, 4> k1_valid{false, false, false, false};
    const double norm1 = l.matrix.cwiseAbs().colwise().sum().maxCoeff();
    const double h_max =
        norm1 > 0.0 ? 1.5 / norm1 : std::numeric_limits<double>::infinity();
    std::array<double, 4> h;
    h.fill(std::min(grid.dt() / 4.0, h_max));
    const ComplexVector v0 = vec(rho0_bare);
    for (int k = 0; k < grid.n_points; ++k) {
      const double t_prev = k == 0 ? 0.0 : grid.at(k - 1);
      const double t_here = grid.at(k);
      for (int d = 0; d < 4; ++d)
        detail::dopri5_advance(l.matrix, dyads[d], t_prev, t_here, rtol, atol, h_max, h[d],
                               k1[d], k1_valid[d]);
      const ComplexMatrix pair =
          pair_map_from_single(single_qubit_map_from_states(dyads, params.fock_dim()));
      detail::ReducedPoint pt;
      pt.bare = unvec(pair * v0, 4);
      pt.diag = validate_density_matrix(pt.bare, opt, 0, "run_trace_rk");
      if (classify(pt.diag, opt) == ValidationLevel::kWarn) ++trace.warn_count;
      pt.dressed = to_dressed(pt.bare);
      detail::append_point(trace, pt, x_pipeline, kXFormTol);
    }
    return trace;
  }

  const bool structured = backend == Backend::kCommonStructured;
  const Liouvillian l = structured ? liouvillian_common_structured(params)
                                   : liouvillian_common_markov(params.gamma0());
  const ComplexMatrix rho0_full =
      structured ? embed_with_mode_vacuum(rho0_bare, l.fock_dim) : rho0_bare;
  const Trajectory traj = propagate_rk(l, rho0_full, grid, rtol, atol, opt);
  trace.warn_count = traj.warn_count;
  for (int k = 0; k < grid.n_points; ++k) {
    detail::ReducedPoint pt;
    pt.diag = traj.diagnostics[k];
    if (structured) {
      pt.dressed = partial_trace_pseudomode(traj.states[k], l.fock_dim);
      pt.bare = to_bare(pt.dressed);
    } else {
      pt.bare = traj.states[k];
      pt.dressed = to_dressed(pt.bare);
    }
    detail::append_point(trace, pt, x_pipeline, kXFormTol);
  }
  return trace;
}

// max(C1, C2) of the reduced state at time t, computed by a fresh propagation
// from t = 0 (one matrix exponential per call). Used to refine interval
// endpoints without trusting grid interpolation.
using BranchEvaluator = std::function<double(double)>;

inline BranchEvaluator make_evaluator(const ComplexMatrix& rho0_bare, const ModelParams& params,
                                      Backend backend) {
  params.validate();
  if (!is_x_form(rho0_bare, kXFormTol).is_x_form)
    throw std::invalid_argument("make_evaluator: initial state is not X-shaped");

  if (backend == Backend::kIndependent) {
    const auto l = std::make_shared<const Liouvillian>(liouvillian_single_qubit_structured(params));
    const ComplexVector v0 = vec(rho0_bare);
    const int nf = params.fock_dim();
    return [l, v0, nf](double t) {
      std::array<ComplexVector, 4> dyads = single_qubit_basis_states(nf);
      const ComplexMatrix prop = expm(l->matrix * t);
      for (auto& d : dyads) d = prop * d;
      const ComplexMatrix pair = pair_map_from_single(single_qubit_map_from_states(dyads, nf));
      const XConcurrence xb =
          concurrence_x_branches(x_state_from_matrix(unvec(pair * v0, 4)));
      return std::max(xb.c1, xb.c2);
    };
  }

  const bool structured = backend == Backend::kCommonStructured;
  const auto l = std::make_shared<const Liouvillian>(
      structured ? liouvillian_common_structured(params)
                 : liouvillian_common_markov(params.gamma0()));
  const ComplexVector v0 =
      structured ? vec(embed_with_mode_vacuum(rho0_bare, l->fock_dim)) : vec(rho0_bare);
  const int nf = l->fock_dim;
  const Eigen::Index dim = l->dim;
  return [l, v0, nf, dim, structured](double t) {
    const ComplexMatrix full = unvec(expm(l->matrix * t) * v0, dim);
    const ComplexMatrix bare =
        structured ? to_bare(partial_trace_pseudomode(full, nf)) : full;
    const XConcurrence xb = concurrence_x_branches(x_state_from_matrix(bare));
    return std::max(xb.c1, xb.c2);
  };
}

// A maximal window with max(C1,C2) < -zero_tol. t_revival is +infinity when
// the window is still open at the end of the grid.
struct DeathInterval {
  double t_death = 0.0;
  double t_revival = std::numeric_limits<double>::infinity();
};

// Scan the branch signal for death windows. With an evaluator the endpoints
// are bisected down to grid.dt()/100 using exact re-propagation; without one
// they are reported at grid resolution (the first dead and first revived
// sample). Intervals come out ordered and disjoint by construction.
inline std::vector<DeathInterval> detect_death_intervals(const ConcurrenceTrace& trace,
                                                         double zero_tol = 1e-9,
                                                         const BranchEvaluator& evaluator = {}) {
  if (!trace.x_form_pipeline)
    throw std::invalid_argument(
        "detect_death_intervals: branch signals require the X-form pipeline");
  const int n = trace.grid.n_points;
  if (static_cast<int>(trace.c1.size()) != n)
    throw std::invalid_argument("detect_death_intervals: trace is incomplete");

  const auto dead = [&](int k) { return std::max(trace.c1[k], trace.c2[k]) < -zero_tol; };
  const double dt = trace.grid.dt();
  const double target = dt / 100.0;

  const auto refine = [&](double lo, double hi, bool dead_side_high) {
    // Invariant: exactly one endpoint is dead; shrink until the bracket is
    // narrower than target, return the midpoint.
    while (hi - lo > target) {
      const double mid = 0.5 * (lo + hi);
      const bool mid_dead = evaluator(mid) < -zero_tol;
      if (mid_dead == dead_side_high)
        hi = mid;
      else
        lo = mid;
    }
    return 0.5 * (lo + hi);
  };

  std::vector<DeathInterval> intervals;
  int k = 0;
  while (k < n) {
    if (!dead(k)) {
      ++k;
      continue;
    }
    const int k0 = k;
    while (k < n && dead(k)) ++k;
    const int k1 = k - 1;  // last dead sample
    DeathInterval w;
    if (k0 == 0)
      w.t_death = trace.grid.t_start;
    else if (evaluator)
      w.t_death = refine(trace.grid.at(k0 - 1), trace.grid.at(k0), true);
    else
      w.t_death = trace.grid.at(k0);
    if (k1 == n - 1)
      w.t_revival = std::numeric_limits<double>::infinity();
    else if (evaluator)
      w.t_revival = refine(trace.grid.at(k1), trace.grid.at(k1 + 1), false);
    else
      w.t_revival = trace.grid.at(k1 + 1);
    intervals.push_back(w);
  }
  return intervals;
}

inline double total_death_duration(const std::vector<DeathInterval>& intervals, double t_end) {
  double total = 0.0;
  for (const auto& w : intervals)
    total += (std::isfinite(w.t_revival) ? w.t_revival : t_end) - w.t_death;
  return total;
}

struct SweepSurface {
  std::vector<double> alpha_sq;
  TimeGrid grid;
  StateFamily family = StateFamily::kEntangled;
  Backend backend = Backend::kCommonStructured;
  ModelParams params;
  double theta = 0.0;
  RealMatrix concurrence;  // rows: alpha_sq, cols: grid points
};

inline std::vector<double> linspace(double a, double b, int n) {
  if (n < 2) throw std::invalid_argument("linspace: need at least two points");
  std::vector<double> v(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i)
    v[static_cast<size_t>(i)] = a + (b - a) * (static_cast<double>(i) / (n - 1));
  return v;
}

// Concurrence surface over (alpha_sq, t). Rows are computed in parallel but
// assembled by index, so the result does not depend on scheduling.
inline SweepSurface sweep(StateFamily family, const std::vector<double>& alpha_sq_values,
                          const ModelParams& params, Backend backend, const TimeGrid& grid,
                          double theta = 0.0, int n_threads = 0,
                          const ValidationOptions& opt = {}) {
  if (alpha_sq_values.empty()) throw std::invalid_argument("sweep: empty alpha_sq grid");
  SweepSurface surface;
  surface.alpha_sq = alpha_sq_values;
  surface.grid = grid;
  surface.family = family;
  surface.backend = backend;
  surface.params = params;
  surface.theta = theta;
  surface.concurrence.resize(static_cast<Eigen::Index>(alpha_sq_values.size()), grid.n_points);

  const TraceEngine engine(params, backend, grid, opt);
  const int rows = static_cast<int>(alpha_sq_values.size());
  int workers = n_threads > 0 ? n_threads
                              : static_cast<int>(std::thread::hardware_concurrency());
  workers = std::max(1, std::min(workers, rows));

  std::atomic<int> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  const auto work = [&]() {
    try {
      for (int row = next.fetch_add(1); row < rows; row = next.fetch_add(1)) {
        InitialStateSpec spec{family, alpha_sq_values[static_cast<size_t>(row)], theta};
        const ConcurrenceTrace trace = engine.run(initial_state(spec));
        for (int k = 0; k < grid.n_points; ++k)
          surface.concurrence(row, k) = trace.c[static_cast<size_t>(k)];
      }
    } catch (...) {
      std::lock_guard<std::mutex> hold(error_mutex);
      if (!first_error) first_error = std::current_exception();
    }
  };

  if (workers == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<size_t>(workers));
    for (int i = 0; i < workers; ++i) pool.emplace_back(work);
    for (auto& th : pool) th.join();
  }
  if (first_error) std::rethrow_exception(first_error);
  return surface;
}

// Long-time reduced atomic state (bare basis) under a common-reservoir
// backend. Independent reservoirs have no single generator here.
inline ComplexMatrix asymptotic_bare_state(const ComplexMatrix& rho0_bare,
                                           const ModelParams& params, Backend backend,
                                           const ValidationOptions& opt = {}) {
  params.validate();
  if (backend == Backend::kIndependent)
    throw std::invalid_argument(
        "asymptotic_bare_state: independent reservoirs have no generator form here");
  if (backend == Backend::kCommonStructured) {
    const Liouvillian l = liouvillian_common_structured(params);
    const ComplexMatrix inf =
        asymptotic_state(l, embed_with_mode_vacuum(rho0_bare, l.fock_dim), opt);
    return to_bare(partial_trace_pseudomode(inf, l.fock_dim));
  }
  const Liouvillian l = liouvillian_common_markov(params.gamma0());
  return asymptotic_state(l, rho0_bare, opt);
}

// Closed-form long-time concurrence of the factorized family in a common
// structured reservoir: the dark weight alpha_sq * (1 - alpha_sq).
inline double asymptotic_concurrence_factorized(double alpha_sq) {
  detail::check_alpha_sq(alpha_sq, "asymptotic_concurrence_factorized");
  return alpha_sq * (1.0 - alpha_sq);
}

}  // namespace pseudomode
