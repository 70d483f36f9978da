#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

#include "attstab/errors.hpp"
#include "attstab/io.hpp"
#include "attstab/model.hpp"
#include "attstab/stability.hpp"

namespace attstab {

/// Window and resolution of a (beta1, beta2) stability map.
struct SweepConfig {
  double b1min = 0.3;
  double b1max = 2.5;
  double b2min = 0.3;
  double b2max = 2.5;
  std::size_t n1 = 400;
  std::size_t n2 = 400;
  double tol = kDefaultTolerance;

  void validate() const {
    if (!(b1min > 0.0) || !(b2min > 0.0)) throw DomainError("beta windows must be positive");
    if (!(b1max > b1min) || !(b2max > b2min)) throw DomainError("beta windows must be non-empty");
    if (n1 == 0 || n2 == 0) throw DomainError("sweep grid needs at least one cell per axis");
    if (tol < 0.0) throw DomainError("tolerance must be >= 0");
  }
};

/// Cell-centre sample points; row 0 is the top (largest beta2) row.
inline SweepCell sweep_cell(const SweepConfig& cfg, std::size_t row, std::size_t col) {
  SweepCell c;
  c.beta1 = cfg.b1min + (static_cast<double>(col) + 0.5) * (cfg.b1max - cfg.b1min) /
                            static_cast<double>(cfg.n1);
  c.beta2 = cfg.b2max - (static_cast<double>(row) + 0.5) * (cfg.b2max - cfg.b2min) /
                            static_cast<double>(cfg.n2);
  c.cls = classify(sigmas_from_beta(c.beta1, c.beta2), cfg.tol);
  return c;
}

/// Classifies every cell with `jobs` worker threads. Each worker owns a
/// strided set of cell indices, so the result does not depend on `jobs`.
inline SweepResult run_sweep(const SweepConfig& cfg, unsigned jobs = 1) {
  cfg.validate();
  if (jobs == 0) throw DomainError("jobs must be >= 1");
  SweepResult r;
  r.n1 = cfg.n1;
  r.n2 = cfg.n2;
  r.cells.resize(cfg.n1 * cfg.n2);
  const std::size_t total = r.cells.size();
  const std::size_t workers = std::min<std::size_t>(jobs, total);

  auto work = [&](std::size_t first) {
    for (std::size_t k = first; k < total; k += workers) {
      r.cells[k] = sweep_cell(cfg, k / cfg.n1, k % cfg.n1);
    }
  };

  if (workers == 1) {
    work(0);
    return r;
  }
  std::vector<std::exception_ptr> errors(workers);
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        work(w);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return r;
}

}  // namespace attstab
