#include "occlab/transport.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>

namespace occlab {

namespace {

Space metric_space(Metric m) { return m == Metric::TorusFlat ? Space::Torus : Space::Euclidean; }

double log_sum_exp(const double* v, std::size_t n, std::size_t stride) {
  double mx = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < n; ++k) mx = std::max(mx, v[k * stride]);
  if (!std::isfinite(mx)) return mx;
  double s = 0;
  for (std::size_t k = 0; k < n; ++k) s += std::exp(v[k * stride] - mx);
  return mx + std::log(s);
}

}  // namespace

void validate_problem(const TransportProblem& pb) {
  if (!(pb.p > 0)) throw std::invalid_argument("exponent p must be > 0");
  if (!pb.source.empty() && !pb.target.empty() && pb.source.dim() != pb.target.dim())
    throw std::invalid_argument("dimension mismatch");
  double a = pb.source.total_mass(), b = pb.target.total_mass();
  if (std::abs(a - b) > 1e-9 * std::max({a, b, 0.0}))
    throw std::invalid_argument("source and target masses differ: transport cost is infinite");
}

std::vector<double> cost_matrix(const TransportProblem& pb) {
  const std::size_t m = pb.source.size(), n = pb.target.size();
  std::vector<double> C(m * n);
  const Space sp = metric_space(pb.metric);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j)
      C[i * n + j] = std::pow(distance(sp, pb.source.position(i), pb.target.position(j)), pb.p);
  return C;
}

double wasserstein_bruteforce(const TransportProblem& pb) {
  validate_problem(pb);
  const std::size_t n = pb.source.size();
  if (n == 0 || n != pb.target.size() || n > 8)
    throw std::invalid_argument("brute force needs equal counts 1 <= n <= 8");
  const double m0 = pb.source.mass(0);
  for (std::size_t i = 0; i < n; ++i)
    if (std::abs(pb.source.mass(i) - m0) > 1e-12 * m0 || std::abs(pb.target.mass(i) - m0) > 1e-12 * m0)
      throw std::invalid_argument("brute force needs equal masses");
  auto C = cost_matrix(pb);
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  double best = std::numeric_limits<double>::infinity();
  do {
    double s = 0;
    for (std::size_t i = 0; i < n; ++i) s += C[i * n + perm[i]];
    best = std::min(best, s);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return m0 * best;
}

std::vector<double> default_epsilon_schedule(const std::vector<double>& costs) {
  std::vector<double> c = costs;
  if (c.empty()) return {1.0};
  std::nth_element(c.begin(), c.begin() + c.size() / 2, c.end());
  double med = c[c.size() / 2];
  if (!(med > 0)) {
    med = *std::max_element(costs.begin(), costs.end());
    if (!(med > 0)) med = 1.0;
  }
  std::vector<double> s;
  const int stages = 8;
  for (int k = 0; k < stages; ++k) s.push_back(med * std::pow(1e-3, static_cast<double>(k) / (stages - 1)));
  return s;
}

namespace {

struct SinkhornOutcome {
  double primal = 0;
  double dual = 0;
  double violation = 0;
  std::size_t iterations = 0;
  bool converged = true;
  std::vector<double> stage_costs;
};

// Plan-rounding onto the exact marginals (rows scaled down, columns scaled
// down, then the rank-one correction).
double rounded_cost(const std::vector<double>& P0, const std::vector<double>& C,
                    const std::vector<double>& a, const std::vector<double>& b) {
  const std::size_t m = a.size(), n = b.size();
  std::vector<double> P = P0, r(m, 0.0), c(n, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    double s = 0;
    for (std::size_t j = 0; j < n; ++j) s += P[i * n + j];
    double x = s > a[i] ? a[i] / s : 1.0;
    for (std::size_t j = 0; j < n; ++j) P[i * n + j] *= x;
  }
  for (std::size_t j = 0; j < n; ++j) {
    double s = 0;
    for (std::size_t i = 0; i < m; ++i) s += P[i * n + j];
    double y = s > b[j] ? b[j] / s : 1.0;
    for (std::size_t i = 0; i < m; ++i) P[i * n + j] *= y;
  }
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) r[i] += P[i * n + j], c[j] += P[i * n + j];
  double er_sum = 0;
  std::vector<double> er(m), ec(n);
  for (std::size_t i = 0; i < m; ++i) er[i] = std::max(0.0, a[i] - r[i]), er_sum += er[i];
  for (std::size_t j = 0; j < n; ++j) ec[j] = std::max(0.0, b[j] - c[j]);
  double cost = 0;
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      double v = P[i * n + j];
      if (er_sum > 0) v += er[i] * ec[j] / er_sum;
      cost += v * C[i * n + j];
    }
  return cost;
}

SinkhornOutcome sinkhorn(const std::vector<double>& C, const std::vector<double>& a,
                         const std::vector<double>& b, const std::vector<double>& schedule,
                         const EntropicOptions& opt) {
  const std::size_t m = a.size(), n = b.size();
  std::vector<double> la(m), lb(n), f(m, 0.0), g(n, 0.0), buf(std::max(m, n));
  double total = 0;
  for (std::size_t i = 0; i < m; ++i) la[i] = std::log(a[i]), total += a[i];
  for (std::size_t j = 0; j < n; ++j) lb[j] = std::log(b[j]);
  SinkhornOutcome out;
  std::vector<double> P(m * n);
  for (double eps : schedule) {
    bool stage_ok = false;
    double viol = 0;
    for (std::size_t it = 0; it < opt.max_iter; ++it) {
      ++out.iterations;
      for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < n; ++j) buf[j] = lb[j] + (g[j] - C[i * n + j]) / eps;
        f[i] = -eps * log_sum_exp(buf.data(), n, 1);
      }
      for (std::size_t j = 0; j < n; ++j) {
        for (std::size_t i = 0; i < m; ++i) buf[i] = la[i] + (f[i] - C[i * n + j]) / eps;
        g[j] = -eps * log_sum_exp(buf.data(), m, 1);
      }
      if (it % 5 == 4 || it + 1 == opt.max_iter) {
        viol = 0;
        for (std::size_t i = 0; i < m; ++i) {
          double s = 0;
          for (std::size_t j = 0; j < n; ++j) s += std::exp(la[i] + lb[j] + (f[i] + g[j] - C[i * n + j]) / eps);
          viol += std::abs(s - a[i]);
        }
        if (viol <= opt.tol * total) {
          stage_ok = true;
          break;
        }
      }
    }
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < n; ++j)
        P[i * n + j] = std::exp(la[i] + lb[j] + (f[i] + g[j] - C[i * n + j]) / eps);
    out.stage_costs.push_back(rounded_cost(P, C, a, b));
    out.violation = viol;
    out.converged = stage_ok;
  }
  out.primal = out.stage_costs.back();
  // c-transform gives a feasible dual pair, hence a lower bound.
  double dual = 0;
  for (std::size_t i = 0; i < m; ++i) dual += a[i] * f[i];
  for (std::size_t j = 0; j < n; ++j) {
    double gt = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < m; ++i) gt = std::min(gt, C[i * n + j] - f[i]);
    dual += b[j] * gt;
  }
  out.dual = dual;
  return out;
}

struct Compact {
  std::vector<double> a, b, C;
};

Compact compact_problem(const WeightedAtoms& s, const WeightedAtoms& t, double p, Metric metric) {
  Compact c;
  std::vector<std::size_t> si, tj;
  for (std::size_t i = 0; i < s.size(); ++i)
    if (s.mass(i) > 0) si.push_back(i), c.a.push_back(s.mass(i));
  for (std::size_t j = 0; j < t.size(); ++j)
    if (t.mass(j) > 0) tj.push_back(j), c.b.push_back(t.mass(j));
  const Space sp = metric_space(metric);
  c.C.resize(si.size() * tj.size());
  for (std::size_t i = 0; i < si.size(); ++i)
    for (std::size_t j = 0; j < tj.size(); ++j)
      c.C[i * tj.size() + j] = std::pow(distance(sp, s.position(si[i]), t.position(tj[j])), p);
  return c;
}

}  // namespace

EntropicResult wasserstein_entropic(const TransportProblem& pb, const EntropicOptions& opt) {
  auto t0 = std::chrono::steady_clock::now();
  validate_problem(pb);
  EntropicResult res;
  res.report.solver = "sinkhorn_log";
  Compact ab = compact_problem(pb.source, pb.target, pb.p, pb.metric);
  if (ab.a.empty() || ab.b.empty()) return res;
  std::vector<double> schedule = opt.epsilon_schedule.empty() ? default_epsilon_schedule(ab.C) : opt.epsilon_schedule;
  for (std::size_t k = 0; k < schedule.size(); ++k) {
    if (!(schedule[k] > 0)) throw std::invalid_argument("epsilon must be > 0");
    if (k && !(schedule[k] < schedule[k - 1])) throw std::invalid_argument("schedule must be strictly decreasing");
  }
  res.schedule = schedule;
  auto out = sinkhorn(ab.C, ab.a, ab.b, schedule, opt);
  res.stage_costs = out.stage_costs;
  double cost = out.primal;
  if (opt.debias) {
    Compact aa = compact_problem(pb.source, pb.source, pb.p, pb.metric);
    Compact bb = compact_problem(pb.target, pb.target, pb.p, pb.metric);
    auto oa = sinkhorn(aa.C, aa.a, aa.b, schedule, opt);
    auto ob = sinkhorn(bb.C, bb.a, bb.b, schedule, opt);
    cost = out.primal - 0.5 * (oa.primal + ob.primal);
  }
  res.cost = cost;
  res.report.cost = cost;
  res.report.gap = std::max(0.0, out.primal - out.dual);
  res.report.iterations = out.iterations;
  res.report.converged = out.converged;
  res.report.marginal_violation = out.violation;
  res.report.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  return res;
}

UniformCost wasserstein_to_uniform(const WeightedAtoms& mu, const Domain& omega, double p,
                                   int grid_n, SolverChoice solver, const ExactOptions& exact,
                                   const EntropicOptions& entropic) {
  UniformCost out;
  WeightedAtoms src = restrict_measure(mu, omega);
  out.mass = src.total_mass();
  out.source_atoms = src.size();
  if (out.mass <= 0) return out;
  auto grid = uniform_discretization(omega, grid_n);
  grid.atoms.scale_masses(out.mass / grid.atoms.total_mass());
  out.target_atoms = grid.atoms.size();
  const double cell_diam = grid.cell_side * std::sqrt(static_cast<double>(omega.dim()));
  out.discretization_bound = std::pow(cell_diam, p) * out.mass;
  TransportProblem pb{std::move(src), std::move(grid.atoms), p,
                      omega.space() == Space::Torus ? Metric::TorusFlat : Metric::Euclidean};
  if (solver == SolverChoice::Exact) {
    auto [plan, rep] = wasserstein_exact(pb, exact);
    out.cost = plan.cost;
    out.report = rep;
  } else {
    auto r = wasserstein_entropic(pb, entropic);
    out.cost = r.cost;
    out.report = r.report;
  }
  return out;
}

WeightedAtoms merge_measures(const WeightedAtoms& a, const WeightedAtoms& b) {
  if (a.dim() != b.dim() || a.space() != b.space()) throw std::invalid_argument("incompatible measures");
  WeightedAtoms out(a.dim(), a.space());
  out.reserve(a.size() + b.size());
  for (std::size_t i = 0; i < a.size(); ++i) out.add(a.position(i), a.mass(i));
  for (std::size_t i = 0; i < b.size(); ++i) out.add(b.position(i), b.mass(i));
  return out;
}

SubadditivityCheck check_subadditivity(const WeightedAtoms& mu1, const WeightedAtoms& mu2,
                                       const WeightedAtoms& lambda1, const WeightedAtoms& lambda2,
                                       double p, Metric metric) {
  TransportProblem p1{mu1, lambda1, p, metric}, p2{mu2, lambda2, p, metric};
  validate_problem(p1);
  validate_problem(p2);
  TransportProblem joint{merge_measures(mu1, mu2), merge_measures(lambda1, lambda2), p, metric};
  SubadditivityCheck c;
  c.parts = wasserstein_exact(p1).first.cost + wasserstein_exact(p2).first.cost;
  c.joint = wasserstein_exact(joint).first.cost;
  c.slack = c.parts - c.joint;
  c.holds = c.joint <= c.parts + 1e-9;
  return c;
}

}  // namespace occlab
