#include "kyleot/transport_oracle.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "kyleot/gauss_hermite.hpp"

namespace kyleot {
namespace {

constexpr int kMaxAtoms = 12;

struct Cell {
  int i, j;
};

// Locate the unique alternating cycle closed by `entering` through the basis
// tree: bipartite BFS from the entering cell's row to its column.
std::vector<Cell> find_cycle(const std::vector<Cell>& basis, Cell entering, int rows, int cols) {
  // parent edge index for row nodes [0, rows) and col nodes [rows, rows+cols)
  std::vector<int> parent_edge(rows + cols, -1);
  std::vector<int> parent_node(rows + cols, -1);
  std::vector<char> seen(rows + cols, 0);
  std::vector<int> queue{entering.i};
  seen[entering.i] = 1;
  for (std::size_t qi = 0; qi < queue.size(); ++qi) {
    const int node = queue[qi];
    for (std::size_t e = 0; e < basis.size(); ++e) {
      const int r = basis[e].i, c = rows + basis[e].j;
      int next = -1;
      if (node == r && !seen[c]) next = c;
      else if (node == c && !seen[r]) next = r;
      if (next >= 0) {
        seen[next] = 1;
        parent_edge[next] = static_cast<int>(e);
        parent_node[next] = node;
        queue.push_back(next);
      }
    }
  }
  const int target = rows + entering.j;
  if (!seen[target]) throw std::logic_error("transport simplex: basis is not connected");
  std::vector<Cell> cycle{entering};
  for (int node = target; node != entering.i; node = parent_node[node]) cycle.push_back(basis[parent_edge[node]]);
  return cycle;  // alternating: even positions gain, odd positions lose
}

}  // namespace

DiscreteCoupling solve_discrete_ot(const std::vector<std::vector<double>>& surplus,
                                   const std::vector<double>& mu_w, const std::vector<double>& nu_w) {
  const int rows = static_cast<int>(mu_w.size());
  const int cols = static_cast<int>(nu_w.size());
  if (rows == 0 || cols == 0) throw std::invalid_argument("discrete ot: empty marginal");
  if (rows > kMaxAtoms || cols > kMaxAtoms) throw std::invalid_argument("discrete ot: more than 12 atoms per marginal");
  if (static_cast<int>(surplus.size()) != rows) throw std::invalid_argument("discrete ot: surplus rows mismatch");
  for (const auto& r : surplus)
    if (static_cast<int>(r.size()) != cols) throw std::invalid_argument("discrete ot: surplus cols mismatch");

  double mass_mu = 0.0, mass_nu = 0.0, scale = 0.0;
  for (double w : mu_w) {
    if (w < 0.0) throw std::invalid_argument("discrete ot: negative weight");
    mass_mu += w;
  }
  for (double w : nu_w) {
    if (w < 0.0) throw std::invalid_argument("discrete ot: negative weight");
    mass_nu += w;
  }
  if (std::abs(mass_mu - mass_nu) > 1e-9 * std::max(mass_mu, mass_nu))
    throw std::invalid_argument("discrete ot: marginal masses differ");
  for (const auto& r : surplus)
    for (double v : r) scale = std::max(scale, std::abs(v));
  const double tol = 1e-12 * std::max(scale, 1.0);

  DiscreteCoupling out;
  out.rows = rows;
  out.cols = cols;
  out.plan.assign(static_cast<std::size_t>(rows) * cols, 0.0);

  // Minimize cost = -surplus. Northwest-corner start; a zero basic cell keeps
  // the basis at rows + cols - 1 entries under degeneracy.
  std::vector<double> row_left = mu_w, col_left = nu_w;
  std::vector<Cell> basis;
  {
    int i = 0, j = 0;
    while (i < rows && j < cols) {
      const double amount = std::min(row_left[i], col_left[j]);
      out.plan[static_cast<std::size_t>(i) * cols + j] = amount;
      basis.push_back({i, j});
      row_left[i] -= amount;
      col_left[j] -= amount;
      const bool row_done = row_left[i] <= tol;
      const bool col_done = col_left[j] <= tol;
      if (row_done && col_done) {
        if (i + 1 < rows && j + 1 < cols) {
          basis.push_back({i + 1, j});  // zero basic cell
        }
        ++i;
        ++j;
      } else if (row_done) {
        ++i;
      } else {
        ++j;
      }
    }
  }

  auto cost = [&](int i, int j) { return -surplus[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]; };

  const int max_iter = 20000;
  for (int iter = 0; iter < max_iter; ++iter) {
    // Potentials from the basis tree, u[0] = 0.
    std::vector<double> u(rows, 0.0), v(cols, 0.0);
    std::vector<char> got_u(rows, 0), got_v(cols, 0);
    got_u[0] = 1;
    bool progress = true;
    while (progress) {
      progress = false;
      for (const Cell& b : basis) {
        if (got_u[b.i] && !got_v[b.j]) {
          v[b.j] = cost(b.i, b.j) - u[b.i];
          got_v[b.j] = 1;
          progress = true;
        } else if (!got_u[b.i] && got_v[b.j]) {
          u[b.i] = cost(b.i, b.j) - v[b.j];
          got_u[b.i] = 1;
          progress = true;
        }
      }
    }
    for (char g : got_u)
      if (!g) throw std::logic_error("transport simplex: disconnected basis (row)");
    for (char g : got_v)
      if (!g) throw std::logic_error("transport simplex: disconnected basis (col)");

    // Bland's rule: first cell in lexicographic order with negative reduced cost.
    Cell entering{-1, -1};
    for (int i = 0; i < rows && entering.i < 0; ++i)
      for (int j = 0; j < cols; ++j) {
        const double reduced = cost(i, j) - u[i] - v[j];
        if (reduced < -tol) {
          bool in_basis = false;
          for (const Cell& b : basis)
            if (b.i == i && b.j == j) in_basis = true;
          if (!in_basis) {
            entering = {i, j};
            break;
          }
        }
      }
    if (entering.i < 0) break;  // optimal

    std::vector<Cell> cycle = find_cycle(basis, entering, rows, cols);
    double theta = 1e300;
    for (std::size_t k = 1; k < cycle.size(); k += 2)
      theta = std::min(theta, out.plan[static_cast<std::size_t>(cycle[k].i) * cols + cycle[k].j]);
    int leave_pos = -1;
    for (std::size_t k = 1; k < cycle.size(); k += 2) {
      const double x = out.plan[static_cast<std::size_t>(cycle[k].i) * cols + cycle[k].j];
      if (x > theta + 1e-15) continue;
      if (leave_pos < 0 || cycle[k].i < cycle[leave_pos].i ||
          (cycle[k].i == cycle[leave_pos].i && cycle[k].j < cycle[leave_pos].j))
        leave_pos = static_cast<int>(k);
    }
    if (leave_pos < 0) throw std::logic_error("transport simplex: no leaving cell");
    for (std::size_t k = 0; k < cycle.size(); ++k) {
      double& x = out.plan[static_cast<std::size_t>(cycle[k].i) * cols + cycle[k].j];
      x += (k % 2 == 0) ? theta : -theta;
      if (x < 0.0) x = 0.0;
    }
    const Cell leaving = cycle[static_cast<std::size_t>(leave_pos)];
    for (std::size_t k = 0; k < basis.size(); ++k) {
      if (basis[k].i == leaving.i && basis[k].j == leaving.j) {
        basis[k] = entering;
        break;
      }
    }
  }

  out.value = 0.0;
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) out.value += out.at(i, j) * surplus[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
  return out;
}

QuantizedGaussian gh_quantize(double mean, double stddev, int n) {
  const GaussHermiteRule& rule = gauss_hermite(n);
  QuantizedGaussian q;
  q.point.resize(rule.node.size());
  q.weight.resize(rule.node.size());
  const double scale = stddev * 1.4142135623730950488016887242097;
  for (std::size_t i = 0; i < rule.node.size(); ++i) {
    q.point[i] = mean + scale * rule.node[i];
    q.weight[i] = rule.weight[i] / 1.7724538509055160272981674833411;
  }
  return q;
}

QuantizedOracleInstance build_quantized_instance(const MarketParams& p, const SurplusFamily& family,
                                                 const TransportSolution& transport) {
  QuantizedOracleInstance inst;
  switch (family.tag) {
    case FamilyTag::kLinear: {
      // gamma_c is linear in zt, so the zt marginal collapses to its mean.
      const QuantizedGaussian qs = gh_quantize(0.0, std::sqrt(p.signal_var_total()), 8);
      for (std::size_t j = 0; j < qs.point.size(); ++j) {
        inst.mu_atoms.push_back({-p.m_beta, qs.point[j]});
        inst.mu_w.push_back(qs.weight[j]);
      }
      break;
    }
    case FamilyTag::kActivist: {
      const QuantizedGaussian qz = gh_quantize(-p.m_beta, std::sqrt(p.shifted_noise_var(p.T)), 8);
      for (std::size_t i = 0; i < qz.point.size(); ++i) {
        inst.mu_atoms.push_back({qz.point[i], 0.0});
        inst.mu_w.push_back(qz.weight[i]);
      }
      break;
    }
    case FamilyTag::kLinearQuadratic: {
      const QuantizedGaussian qz = gh_quantize(-p.m_beta, std::sqrt(p.shifted_noise_var(p.T)), 2);
      const QuantizedGaussian qs = gh_quantize(0.0, std::sqrt(p.signal_var_total()), 4);
      for (std::size_t i = 0; i < qz.point.size(); ++i)
        for (std::size_t j = 0; j < qs.point.size(); ++j) {
          inst.mu_atoms.push_back({qz.point[i], qs.point[j]});
          inst.mu_w.push_back(qz.weight[i] * qs.weight[j]);
        }
      break;
    }
  }
  inst.nu_w = inst.mu_w;
  for (const auto& [zt, s] : inst.mu_atoms) inst.y_atoms.push_back(transport.map(zt, s));
  inst.surplus.assign(inst.mu_atoms.size(), std::vector<double>(inst.mu_atoms.size(), 0.0));
  for (std::size_t i = 0; i < inst.mu_atoms.size(); ++i)
    for (std::size_t j = 0; j < inst.mu_atoms.size(); ++j)
      inst.surplus[i][j] = family.surplus(inst.mu_atoms[i].first, inst.mu_atoms[i].second, inst.y_atoms[j]);
  return inst;
}

}  // namespace kyleot
