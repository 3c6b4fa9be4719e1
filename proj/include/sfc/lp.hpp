#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace sfc {

constexpr double kInf = std::numeric_limits<double>::infinity();

enum class lp_status { optimal, infeasible, unbounded };

inline const char* to_string(lp_status s) {
  switch (s) {
    case lp_status::optimal: return "optimal";
    case lp_status::infeasible: return "infeasible";
    case lp_status::unbounded: return "unbounded";
  }
  return "?";
}

struct lp_variable {
  std::string name;
  double lo = 0.0;
  double hi = kInf;
};

struct lp_row {
  std::vector<std::pair<int, double>> coefs;  // (variable index, coefficient)
  char rel = 'L';                             // 'L' <=, 'E' =, 'G' >=
  double rhs = 0.0;
};

struct linear_program {
  std::vector<lp_variable> vars;
  std::vector<double> objective;  // minimize c.x
  std::vector<lp_row> rows;

  int add_var(std::string name, double lo, double hi, double obj) {
    if (!(lo <= hi)) throw std::invalid_argument("variable '" + name + "': lo > hi");
    vars.push_back({std::move(name), lo, hi});
    objective.push_back(obj);
    return static_cast<int>(vars.size()) - 1;
  }

  void add_row(std::vector<std::pair<int, double>> coefs, char rel, double rhs) {
    for (auto& [j, c] : coefs) {
      (void)c;
      if (j < 0 || j >= static_cast<int>(vars.size()))
        throw std::invalid_argument("row references undeclared variable");
    }
    if (rel != 'L' && rel != 'E' && rel != 'G') throw std::invalid_argument("bad relation");
    rows.push_back({std::move(coefs), rel, rhs});
  }
};

struct lp_solution {
  lp_status status = lp_status::infeasible;
  std::vector<double> values;
  double objective = 0.0;
};

namespace simplex_detail {

enum col_state : unsigned char { BASIC, AT_LO, AT_HI, NB_FREE };

struct tableau {
  int m = 0;      // rows
  int ncols = 0;  // structural-active + slack + artificial
  std::vector<double> a;    // dense, row-major, m x ncols
  std::vector<double> beta; // B^-1 b, maintained under row ops
  std::vector<double> zrow; // reduced costs
  std::vector<double> lo, hi, nbval;
  std::vector<col_state> state;
  std::vector<int> basis;   // row -> basic column
  std::vector<double> xb;   // value of basic variable per row

  double* row(int i) { return a.data() + static_cast<size_t>(i) * ncols; }
  const double* row(int i) const { return a.data() + static_cast<size_t>(i) * ncols; }
};

// Recompute basic values from beta and the nonbasic bound values.
inline void refresh_xb(tableau& t) {
  t.xb = t.beta;
  for (int j = 0; j < t.ncols; ++j) {
    if (t.state[j] == BASIC) continue;
    double v = t.nbval[j];
    if (v == 0.0) continue;
    for (int i = 0; i < t.m; ++i) t.xb[i] -= t.row(i)[j] * v;
  }
}

inline void load_objective(tableau& t, const std::vector<double>& c) {
  // zrow_j = c_j - c_B . T_j for nonbasic; zero on basis columns
  t.zrow.assign(t.ncols, 0.0);
  for (int j = 0; j < t.ncols; ++j) t.zrow[j] = j < static_cast<int>(c.size()) ? c[j] : 0.0;
  for (int i = 0; i < t.m; ++i) {
    double cb = t.basis[i] < static_cast<int>(c.size()) ? c[t.basis[i]] : 0.0;
    if (cb == 0.0) continue;
    const double* r = t.row(i);
    for (int j = 0; j < t.ncols; ++j) t.zrow[j] -= cb * r[j];
  }
}

// One simplex phase: minimizes the objective currently loaded in zrow.
// Returns false when unbounded.
inline bool run_phase(tableau& t, long& iterations, long max_iterations) {
  constexpr double kPivotTol = 1e-8;
  constexpr double kRatioTie = 1e-9;
  double ztol = 0.0;
  for (int j = 0; j < t.ncols; ++j) ztol = std::max(ztol, std::fabs(t.zrow[j]));
  ztol = 1e-9 * (1.0 + ztol);

  int degenerate_run = 0;
  bool bland = false;

  for (;;) {
    if (++iterations > max_iterations)
      throw std::runtime_error("simplex iteration limit exceeded");

    // entering column
    int enter = -1;
    int dir = +1;
    double best = ztol;
    for (int j = 0; j < t.ncols; ++j) {
      if (t.state[j] == BASIC) continue;
      if (t.lo[j] == t.hi[j]) continue;  // fixed
      double z = t.zrow[j];
      int d;
      if (t.state[j] == AT_LO || t.state[j] == NB_FREE) {
        if (z < -ztol) d = +1;
        else if (t.state[j] == NB_FREE && z > ztol) d = -1;
        else continue;
      } else {  // AT_HI
        if (z > ztol) d = -1;
        else continue;
      }
      if (bland) { enter = j; dir = d; break; }
      if (std::fabs(z) > best) { best = std::fabs(z); enter = j; dir = d; }
    }
    if (enter < 0) return true;  // optimal for this phase

    // ratio test: how far can the entering variable move
    double tmax = t.hi[enter] - t.lo[enter];  // inf when a bound is infinite
    if (!std::isfinite(tmax)) tmax = kInf;
    double tstar = tmax;
    int leave_row = -1;   // -1 -> bound flip
    double leave_to = 0;  // bound the leaving variable hits
    for (int i = 0; i < t.m; ++i) {
      double coef = t.row(i)[enter];
      if (std::fabs(coef) < kPivotTol) continue;
      double rate = -coef * dir;  // d(xb_i)/dt
      int bj = t.basis[i];
      double limit, hit;
      if (rate > 0) {
        if (!std::isfinite(t.hi[bj])) continue;
        limit = (t.hi[bj] - t.xb[i]) / rate;
        hit = t.hi[bj];
      } else {
        if (!std::isfinite(t.lo[bj])) continue;
        limit = (t.lo[bj] - t.xb[i]) / rate;
        hit = t.lo[bj];
      }
      if (limit < -1e-9) limit = 0;  // numerical: already slightly past the bound
      if (limit < tstar - kRatioTie) {
        tstar = limit;
        leave_row = i;
        leave_to = hit;
      } else if (leave_row >= 0 && limit <= tstar + kRatioTie) {
        // tie: prefer the larger pivot for stability, then lower variable index;
        // in Bland mode strictly the lowest variable index
        double cur = std::fabs(t.row(leave_row)[enter]);
        double cand = std::fabs(coef);
        bool take;
        if (bland)
          take = bj < t.basis[leave_row];
        else
          take = cand > cur + 1e-12 || (std::fabs(cand - cur) <= 1e-12 && bj < t.basis[leave_row]);
        if (take) {
          leave_row = i;
          leave_to = hit;
        }
      }
    }

    if (!std::isfinite(tstar)) return false;  // unbounded ray

    if (tstar <= kRatioTie) ++degenerate_run;
    else degenerate_run = 0;
    if (degenerate_run > 60) bland = true;

    double delta = dir * tstar;
    if (leave_row < 0) {
      // bound flip: entering moves to its other bound, basis unchanged
      for (int i = 0; i < t.m; ++i) t.xb[i] -= t.row(i)[enter] * delta;
      t.nbval[enter] += delta;
      t.state[enter] = dir > 0 ? AT_HI : AT_LO;
      continue;
    }

    // pivot
    double enter_val = t.nbval[enter] + delta;
    for (int i = 0; i < t.m; ++i)
      if (i != leave_row) t.xb[i] -= t.row(i)[enter] * delta;

    int leave_col = t.basis[leave_row];
    double* pr = t.row(leave_row);
    double pivot = pr[enter];
    double inv = 1.0 / pivot;
    for (int j = 0; j < t.ncols; ++j) pr[j] *= inv;
    t.beta[leave_row] *= inv;
    for (int i = 0; i < t.m; ++i) {
      if (i == leave_row) continue;
      double f = t.row(i)[enter];
      if (f == 0.0) continue;
      double* ri = t.row(i);
      for (int j = 0; j < t.ncols; ++j) ri[j] -= f * pr[j];
      t.beta[i] -= f * t.beta[leave_row];
    }
    {
      double f = t.zrow[enter];
      if (f != 0.0)
        for (int j = 0; j < t.ncols; ++j) t.zrow[j] -= f * pr[j];
    }

    t.basis[leave_row] = enter;
    t.state[enter] = BASIC;
    t.xb[leave_row] = enter_val;
    t.state[leave_col] =
        std::isfinite(t.lo[leave_col]) && std::fabs(leave_to - t.lo[leave_col]) <= 1e-12
            ? AT_LO
            : AT_HI;
    if (!std::isfinite(t.lo[leave_col]) && !std::isfinite(t.hi[leave_col]))
      t.state[leave_col] = NB_FREE;
    t.nbval[leave_col] = leave_to;

    if (iterations % 512 == 0) refresh_xb(t);
  }
}

}  // namespace simplex_detail

// Two-phase bounded-variable primal simplex. Deterministic: largest reduced
// cost with lowest-index ties, switching to Bland's rule after a degenerate
// stall. Fixed variables (lo == hi) are substituted out before the tableau is
// built.
inline lp_solution solve_lp(const linear_program& lp) {
  using namespace simplex_detail;
  const int n = static_cast<int>(lp.vars.size());

  std::vector<int> col_of(n, -1);
  std::vector<double> fixed_val(n, 0.0);
  std::vector<int> active;
  for (int j = 0; j < n; ++j) {
    const auto& v = lp.vars[j];
    if (!(v.lo <= v.hi)) throw std::invalid_argument("variable bounds inverted");
    if (v.lo == v.hi) fixed_val[j] = v.lo;
    else {
      col_of[j] = static_cast<int>(active.size());
      active.push_back(j);
    }
  }
  const int n_act = static_cast<int>(active.size());

  // Effective rows: substitute fixed variables, merge duplicate coefficients,
  // drop empty rows (checking them directly).
  struct eff_row {
    std::vector<std::pair<int, double>> coefs;  // active-column index
    char rel;
    double rhs;
  };
  std::vector<eff_row> eff;
  std::vector<double> merge(n_act, 0.0);
  for (const auto& r : lp.rows) {
    double rhs = r.rhs;
    std::vector<int> touched;
    for (auto& [j, c] : r.coefs) {
      if (col_of[j] < 0) rhs -= c * fixed_val[j];
      else {
        if (merge[col_of[j]] == 0.0) touched.push_back(col_of[j]);
        merge[col_of[j]] += c;
      }
    }
    eff_row er{{}, r.rel, rhs};
    std::sort(touched.begin(), touched.end());
    for (int cj : touched) {
      if (merge[cj] != 0.0) er.coefs.emplace_back(cj, merge[cj]);
      merge[cj] = 0.0;
    }
    if (er.coefs.empty()) {
      bool ok = er.rel == 'L' ? 0 <= rhs + 1e-9 : er.rel == 'G' ? 0 >= rhs - 1e-9
                                                                : std::fabs(rhs) <= 1e-9;
      if (!ok) {
        lp_solution sol;
        sol.status = lp_status::infeasible;
        return sol;
      }
      continue;
    }
    eff.push_back(std::move(er));
  }

  const int m = static_cast<int>(eff.size());
  tableau t;
  t.m = m;

  // slacks for L/G rows
  std::vector<int> slack_col(m, -1);
  int n_slack = 0;
  for (int i = 0; i < m; ++i)
    if (eff[i].rel != 'E') slack_col[i] = n_act + n_slack++;

  // initial nonbasic values and row residuals decide which rows need artificials
  std::vector<double> init(n_act);
  for (int cj = 0; cj < n_act; ++cj) {
    const auto& v = lp.vars[active[cj]];
    init[cj] = std::isfinite(v.lo) ? v.lo : (std::isfinite(v.hi) ? v.hi : 0.0);
  }
  std::vector<double> resid(m);
  std::vector<bool> needs_art(m, false);
  int n_art = 0;
  for (int i = 0; i < m; ++i) {
    double r = eff[i].rhs;
    for (auto& [cj, c] : eff[i].coefs) r -= c * init[cj];
    resid[i] = r;
    bool slack_absorbs =
        eff[i].rel == 'L' ? r >= 0 : eff[i].rel == 'G' ? r <= 0 : false;
    if (!slack_absorbs) {
      needs_art[i] = true;
      ++n_art;
    }
  }

  t.ncols = n_act + n_slack + n_art;
  t.a.assign(static_cast<size_t>(m) * t.ncols, 0.0);
  t.beta.assign(m, 0.0);
  t.lo.assign(t.ncols, 0.0);
  t.hi.assign(t.ncols, kInf);
  t.nbval.assign(t.ncols, 0.0);
  t.state.assign(t.ncols, AT_LO);
  t.basis.assign(m, -1);
  t.xb.assign(m, 0.0);

  for (int cj = 0; cj < n_act; ++cj) {
    const auto& v = lp.vars[active[cj]];
    t.lo[cj] = v.lo;
    t.hi[cj] = v.hi;
    t.nbval[cj] = init[cj];
    t.state[cj] = std::isfinite(v.lo) ? AT_LO : (std::isfinite(v.hi) ? AT_HI : NB_FREE);
  }

  std::vector<double> phase1_obj(t.ncols, 0.0);
  int art_next = n_act + n_slack;
  for (int i = 0; i < m; ++i) {
    for (auto& [cj, c] : eff[i].coefs) t.row(i)[cj] = c;
    t.beta[i] = eff[i].rhs;
    if (slack_col[i] >= 0) {
      int sj = slack_col[i];
      t.row(i)[sj] = 1.0;
      if (eff[i].rel == 'L') { t.lo[sj] = 0.0; t.hi[sj] = kInf; }
      else { t.lo[sj] = -kInf; t.hi[sj] = 0.0; }
      t.nbval[sj] = 0.0;
      t.state[sj] = eff[i].rel == 'L' ? AT_LO : AT_HI;
    }
    if (needs_art[i]) {
      // flip the row if needed so the artificial can carry +1 and the basis
      // column stays a unit vector
      if (resid[i] < 0) {
        double* ri = t.row(i);
        for (int j = 0; j < t.ncols; ++j) ri[j] = -ri[j];
        t.beta[i] = -t.beta[i];
      }
      int aj = art_next++;
      t.row(i)[aj] = 1.0;
      t.lo[aj] = 0.0;
      t.hi[aj] = kInf;
      phase1_obj[aj] = 1.0;
      t.basis[i] = aj;
      t.state[aj] = BASIC;
      t.xb[i] = std::fabs(resid[i]);
    } else {
      int sj = slack_col[i];
      t.basis[i] = sj;
      t.state[sj] = BASIC;
      t.xb[i] = resid[i];
    }
  }

  long iterations = 0;
  const long max_iterations = 2000000;
  lp_solution sol;

  if (n_art > 0) {
    load_objective(t, phase1_obj);
    if (!run_phase(t, iterations, max_iterations))
      throw std::runtime_error("phase 1 reported unbounded");
    double infeas = 0.0;
    for (int i = 0; i < m; ++i)
      if (phase1_obj[t.basis[i]] == 1.0) infeas += t.xb[i];
    if (infeas > 1e-6) {
      sol.status = lp_status::infeasible;
      return sol;
    }
    // fix artificials at zero and drive basic ones out where possible
    for (int j = n_act + n_slack; j < t.ncols; ++j) { t.lo[j] = t.hi[j] = 0.0; }
    for (int i = 0; i < m; ++i) {
      int bj = t.basis[i];
      if (bj < n_act + n_slack) continue;
      int pivot_col = -1;
      const double* ri = t.row(i);
      for (int j = 0; j < n_act + n_slack; ++j)
        if (t.state[j] != BASIC && std::fabs(ri[j]) > 1e-7) { pivot_col = j; break; }
      if (pivot_col < 0) continue;  // redundant row; artificial stays basic at 0
      double* pr = t.row(i);
      double inv = 1.0 / pr[pivot_col];
      for (int j = 0; j < t.ncols; ++j) pr[j] *= inv;
      t.beta[i] *= inv;
      for (int k = 0; k < m; ++k) {
        if (k == i) continue;
        double f = t.row(k)[pivot_col];
        if (f == 0.0) continue;
        double* rk = t.row(k);
        for (int j = 0; j < t.ncols; ++j) rk[j] -= f * pr[j];
        t.beta[k] -= f * t.beta[i];
      }
      t.state[bj] = AT_LO;
      t.nbval[bj] = 0.0;
      t.basis[i] = pivot_col;
      double entering_val = t.nbval[pivot_col];
      t.state[pivot_col] = BASIC;
      t.xb[i] = entering_val;
    }
    refresh_xb(t);
  }

  std::vector<double> phase2_obj(t.ncols, 0.0);
  for (int cj = 0; cj < n_act; ++cj) phase2_obj[cj] = lp.objective[active[cj]];
  load_objective(t, phase2_obj);
  if (!run_phase(t, iterations, max_iterations)) {
    sol.status = lp_status::unbounded;
    return sol;
  }
  refresh_xb(t);

  sol.status = lp_status::optimal;
  sol.values.assign(n, 0.0);
  std::vector<double> colval(t.ncols, 0.0);
  for (int j = 0; j < t.ncols; ++j)
    if (t.state[j] != BASIC) colval[j] = t.nbval[j];
  for (int i = 0; i < m; ++i) colval[t.basis[i]] = t.xb[i];
  for (int j = 0; j < n; ++j)
    sol.values[j] = col_of[j] < 0 ? fixed_val[j] : colval[col_of[j]];
  double obj = 0.0;
  for (int j = 0; j < n; ++j) obj += lp.objective[j] * sol.values[j];
  sol.objective = obj;
  return sol;
}

}  // namespace sfc
