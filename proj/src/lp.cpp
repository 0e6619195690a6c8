#include "adalloc/lp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <unordered_map>

namespace adalloc::lp {
namespace {

constexpr double kPivotTol = 1e-9;

// Column-oriented view of the packing LP. Structural columns carry at most
// two coupling entries (budget row, cap row) plus membership in their
// impression's at-most-one row; slack columns follow. Bland order is the
// column id order: structurals, impression slacks, coupling slacks.
struct Column {
  std::int32_t set = -1;  // impression index, -1 for coupling slacks
  double cost = 0.0;
  std::int32_t row0 = -1, row1 = -1;
  double coef0 = 0.0, coef1 = 0.0;
};

class Simplex {
 public:
  Simplex(const LpInstance& inst, double tol) : inst_(inst), tol_(tol) { build(); }

  PrimalDualSolution run();

 private:
  void build();
  void refresh();
  double reduced_cost(std::int32_t c) const;
  void reduced_column(std::int32_t c, std::vector<double>& g) const;
  PrimalDualSolution extract();

  const LpInstance& inst_;
  double tol_;
  double dual_tol_ = 1e-9;

  std::int32_t n_rows_ = 0;  // coupling rows: bounded budgets then caps
  std::int64_t n_sets_ = 0;  // impressions
  std::vector<double> rhs_;
  std::vector<std::int32_t> budget_row_;  // campaign -> coupling row or -1

  std::vector<Column> cols_;
  std::int64_t n_struct_ = 0;
  std::int64_t gub_slack0_ = 0, coup_slack0_ = 0;

  std::vector<char> basic_;
  std::vector<std::int32_t> slot_of_;    // column -> working-basis slot
  std::vector<std::int64_t> key_col_;    // set -> key column
  std::vector<std::int64_t> nonkey_;     // slot -> column
  std::vector<std::vector<std::int64_t>> members_;  // set -> non-key basic columns
  std::vector<double> winv_;             // n_rows x n_rows, row major
  std::vector<double> x_nk_, key_val_;
  std::vector<double> y_, mu_;
  std::int64_t iterations_ = 0;
  bool bland_mode_ = false;
  int stall_ = 0;
};

void Simplex::build() {
  const auto n = inst_.n_campaigns;
  budget_row_.assign(n, -1);
  for (std::int32_t i = 0; i < n; ++i) {
    if (!inst_.bounded[static_cast<std::size_t>(i)]) continue;
    const double b = inst_.budgets[static_cast<std::size_t>(i)];
    if (!(b >= 0) || !std::isfinite(b)) throw SolverError("negative or non-finite budget");
    budget_row_[static_cast<std::size_t>(i)] = n_rows_;
    rhs_.push_back(b);
    ++n_rows_;
  }
  // cap-row lookup: campaign -> (impression -> row)
  std::vector<std::unordered_map<std::int64_t, std::int32_t>> cap_of(static_cast<std::size_t>(n));
  for (const CapRow& row : inst_.cap_rows) {
    if (row.campaign < 0 || row.campaign >= n) throw SolverError("cap row campaign out of range");
    if (!(row.cap >= 0)) throw SolverError("negative cap");
    for (std::int64_t j : row.members) {
      cap_of[static_cast<std::size_t>(row.campaign)][j] = n_rows_;
    }
    rhs_.push_back(row.cap);
    ++n_rows_;
  }

  n_sets_ = static_cast<std::int64_t>(inst_.impressions.size());
  for (std::int64_t j = 0; j < n_sets_; ++j) {
    for (const LpBid& bid : inst_.impressions[static_cast<std::size_t>(j)]) {
      if (bid.campaign < 0 || bid.campaign >= n) throw SolverError("bid campaign out of range");
      if (bid.cost < 0 || bid.revenue < 0) throw SolverError("negative bid coefficient");
      Column c;
      c.set = static_cast<std::int32_t>(j);
      c.cost = bid.revenue;
      const std::int32_t br = budget_row_[static_cast<std::size_t>(bid.campaign)];
      if (br >= 0 && bid.cost > 0) {
        c.row0 = br;
        c.coef0 = bid.cost;
      }
      const auto& caps = cap_of[static_cast<std::size_t>(bid.campaign)];
      if (auto it = caps.find(j); it != caps.end()) {
        if (c.row0 < 0) {
          c.row0 = it->second;
          c.coef0 = 1.0;
        } else {
          c.row1 = it->second;
          c.coef1 = 1.0;
        }
      }
      cols_.push_back(c);
    }
  }
  n_struct_ = static_cast<std::int64_t>(cols_.size());
  gub_slack0_ = n_struct_;
  for (std::int64_t j = 0; j < n_sets_; ++j) {
    Column c;
    c.set = static_cast<std::int32_t>(j);
    cols_.push_back(c);
  }
  coup_slack0_ = static_cast<std::int64_t>(cols_.size());
  for (std::int32_t k = 0; k < n_rows_; ++k) {
    Column c;
    c.row0 = k;
    c.coef0 = 1.0;
    cols_.push_back(c);
  }

  // dual tolerance scales with the cost magnitude
  double cost_scale = 1.0;
  for (std::int64_t c = 0; c < n_struct_; ++c) cost_scale = std::max(cost_scale, cols_[static_cast<std::size_t>(c)].cost);
  dual_tol_ = 1e-9 * cost_scale;

  basic_.assign(cols_.size(), 0);
  slot_of_.assign(cols_.size(), -1);
  key_col_.assign(static_cast<std::size_t>(n_sets_), -1);
  nonkey_.assign(static_cast<std::size_t>(n_rows_), -1);
  members_.assign(static_cast<std::size_t>(n_sets_), {});
  for (std::int64_t j = 0; j < n_sets_; ++j) {
    const std::int64_t c = gub_slack0_ + j;
    key_col_[static_cast<std::size_t>(j)] = c;
    basic_[static_cast<std::size_t>(c)] = 1;
  }
  for (std::int32_t k = 0; k < n_rows_; ++k) {
    const std::int64_t c = coup_slack0_ + k;
    nonkey_[static_cast<std::size_t>(k)] = c;
    slot_of_[static_cast<std::size_t>(c)] = k;
    basic_[static_cast<std::size_t>(c)] = 1;
  }
  y_.assign(static_cast<std::size_t>(n_rows_), 0.0);
  mu_.assign(static_cast<std::size_t>(n_sets_), 0.0);
  refresh();
}

// Rebuilds the working inverse and all basic values from the basis lists.
void Simplex::refresh() {
  const std::size_t k = static_cast<std::size_t>(n_rows_);
  std::vector<double> w(k * k, 0.0);  // working basis, column per slot
  std::vector<double> g(k, 0.0);
  for (std::size_t t = 0; t < k; ++t) {
    reduced_column(static_cast<std::int32_t>(nonkey_[t]), g);
    for (std::size_t r = 0; r < k; ++r) w[r * k + t] = g[r];
  }
  // Gauss-Jordan inversion with partial pivoting.
  winv_.assign(k * k, 0.0);
  for (std::size_t i = 0; i < k; ++i) winv_[i * k + i] = 1.0;
  for (std::size_t col = 0; col < k; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < k; ++r) {
      if (std::abs(w[r * k + col]) > std::abs(w[piv * k + col])) piv = r;
    }
    if (std::abs(w[piv * k + col]) < 1e-12) throw SolverError("singular working basis");
    if (piv != col) {
      for (std::size_t cc = 0; cc < k; ++cc) {
        std::swap(w[piv * k + cc], w[col * k + cc]);
        std::swap(winv_[piv * k + cc], winv_[col * k + cc]);
      }
    }
    const double d = w[col * k + col];
    for (std::size_t cc = 0; cc < k; ++cc) {
      w[col * k + cc] /= d;
      winv_[col * k + cc] /= d;
    }
    for (std::size_t r = 0; r < k; ++r) {
      if (r == col) continue;
      const double f = w[r * k + col];
      if (f == 0.0) continue;
      for (std::size_t cc = 0; cc < k; ++cc) {
        w[r * k + cc] -= f * w[col * k + cc];
        winv_[r * k + cc] -= f * winv_[col * k + cc];
      }
    }
  }
  // beta = rhs - sum_j R_key[j]; keys absorb their set's unit rhs.
  std::vector<double> beta(rhs_);
  for (std::int64_t j = 0; j < n_sets_; ++j) {
    const Column& kc = cols_[static_cast<std::size_t>(key_col_[static_cast<std::size_t>(j)])];
    if (kc.row0 >= 0) beta[static_cast<std::size_t>(kc.row0)] -= kc.coef0;
    if (kc.row1 >= 0) beta[static_cast<std::size_t>(kc.row1)] -= kc.coef1;
  }
  x_nk_.assign(k, 0.0);
  for (std::size_t r = 0; r < k; ++r) {
    double acc = 0.0;
    for (std::size_t cc = 0; cc < k; ++cc) acc += winv_[r * k + cc] * beta[cc];
    x_nk_[r] = acc;
  }
  key_val_.assign(static_cast<std::size_t>(n_sets_), 0.0);
  for (std::int64_t j = 0; j < n_sets_; ++j) key_val_[static_cast<std::size_t>(j)] = 1.0;
  for (std::size_t t = 0; t < k; ++t) {
    const Column& c = cols_[static_cast<std::size_t>(nonkey_[t])];
    if (c.set >= 0) key_val_[static_cast<std::size_t>(c.set)] -= x_nk_[t];
  }
}

void Simplex::reduced_column(std::int32_t c, std::vector<double>& g) const {
  std::fill(g.begin(), g.end(), 0.0);
  const Column& col = cols_[static_cast<std::size_t>(c)];
  if (col.row0 >= 0) g[static_cast<std::size_t>(col.row0)] += col.coef0;
  if (col.row1 >= 0) g[static_cast<std::size_t>(col.row1)] += col.coef1;
  if (col.set >= 0) {
    const Column& kc = cols_[static_cast<std::size_t>(key_col_[static_cast<std::size_t>(col.set)])];
    if (kc.row0 >= 0) g[static_cast<std::size_t>(kc.row0)] -= kc.coef0;
    if (kc.row1 >= 0) g[static_cast<std::size_t>(kc.row1)] -= kc.coef1;
  }
}

double Simplex::reduced_cost(std::int32_t c) const {
  const Column& col = cols_[static_cast<std::size_t>(c)];
  double d = col.cost;
  if (col.row0 >= 0) d -= y_[static_cast<std::size_t>(col.row0)] * col.coef0;
  if (col.row1 >= 0) d -= y_[static_cast<std::size_t>(col.row1)] * col.coef1;
  if (col.set >= 0) d -= mu_[static_cast<std::size_t>(col.set)];
  return d;
}

PrimalDualSolution Simplex::run() {
  const std::size_t k = static_cast<std::size_t>(n_rows_);
  const std::int64_t total = static_cast<std::int64_t>(cols_.size());
  const std::int64_t max_iters = 200000 + 40 * (n_sets_ + n_rows_);
  std::vector<double> g(k, 0.0), w(k, 0.0);
  std::vector<double> dkey(static_cast<std::size_t>(n_sets_), 0.0);
  std::vector<char> marked(static_cast<std::size_t>(n_sets_), 0);
  std::vector<std::int64_t> touched;

  for (;; ++iterations_) {
    if (iterations_ > max_iters) throw IterationLimit("simplex iteration limit reached");
    if (iterations_ > 0 && iterations_ % 512 == 0) refresh();

    // duals for the current basis
    for (std::size_t r = 0; r < k; ++r) {
      double acc = 0.0;
      for (std::size_t t = 0; t < k; ++t) {
        const Column& c = cols_[static_cast<std::size_t>(nonkey_[t])];
        double chat = c.cost;
        if (c.set >= 0) chat -= cols_[static_cast<std::size_t>(key_col_[static_cast<std::size_t>(c.set)])].cost;
        acc += chat * winv_[t * k + r];
      }
      y_[r] = acc;
    }
    for (std::int64_t j = 0; j < n_sets_; ++j) {
      const Column& kc = cols_[static_cast<std::size_t>(key_col_[static_cast<std::size_t>(j)])];
      double m = kc.cost;
      if (kc.row0 >= 0) m -= y_[static_cast<std::size_t>(kc.row0)] * kc.coef0;
      if (kc.row1 >= 0) m -= y_[static_cast<std::size_t>(kc.row1)] * kc.coef1;
      mu_[static_cast<std::size_t>(j)] = m;
    }

    // Entering rule: Dantzig (largest reduced cost, ties to the lowest id)
    // while the objective moves; Bland (first eligible id) during degenerate
    // stalls, which restores the anti-cycling guarantee.
    std::int64_t entering = -1;
    if (bland_mode_) {
      for (std::int64_t c = 0; c < total; ++c) {
        if (basic_[static_cast<std::size_t>(c)]) continue;
        if (reduced_cost(static_cast<std::int32_t>(c)) > dual_tol_) {
          entering = c;
          break;
        }
      }
    } else {
      double best = dual_tol_;
      for (std::int64_t c = 0; c < total; ++c) {
        if (basic_[static_cast<std::size_t>(c)]) continue;
        const double d = reduced_cost(static_cast<std::int32_t>(c));
        if (d > best) {
          best = d;
          entering = c;
        }
      }
    }
    if (entering < 0) break;

    reduced_column(static_cast<std::int32_t>(entering), g);
    for (std::size_t r = 0; r < k; ++r) {
      double acc = 0.0;
      for (std::size_t cc = 0; cc < k; ++cc) acc += winv_[r * k + cc] * g[cc];
      w[r] = acc;
    }
    const std::int32_t enter_set = cols_[static_cast<std::size_t>(entering)].set;

    // key direction coefficients for touched sets
    for (std::int64_t j : touched) {
      dkey[static_cast<std::size_t>(j)] = 0.0;
      marked[static_cast<std::size_t>(j)] = 0;
    }
    touched.clear();
    auto touch = [&](std::int32_t j) {
      if (!marked[static_cast<std::size_t>(j)]) {
        marked[static_cast<std::size_t>(j)] = 1;
        touched.push_back(j);
      }
    };
    for (std::size_t t = 0; t < k; ++t) {
      if (w[t] == 0.0) continue;
      const Column& c = cols_[static_cast<std::size_t>(nonkey_[t])];
      if (c.set >= 0) {
        touch(c.set);
        dkey[static_cast<std::size_t>(c.set)] += w[t];
      }
    }
    if (enter_set >= 0) {
      touch(enter_set);
      dkey[static_cast<std::size_t>(enter_set)] -= 1.0;
    }

    // ratio test (Bland ties: smallest column id)
    double theta = std::numeric_limits<double>::infinity();
    std::int64_t leave_col = -1;
    std::int32_t leave_slot = -1;
    std::int32_t leave_key_set = -1;
    for (std::size_t t = 0; t < k; ++t) {
      if (w[t] > kPivotTol) {
        const double ratio = std::max(0.0, x_nk_[t]) / w[t];
        const std::int64_t col = nonkey_[t];
        if (ratio < theta || (ratio == theta && col < leave_col)) {
          theta = ratio;
          leave_col = col;
          leave_slot = static_cast<std::int32_t>(t);
          leave_key_set = -1;
        }
      }
    }
    for (std::int64_t j : touched) {
      const double d = dkey[static_cast<std::size_t>(j)];
      if (d < -kPivotTol) {
        const double ratio = std::max(0.0, key_val_[static_cast<std::size_t>(j)]) / -d;
        const std::int64_t col = key_col_[static_cast<std::size_t>(j)];
        if (ratio < theta || (ratio == theta && col < leave_col)) {
          theta = ratio;
          leave_col = col;
          leave_slot = -1;
          leave_key_set = static_cast<std::int32_t>(j);
        }
      }
    }
    if (leave_col < 0) throw SolverError("unbounded packing LP (internal error)");

    // degenerate-stall bookkeeping drives the pivot-rule switch
    if (theta <= 1e-12) {
      if (++stall_ > 64) bland_mode_ = true;
    } else {
      stall_ = 0;
      bland_mode_ = false;
    }

    if (leave_key_set < 0) {
      // leaving variable sits in the working basis
      const std::size_t t = static_cast<std::size_t>(leave_slot);
      const double piv = w[t];
      for (std::size_t cc = 0; cc < k; ++cc) winv_[t * k + cc] /= piv;
      for (std::size_t r = 0; r < k; ++r) {
        if (r == t || w[r] == 0.0) continue;
        const double f = w[r];
        for (std::size_t cc = 0; cc < k; ++cc) winv_[r * k + cc] -= f * winv_[t * k + cc];
      }
      for (std::size_t r = 0; r < k; ++r) {
        if (r != t) x_nk_[r] -= theta * w[r];
      }
      x_nk_[t] = theta;
      for (std::int64_t j : touched) {
        key_val_[static_cast<std::size_t>(j)] += theta * dkey[static_cast<std::size_t>(j)];
      }
      const Column& lc = cols_[static_cast<std::size_t>(leave_col)];
      basic_[static_cast<std::size_t>(leave_col)] = 0;
      slot_of_[static_cast<std::size_t>(leave_col)] = -1;
      if (lc.set >= 0) {
        auto& m = members_[static_cast<std::size_t>(lc.set)];
        m.erase(std::find(m.begin(), m.end(), leave_col));
      }
      nonkey_[t] = entering;
      slot_of_[static_cast<std::size_t>(entering)] = static_cast<std::int32_t>(t);
      basic_[static_cast<std::size_t>(entering)] = 1;
      if (enter_set >= 0) members_[static_cast<std::size_t>(enter_set)].push_back(entering);
    } else {
      // the leaving variable is the key of leave_key_set
      const std::size_t j = static_cast<std::size_t>(leave_key_set);
      basic_[static_cast<std::size_t>(leave_col)] = 0;
      basic_[static_cast<std::size_t>(entering)] = 1;
      if (enter_set == leave_key_set && members_[j].empty()) {
        // entering replaces the key directly; working basis unchanged
        for (std::size_t r = 0; r < k; ++r) x_nk_[r] -= theta * w[r];
        for (std::int64_t jj : touched) {
          key_val_[static_cast<std::size_t>(jj)] += theta * dkey[static_cast<std::size_t>(jj)];
        }
        key_col_[j] = entering;
        key_val_[j] = theta;
      } else {
        // promote the smallest basic column of the set to key
        std::int64_t promote = (enter_set == leave_key_set) ? entering
                                                            : std::numeric_limits<std::int64_t>::max();
        for (std::int64_t m : members_[j]) promote = std::min(promote, m);
        if (promote == std::numeric_limits<std::int64_t>::max()) {
          throw SolverError("set lost its last basic column (internal error)");
        }
        if (promote == entering) {
          key_col_[j] = entering;
        } else {
          auto& mem = members_[j];
          mem.erase(std::find(mem.begin(), mem.end(), promote));
          const std::int32_t freed = slot_of_[static_cast<std::size_t>(promote)];
          slot_of_[static_cast<std::size_t>(promote)] = -1;
          key_col_[j] = promote;
          nonkey_[static_cast<std::size_t>(freed)] = entering;
          slot_of_[static_cast<std::size_t>(entering)] = freed;
          if (enter_set >= 0) members_[static_cast<std::size_t>(enter_set)].push_back(entering);
        }
        refresh();
      }
    }
  }
  return extract();
}

PrimalDualSolution Simplex::extract() {
  refresh();
  const std::size_t k = static_cast<std::size_t>(n_rows_);
  // final duals
  for (std::size_t r = 0; r < k; ++r) {
    double acc = 0.0;
    for (std::size_t t = 0; t < k; ++t) {
      const Column& c = cols_[static_cast<std::size_t>(nonkey_[t])];
      double chat = c.cost;
      if (c.set >= 0) chat -= cols_[static_cast<std::size_t>(key_col_[static_cast<std::size_t>(c.set)])].cost;
      acc += chat * winv_[t * k + r];
    }
    y_[r] = std::max(0.0, acc);
  }
  for (std::int64_t j = 0; j < n_sets_; ++j) {
    const Column& kc = cols_[static_cast<std::size_t>(key_col_[static_cast<std::size_t>(j)])];
    double m = kc.cost;
    if (kc.row0 >= 0) m -= y_[static_cast<std::size_t>(kc.row0)] * kc.coef0;
    if (kc.row1 >= 0) m -= y_[static_cast<std::size_t>(kc.row1)] * kc.coef1;
    mu_[static_cast<std::size_t>(j)] = std::max(0.0, m);
  }

  PrimalDualSolution out;
  out.iterations = iterations_;
  out.x.assign(inst_.impressions.size(), {});
  std::vector<double> xval(cols_.size(), 0.0);
  for (std::size_t t = 0; t < k; ++t) xval[static_cast<std::size_t>(nonkey_[t])] = x_nk_[t];
  for (std::int64_t j = 0; j < n_sets_; ++j) {
    xval[static_cast<std::size_t>(key_col_[static_cast<std::size_t>(j)])] =
        key_val_[static_cast<std::size_t>(j)];
  }
  std::int64_t c = 0;
  double primal = 0.0;
  for (std::int64_t j = 0; j < n_sets_; ++j) {
    for (const LpBid& bid : inst_.impressions[static_cast<std::size_t>(j)]) {
      const double v = std::clamp(xval[static_cast<std::size_t>(c)], 0.0, 1.0);
      if (v > 1e-12) {
        out.x[static_cast<std::size_t>(j)].emplace_back(bid.campaign, v);
        primal += bid.revenue * v;
      }
      ++c;
    }
  }
  out.p.assign(static_cast<std::size_t>(inst_.n_campaigns), 0.0);
  for (std::int32_t i = 0; i < inst_.n_campaigns; ++i) {
    const std::int32_t r = budget_row_[static_cast<std::size_t>(i)];
    if (r >= 0) out.p[static_cast<std::size_t>(i)] = y_[static_cast<std::size_t>(r)];
  }
  out.cap_duals.clear();
  for (std::size_t cr = 0; cr < inst_.cap_rows.size(); ++cr) {
    const std::size_t row = static_cast<std::size_t>(n_rows_) - inst_.cap_rows.size() + cr;
    out.cap_duals.push_back(y_[row]);
  }
  out.p_hat.assign(static_cast<std::size_t>(n_sets_), 0.0);
  double dual = 0.0;
  for (std::int64_t j = 0; j < n_sets_; ++j) {
    out.p_hat[static_cast<std::size_t>(j)] = mu_[static_cast<std::size_t>(j)];
    dual += mu_[static_cast<std::size_t>(j)];
  }
  for (std::size_t r = 0; r < k; ++r) dual += y_[r] * rhs_[r];
  out.primal_value = primal;
  out.dual_value = dual;
  out.gap = dual - primal;
  return out;
}

}  // namespace

std::vector<double> scale_budgets(std::span<const double> budgets, double epsilon) {
  return scale_budgets(budgets, epsilon, BudgetScaling::conservative);
}

std::vector<double> scale_budgets(std::span<const double> budgets, double epsilon,
                                  BudgetScaling mode) {
  const bool ok = mode == BudgetScaling::proportional ? (epsilon > 0 && epsilon <= 1)
                                                      : (epsilon > 0 && epsilon < 1);
  if (!ok) throw EpsilonOutOfRange("epsilon must lie in (0, 1)");
  const double f = mode == BudgetScaling::proportional ? epsilon : epsilon * (1.0 - epsilon);
  std::vector<double> out(budgets.begin(), budgets.end());
  for (double& b : out) b *= f;
  return out;
}

LpInstance make_instance(std::span<const Impression> sample, const CampaignBook& book,
                         std::span<const double> scaled_budgets) {
  LpInstance inst;
  inst.n_campaigns = book.size();
  inst.budgets.assign(scaled_budgets.begin(), scaled_budgets.end());
  inst.bounded.resize(static_cast<std::size_t>(book.size()));
  for (std::int32_t i = 0; i < book.size(); ++i) {
    inst.bounded[static_cast<std::size_t>(i)] = !book.at(i).is_house;
  }
  inst.impressions.reserve(sample.size());
  for (const Impression& imp : sample) {
    std::vector<LpBid> bids;
    bids.reserve(imp.entries.size());
    for (const BidEntry& e : imp.entries) {
      bids.push_back({e.campaign, to_currency(e.revenue), to_currency(e.cost)});
    }
    inst.impressions.push_back(std::move(bids));
  }
  return inst;
}

PrimalDualSolution solve_lp(const LpInstance& instance, double tol) {
  if (!(tol > 0)) throw std::invalid_argument("tol must be > 0");
  Simplex s(instance, tol);
  return s.run();
}

double default_price_cap(std::span<const Impression> sample) {
  double best = 0.0;
  for (const Impression& imp : sample) {
    for (const BidEntry& e : imp.entries) {
      if (e.cost > 0) {
        best = std::max(best, static_cast<double>(e.revenue) / static_cast<double>(e.cost));
      }
    }
  }
  return best > 0 ? 10.0 * best : 1.0;
}

DualPriceVector estimate_initial_duals(std::span<const Impression> sample,
                                       const CampaignBook& book, double epsilon, double tol,
                                       BudgetScaling mode, std::optional<double> price_cap) {
  if (sample.empty()) throw EmptySample("dual estimation needs a nonempty sample");
  std::vector<double> budgets(static_cast<std::size_t>(book.size()), 0.0);
  for (std::int32_t i = 0; i < book.size(); ++i) {
    const Campaign& c = book.at(i);
    budgets[static_cast<std::size_t>(i)] = c.is_house ? 0.0 : to_currency(c.remaining());
  }
  const std::vector<double> scaled = scale_budgets(budgets, epsilon, mode);
  const LpInstance inst = make_instance(sample, book, scaled);
  const PrimalDualSolution sol = solve_lp(inst, tol);
  DualPriceVector out;
  out.price_cap = price_cap.value_or(default_price_cap(sample));
  out.prices.resize(sol.p.size());
  for (std::size_t i = 0; i < sol.p.size(); ++i) {
    out.prices[i] = std::clamp(sol.p[i], 0.0, out.price_cap);
  }
  return out;
}

std::pair<std::optional<std::int32_t>, double> reduced_price(const Impression& imp,
                                                             const DualPriceVector& prices) {
  std::optional<std::int32_t> best;
  double best_val = 0.0;
  for (const BidEntry& e : imp.entries) {
    const double v = to_currency(e.revenue) - to_currency(e.cost) * prices.at(e.campaign);
    if (v > best_val || (best && v == best_val && e.campaign < *best)) {
      best = e.campaign;
      best_val = v;
    }
  }
  if (!best) return {std::nullopt, 0.0};
  return {best, best_val};
}

double bid_budget_ratio(std::span<const Impression> sample, const CampaignBook& book) {
  double best = 0.0;
  for (const Impression& imp : sample) {
    for (const BidEntry& e : imp.entries) {
      const Campaign& c = book.at(e.campaign);
      if (c.is_house) continue;
      best = std::max(best, static_cast<double>(e.cost) / static_cast<double>(c.budget));
    }
  }
  return best;
}

double offline_optimum(std::span<const Impression> stream, const CampaignBook& book, double tol) {
  std::vector<double> budgets(static_cast<std::size_t>(book.size()), 0.0);
  for (std::int32_t i = 0; i < book.size(); ++i) {
    const Campaign& c = book.at(i);
    budgets[static_cast<std::size_t>(i)] = c.is_house ? 0.0 : to_currency(c.remaining());
  }
  const LpInstance inst = make_instance(stream, book, budgets);
  return solve_lp(inst, tol).primal_value;
}

std::string dump_instance(const LpInstance& instance) {
  std::ostringstream os;
  os << "max sum r_ji x_ji over " << instance.impressions.size() << " impressions, "
     << instance.n_campaigns << " campaigns\n";
  for (std::int32_t i = 0; i < instance.n_campaigns; ++i) {
    if (!instance.bounded[static_cast<std::size_t>(i)]) continue;
    os << "budget[" << i << "]: sum_j a_j" << i << " x_j" << i
       << " <= " << instance.budgets[static_cast<std::size_t>(i)] << "\n";
  }
  for (const CapRow& row : instance.cap_rows) {
    os << "cap[c=" << row.campaign << ", |P|=" << row.members.size() << "]: sum x <= " << row.cap
       << "\n";
  }
  for (std::size_t j = 0; j < instance.impressions.size(); ++j) {
    os << "imp[" << j << "]:";
    for (const LpBid& b : instance.impressions[j]) {
      os << " (i=" << b.campaign << ", r=" << b.revenue << ", a=" << b.cost << ")";
    }
    os << " ; sum_i x <= 1\n";
  }
  return os.str();
}

}  // namespace adalloc::lp
