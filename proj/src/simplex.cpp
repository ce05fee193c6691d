#include "simplex.hpp"

#include <cmath>
#include <limits>

#include "msd/error.hpp"

namespace msd::detail {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kPivotTol = 1e-9;
constexpr double kCostTol = 1e-9;
constexpr double kRatioTieTol = 1e-12;
constexpr double kPhaseOneTol = 1e-7;
constexpr int kDegenerateRunBeforeBland = 50;

class Tableau {
 public:
  explicit Tableau(const DenseLp& lp) : lp_(lp) { build(); }

  LpResult run() {
    LpResult result;
    if (has_artificials_) {
      phase_one_objective();
      iterate(result.pivots);
      if (-cell(obj_row(), rhs_col()) > kPhaseOneTol) {
        result.status = LpStatus::kInfeasible;
        return result;
      }
      for (int j = first_artificial_; j < num_cols_; ++j) {
        upper_[j] = 0.0;
        eligible_[j] = false;
      }
    }
    phase_two_objective();
    iterate(result.pivots);

    result.status = LpStatus::kOptimal;
    result.values.assign(lp_.num_vars, 0.0);
    for (int i = 0; i < num_rows_; ++i) {
      if (basis_[i] < lp_.num_vars) result.values[basis_[i]] = cell(i, rhs_col());
    }
    result.objective = 0.0;
    for (int j = 0; j < lp_.num_vars; ++j) {
      if (flipped_[j]) result.values[j] = upper_[j] - result.values[j];
      result.objective += lp_.cost[j] * result.values[j];
    }
    return result;
  }

 private:
  int obj_row() const { return num_rows_; }
  int rhs_col() const { return num_cols_; }
  double& cell(int r, int c) { return data_[static_cast<std::size_t>(r) * width_ + c]; }
  double* row(int r) { return &data_[static_cast<std::size_t>(r) * width_]; }

  void build() {
    num_rows_ = static_cast<int>(lp_.rows.size());
    const int n = lp_.num_vars;
    std::vector<double> sign(num_rows_, 1.0);
    std::vector<int> slack_of(num_rows_, -1);
    int cols = n;
    for (int i = 0; i < num_rows_; ++i) {
      if (lp_.senses[i] != RowSense::kEq) slack_of[i] = cols++;
      if (lp_.rhs[i] < 0.0) sign[i] = -1.0;
    }
    // A row can start with its slack basic when the slack enters with +1.
    std::vector<int> artificial_of(num_rows_, -1);
    first_artificial_ = cols;
    for (int i = 0; i < num_rows_; ++i) {
      const double slack_coef = lp_.senses[i] == RowSense::kLe ? 1.0 : -1.0;
      const bool slack_basic = slack_of[i] >= 0 && slack_coef * sign[i] > 0.0;
      if (!slack_basic) artificial_of[i] = cols++;
    }
    num_cols_ = cols;
    has_artificials_ = num_cols_ > first_artificial_;
    width_ = num_cols_ + 1;
    data_.assign(static_cast<std::size_t>(num_rows_ + 1) * width_, 0.0);
    upper_.assign(num_cols_, kInf);
    eligible_.assign(num_cols_, true);
    flipped_.assign(num_cols_, false);
    for (int j = 0; j < n; ++j) upper_[j] = lp_.upper[j];
    for (int j = first_artificial_; j < num_cols_; ++j) eligible_[j] = false;
    basis_.assign(num_rows_, -1);

    for (int i = 0; i < num_rows_; ++i) {
      double* r = row(i);
      for (int j = 0; j < n; ++j) r[j] = sign[i] * lp_.rows[i][j];
      if (slack_of[i] >= 0) {
        r[slack_of[i]] = sign[i] * (lp_.senses[i] == RowSense::kLe ? 1.0 : -1.0);
      }
      r[rhs_col()] = sign[i] * lp_.rhs[i];
      if (artificial_of[i] >= 0) {
        r[artificial_of[i]] = 1.0;
        basis_[i] = artificial_of[i];
      } else {
        basis_[i] = slack_of[i];
      }
    }
  }

  void phase_one_objective() {
    double* obj = row(obj_row());
    std::fill(obj, obj + width_, 0.0);
    for (int i = 0; i < num_rows_; ++i) {
      if (basis_[i] < first_artificial_) continue;
      const double* r = row(i);
      for (int j = 0; j <= num_cols_; ++j) {
        if (j >= first_artificial_ && j < num_cols_) continue;
        obj[j] -= r[j];
      }
    }
  }

  void phase_two_objective() {
    double* obj = row(obj_row());
    std::fill(obj, obj + width_, 0.0);
    double constant = 0.0;
    for (int j = 0; j < lp_.num_vars; ++j) {
      obj[j] = flipped_[j] ? -lp_.cost[j] : lp_.cost[j];
      if (flipped_[j]) constant += lp_.cost[j] * upper_[j];
    }
    obj[rhs_col()] = -constant;
    for (int i = 0; i < num_rows_; ++i) {
      const double cb = obj[basis_[i]];
      if (cb == 0.0) continue;
      const double* r = row(i);
      for (int j = 0; j <= num_cols_; ++j) obj[j] -= cb * r[j];
      obj[basis_[i]] = 0.0;
    }
  }

  // Substitutes y_j = u_j - y_j' for a nonbasic column.
  void flip_nonbasic(int j) {
    const double u = upper_[j];
    for (int i = 0; i <= num_rows_; ++i) {
      double& a = cell(i, j);
      if (a == 0.0) continue;
      cell(i, rhs_col()) -= a * u;
      a = -a;
    }
    flipped_[j] = !flipped_[j];
  }

  // Substitutes y_b = u_b - y_b' for the basic variable of row r.
  void flip_basic(int r) {
    const int b = basis_[r];
    double* rr = row(r);
    for (int j = 0; j < num_cols_; ++j) {
      if (j != b) rr[j] = -rr[j];
    }
    rr[rhs_col()] = upper_[b] - rr[rhs_col()];
    flipped_[b] = !flipped_[b];
  }

  void pivot(int r, int e) {
    double* pr = row(r);
    const double p = pr[e];
    nonzero_.clear();
    for (int j = 0; j <= num_cols_; ++j) {
      if (pr[j] != 0.0) {
        pr[j] /= p;
        nonzero_.push_back(j);
      }
    }
    pr[e] = 1.0;
    for (int i = 0; i <= num_rows_; ++i) {
      if (i == r) continue;
      double* ri = row(i);
      const double f = ri[e];
      if (f == 0.0) continue;
      for (int j : nonzero_) ri[j] -= f * pr[j];
      ri[e] = 0.0;
    }
    basis_[r] = e;
  }

  void iterate(long& pivots) {
    std::vector<char> is_basic(num_cols_, 0);
    for (int b : basis_) is_basic[b] = 1;
    const long max_iterations = 50000L + 100L * (num_rows_ + num_cols_);
    int degenerate_run = 0;
    for (long iter = 0;; ++iter) {
      if (iter > max_iterations) throw InternalError("simplex iteration limit exceeded");
      const bool bland = degenerate_run >= kDegenerateRunBeforeBland;
      const double* obj = row(obj_row());
      int entering = -1;
      double best = -kCostTol;
      for (int j = 0; j < num_cols_; ++j) {
        if (is_basic[j] || !eligible_[j] || upper_[j] == 0.0) continue;
        if (obj[j] < best) {
          entering = j;
          if (bland) break;
          best = obj[j];
        }
      }
      if (entering < 0) return;

      double theta = upper_[entering];
      int leave = -1;
      bool leave_at_upper = false;
      double leave_alpha = 0.0;
      for (int i = 0; i < num_rows_; ++i) {
        const double alpha = cell(i, entering);
        const int b = basis_[i];
        double ratio;
        bool at_upper;
        if (alpha > kPivotTol) {
          ratio = std::max(0.0, cell(i, rhs_col())) / alpha;
          at_upper = false;
        } else if (alpha < -kPivotTol && upper_[b] < kInf) {
          ratio = std::max(0.0, upper_[b] - cell(i, rhs_col())) / -alpha;
          at_upper = true;
        } else {
          continue;
        }
        bool take = false;
        if (ratio < theta - kRatioTieTol) {
          take = true;
        } else if (ratio <= theta + kRatioTieTol && leave >= 0) {
          take = bland ? b < basis_[leave] : std::abs(alpha) > std::abs(leave_alpha);
        }
        if (take) {
          theta = ratio;
          leave = i;
          leave_at_upper = at_upper;
          leave_alpha = alpha;
        }
      }
      if (leave < 0 && theta == kInf) throw InternalError("LP relaxation unbounded");
      degenerate_run = theta <= kRatioTieTol ? degenerate_run + 1 : 0;
      ++pivots;
      if (leave < 0) {
        flip_nonbasic(entering);
        continue;
      }
      if (leave_at_upper) flip_basic(leave);
      is_basic[basis_[leave]] = 0;
      pivot(leave, entering);
      is_basic[entering] = 1;
    }
  }

  const DenseLp& lp_;
  int num_rows_ = 0;
  int num_cols_ = 0;
  int width_ = 0;
  int first_artificial_ = 0;
  bool has_artificials_ = false;
  std::vector<double> data_;
  std::vector<double> upper_;
  std::vector<bool> eligible_;
  std::vector<bool> flipped_;
  std::vector<int> basis_;
  std::vector<int> nonzero_;
};

}  // namespace

LpResult solve_lp(const DenseLp& lp) {
  Tableau tableau(lp);
  return tableau.run();
}

}  // namespace msd::detail
