#include "heatgate/errors.hpp"
#include "heatgate/fem.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <memory>
#include <stdexcept>
#include <string>

namespace heatgate {

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        s += a[i] * b[i];
    }
    return s;
}

// Nine-point pattern on an mx by my node grid, columns sorted within each row.
SparseMatrix nine_point_pattern(int mx, int my) {
    SparseMatrix m;
    m.rows = mx * my;
    m.row_ptr.reserve(m.rows + 1);
    m.row_ptr.push_back(0);
    for (int j = 0; j < my; ++j) {
        for (int i = 0; i < mx; ++i) {
            for (int dj = -1; dj <= 1; ++dj) {
                for (int di = -1; di <= 1; ++di) {
                    if (i + di >= 0 && i + di < mx && j + dj >= 0 && j + dj < my) {
                        m.col_idx.push_back((j + dj) * mx + i + di);
                    }
                }
            }
            m.row_ptr.push_back(static_cast<int>(m.col_idx.size()));
        }
    }
    m.values.assign(m.col_idx.size(), 0.0);
    return m;
}

double& entry(SparseMatrix& m, int r, int c) {
    const auto first = m.col_idx.begin() + m.row_ptr[r];
    const auto last = m.col_idx.begin() + m.row_ptr[r + 1];
    const auto it = std::lower_bound(first, last, c);
    if (it == last || *it != c) {
        throw std::logic_error("coarse operator entry outside the nine-point pattern");
    }
    return m.values[it - m.col_idx.begin()];
}

// Linear interpolation weights from a coarse 1D index set onto one fine index.
struct Interp {
    int lo = 0;
    int hi = 0;
    double w_lo = 1.0;
    double w_hi = 0.0;
};

// Every other fine point, plus the last one when the count is even.
std::vector<Interp> coarsen_axis(int fine, int& coarse) {
    std::vector<int> points;
    for (int i = 0; i < fine; i += 2) {
        points.push_back(i);
    }
    if (points.back() != fine - 1) {
        points.push_back(fine - 1);
    }
    coarse = static_cast<int>(points.size());

    std::vector<Interp> w(fine);
    std::size_t c = 0;
    for (int i = 0; i < fine; ++i) {
        while (c + 1 < points.size() && points[c + 1] <= i) {
            ++c;
        }
        if (points[c] == i) {
            w[i] = {static_cast<int>(c), static_cast<int>(c), 1.0, 0.0};
        } else {
            const double span = points[c + 1] - points[c];
            w[i] = {static_cast<int>(c), static_cast<int>(c + 1), (points[c + 1] - i) / span,
                    (i - points[c]) / span};
        }
    }
    return w;
}

struct Stencil {
    std::array<int, 4> coarse{};
    std::array<double, 4> weight{};
    int size = 0;
};

class Preconditioning {
public:
    virtual ~Preconditioning() = default;
    // z = M^-1 r on the reduced (free-node) vectors.
    virtual void apply(std::span<const double> r, std::span<double> z) const = 0;
};

class JacobiPreconditioner final : public Preconditioning {
public:
    explicit JacobiPreconditioner(const SparseMatrix& a) : inv_diag_(a.diagonal()) {
        for (auto& d : inv_diag_) {
            d = 1.0 / d;
        }
    }

    void apply(std::span<const double> r, std::span<double> z) const override {
        for (std::size_t i = 0; i < r.size(); ++i) {
            z[i] = inv_diag_[i] * r[i];
        }
    }

private:
    std::vector<double> inv_diag_;
};

/// Geometric V-cycle on the full node grid with Galerkin coarse operators.
///
/// Constrained nodes become identity rows on the finest level and are masked out of the
/// prolongation, so the cycle acts on the free subspace only. One symmetric Gauss-Seidel
/// sweep before and after the coarse correction keeps the preconditioner symmetric.
class MultigridPreconditioner final : public Preconditioning {
public:
    explicit MultigridPreconditioner(const LinearSystem& system) : system_(system) {
        const int mx = system.grid_nodes_x;
        const int my = system.grid_nodes_y;
        if (mx * my != system.stiffness.rows) {
            throw std::invalid_argument("multigrid needs the node-grid shape of the system");
        }
        free_mask_.assign(system.stiffness.rows, 0);
        for (int node : system.free_nodes) {
            free_mask_[node] = 1;
        }

        Level finest;
        finest.mx = mx;
        finest.my = my;
        finest.a = system.stiffness;
        auto& a = finest.a;
        for (int r = 0; r < a.rows; ++r) {
            for (int k = a.row_ptr[r]; k < a.row_ptr[r + 1]; ++k) {
                const int c = a.col_idx[k];
                if (!free_mask_[r] || !free_mask_[c]) {
                    a.values[k] = (r == c) ? 1.0 : 0.0;
                }
            }
        }
        levels_.push_back(std::move(finest));

        while (levels_.back().mx * levels_.back().my > kCoarsestSize && levels_.back().mx >= 5 &&
               levels_.back().my >= 5) {
            add_coarse_level();
        }
        for (auto& level : levels_) {
            level.diag = level.a.diagonal();
            level.x.assign(level.a.rows, 0.0);
            level.b.assign(level.a.rows, 0.0);
            level.r.assign(level.a.rows, 0.0);
        }
        factor_coarsest();
    }

    void apply(std::span<const double> r, std::span<double> z) const override {
        auto& top = levels_.front();
        std::fill(top.b.begin(), top.b.end(), 0.0);
        for (std::size_t i = 0; i < r.size(); ++i) {
            top.b[system_.free_nodes[i]] = r[i];
        }
        cycle(0);
        for (std::size_t i = 0; i < z.size(); ++i) {
            z[i] = top.x[system_.free_nodes[i]];
        }
    }

private:
    static constexpr int kCoarsestSize = 100;

    struct Level {
        int mx = 0;
        int my = 0;
        SparseMatrix a;
        std::vector<double> diag;
        // Prolongation stencil of each node of this level onto the next coarser level.
        std::vector<Stencil> prolong;
        mutable std::vector<double> x;
        mutable std::vector<double> b;
        mutable std::vector<double> r;
    };

    void add_coarse_level() {
        Level& fine = levels_.back();
        Level coarse;
        const auto px = coarsen_axis(fine.mx, coarse.mx);
        const auto py = coarsen_axis(fine.my, coarse.my);
        fine.prolong.resize(static_cast<std::size_t>(fine.mx) * fine.my);
        for (int node = 0; node < fine.mx * fine.my; ++node) {
            const Interp& wx = px[node % fine.mx];
            const Interp& wy = py[node / fine.mx];
            Stencil& st = fine.prolong[node];
            const std::array<std::pair<int, double>, 2> xs{{{wx.lo, wx.w_lo}, {wx.hi, wx.w_hi}}};
            const std::array<std::pair<int, double>, 2> ys{{{wy.lo, wy.w_lo}, {wy.hi, wy.w_hi}}};
            for (const auto& [cy, vy] : ys) {
                for (const auto& [cx, vx] : xs) {
                    if (vx != 0.0 && vy != 0.0) {
                        st.coarse[st.size] = cy * coarse.mx + cx;
                        st.weight[st.size] = vx * vy;
                        ++st.size;
                    }
                }
            }
        }
        coarse.a = nine_point_pattern(coarse.mx, coarse.my);
        const bool masked = levels_.size() == 1;

        // A_c = P^T A P, accumulated entry by entry of the fine operator.
        const auto& af = fine.a;
        for (int r = 0; r < af.rows; ++r) {
            if (masked && !free_mask_[r]) {
                continue;
            }
            const Stencil& pr = fine.prolong[r];
            for (int k = af.row_ptr[r]; k < af.row_ptr[r + 1]; ++k) {
                const int c = af.col_idx[k];
                if (masked && !free_mask_[c]) {
                    continue;
                }
                const Stencil& pc = fine.prolong[c];
                for (int i = 0; i < pr.size; ++i) {
                    for (int j = 0; j < pc.size; ++j) {
                        entry(coarse.a, pr.coarse[i], pc.coarse[j]) +=
                            pr.weight[i] * af.values[k] * pc.weight[j];
                    }
                }
            }
        }
        // Coarse nodes whose whole support is constrained get an identity row.
        for (int r = 0; r < coarse.a.rows; ++r) {
            double& d = entry(coarse.a, r, r);
            if (d == 0.0) {
                d = 1.0;
            }
        }
        levels_.push_back(std::move(coarse));
    }

    void factor_coarsest() {
        const Level& c = levels_.back();
        const int n = c.a.rows;
        dense_.assign(static_cast<std::size_t>(n) * n, 0.0);
        for (int r = 0; r < n; ++r) {
            for (int k = c.a.row_ptr[r]; k < c.a.row_ptr[r + 1]; ++k) {
                dense_[static_cast<std::size_t>(r) * n + c.a.col_idx[k]] = c.a.values[k];
            }
        }
        // In-place Cholesky, lower triangle.
        for (int j = 0; j < n; ++j) {
            double d = dense_[j * n + j];
            for (int k = 0; k < j; ++k) {
                d -= dense_[j * n + k] * dense_[j * n + k];
            }
            if (!(d > 0.0)) {
                throw SingularSystem("coarse multigrid operator is not positive definite");
            }
            d = std::sqrt(d);
            dense_[j * n + j] = d;
            for (int i = j + 1; i < n; ++i) {
                double s = dense_[i * n + j];
                for (int k = 0; k < j; ++k) {
                    s -= dense_[i * n + k] * dense_[j * n + k];
                }
                dense_[i * n + j] = s / d;
            }
        }
    }

    void solve_coarsest(const Level& c) const {
        const int n = c.a.rows;
        auto& x = c.x;
        for (int i = 0; i < n; ++i) {
            double s = c.b[i];
            for (int k = 0; k < i; ++k) {
                s -= dense_[i * n + k] * x[k];
            }
            x[i] = s / dense_[i * n + i];
        }
        for (int i = n - 1; i >= 0; --i) {
            double s = x[i];
            for (int k = i + 1; k < n; ++k) {
                s -= dense_[k * n + i] * x[k];
            }
            x[i] = s / dense_[i * n + i];
        }
    }

    static void gauss_seidel(const Level& l, bool forward) {
        const auto& a = l.a;
        const int n = a.rows;
        for (int step = 0; step < n; ++step) {
            const int r = forward ? step : n - 1 - step;
            double s = l.b[r];
            for (int k = a.row_ptr[r]; k < a.row_ptr[r + 1]; ++k) {
                const int c = a.col_idx[k];
                if (c != r) {
                    s -= a.values[k] * l.x[c];
                }
            }
            l.x[r] = s / l.diag[r];
        }
    }

    void cycle(std::size_t depth) const {
        const Level& l = levels_[depth];
        if (depth + 1 == levels_.size()) {
            solve_coarsest(l);
            return;
        }
        const Level& c = levels_[depth + 1];
        std::fill(l.x.begin(), l.x.end(), 0.0);
        gauss_seidel(l, true);

        l.a.multiply(l.x, l.r);
        for (int i = 0; i < l.a.rows; ++i) {
            l.r[i] = l.b[i] - l.r[i];
        }
        if (depth == 0) {
            for (int i = 0; i < l.a.rows; ++i) {
                l.r[i] *= free_mask_[i];
            }
        }
        std::fill(c.b.begin(), c.b.end(), 0.0);
        for (int node = 0; node < l.a.rows; ++node) {
            if (l.r[node] == 0.0) {
                continue;
            }
            const Stencil& st = l.prolong[node];
            for (int i = 0; i < st.size; ++i) {
                c.b[st.coarse[i]] += st.weight[i] * l.r[node];
            }
        }

        cycle(depth + 1);

        for (int node = 0; node < l.a.rows; ++node) {
            if (depth == 0 && !free_mask_[node]) {
                continue;
            }
            const Stencil& st = l.prolong[node];
            double e = 0.0;
            for (int i = 0; i < st.size; ++i) {
                e += st.weight[i] * c.x[st.coarse[i]];
            }
            l.x[node] += e;
        }
        gauss_seidel(l, false);
    }

    const LinearSystem& system_;
    std::vector<char> free_mask_;
    std::vector<Level> levels_;
    std::vector<double> dense_;
};

std::unique_ptr<Preconditioning> make_preconditioner(const LinearSystem& system, Preconditioner kind) {
    if (kind == Preconditioner::multigrid && system.grid_nodes_x * system.grid_nodes_y ==
                                                 system.stiffness.rows) {
        return std::make_unique<MultigridPreconditioner>(system);
    }
    return std::make_unique<JacobiPreconditioner>(system.reduced_stiffness);
}

} // namespace

std::string_view to_string(Preconditioner p) {
    return p == Preconditioner::jacobi ? "jacobi" : "multigrid";
}

Preconditioner parse_preconditioner(std::string_view text) {
    if (text == "jacobi") {
        return Preconditioner::jacobi;
    }
    if (text == "multigrid") {
        return Preconditioner::multigrid;
    }
    throw std::invalid_argument("preconditioner: expected jacobi or multigrid, got '" +
                                std::string(text) + "'");
}

Solution solve(const LinearSystem& system, const SolveOptions& options,
               std::span<const double> initial_guess) {
    const int n = system.unknowns();
    const auto& a = system.reduced_stiffness;
    const auto& b = system.reduced_load;

    Solution out;
    out.temperature.values = system.prescribed;
    const double b_norm = std::sqrt(dot(b, b));
    if (n == 0 || b_norm == 0.0) {
        return out;
    }

    std::vector<double> x(n, 0.0);
    if (!initial_guess.empty()) {
        if (initial_guess.size() != system.prescribed.size()) {
            throw std::invalid_argument("initial guess length does not match node count");
        }
        for (int i = 0; i < n; ++i) {
            x[i] = initial_guess[system.free_nodes[i]];
        }
    }

    const auto precond = make_preconditioner(system, options.preconditioner);

    std::vector<double> r(n);
    std::vector<double> z(n);
    std::vector<double> p(n);
    std::vector<double> ap(n);
    a.multiply(x, r);
    for (int i = 0; i < n; ++i) {
        r[i] = b[i] - r[i];
    }
    precond->apply(r, z);
    p = z;
    double rz = dot(r, z);
    double residual = std::sqrt(dot(r, r)) / b_norm;
    const int cap = options.max_iterations > 0 ? options.max_iterations : 10 * n;

    int it = 0;
    while (residual > options.relative_tolerance) {
        if (it >= cap) {
            throw SolverFailure("conjugate gradients did not converge after " + std::to_string(it) +
                                    " iterations (relative residual " + std::to_string(residual) + ")",
                                it, residual);
        }
        a.multiply(p, ap);
        const double alpha = rz / dot(p, ap);
        double rr = 0.0;
        for (int i = 0; i < n; ++i) {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
            rr += r[i] * r[i];
        }
        precond->apply(r, z);
        const double rz_next = dot(r, z);
        const double beta = rz_next / rz;
        rz = rz_next;
        for (int i = 0; i < n; ++i) {
            p[i] = z[i] + beta * p[i];
        }
        residual = std::sqrt(rr) / b_norm;
        ++it;
    }

    for (int i = 0; i < n; ++i) {
        out.temperature.values[system.free_nodes[i]] = x[i];
    }
    out.stats = {it, residual};
    return out;
}

} // namespace heatgate
