#pragma once

// Geometry of the cone E^d = (0, inf)^d: the functional
//
//     tau(A) = sup over {x > 0, min(x) = 1} of min((Ax)^+),
//
// which characterizes cone-preserving matrices (finite positive tau iff
// A^{-1}(E^d) is contained in E^d), a brute-force capped oracle for it, and
// Monte Carlo evaluation of Breiman-type limit measures for diagonal random
// multipliers.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <thread>
#include <vector>

#include "extremal_sv/math.hpp"
#include "extremal_sv/model.hpp"
#include "extremal_sv/rng.hpp"

namespace extremal_sv {

class SquareMatrix {
  public:
    explicit SquareMatrix(std::size_t dim, double fill = 0.0)
        : dim_(dim), data_(dim * dim, fill) {
        if (dim == 0) throw std::invalid_argument("matrix: dimension must be positive");
    }

    static SquareMatrix identity(std::size_t dim) {
        SquareMatrix m(dim);
        for (std::size_t i = 0; i < dim; ++i) m(i, i) = 1.0;
        return m;
    }

    static SquareMatrix diagonal(const std::vector<double>& d) {
        SquareMatrix m(d.size());
        for (std::size_t i = 0; i < d.size(); ++i) m(i, i) = d[i];
        return m;
    }

    static SquareMatrix from_rows(const std::vector<std::vector<double>>& rows) {
        SquareMatrix m(rows.size());
        for (std::size_t i = 0; i < rows.size(); ++i) {
            if (rows[i].size() != rows.size())
                throw std::invalid_argument("matrix: rows must form a square array");
            for (std::size_t j = 0; j < rows.size(); ++j) m(i, j) = rows[i][j];
        }
        return m;
    }

    std::size_t dim() const { return dim_; }
    double& operator()(std::size_t i, std::size_t j) { return data_[i * dim_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data_[i * dim_ + j]; }

    double max_abs() const {
        double m = 0.0;
        for (double v : data_) m = std::max(m, std::abs(v));
        return m;
    }

    std::vector<double> apply(const std::vector<double>& x) const {
        std::vector<double> y(dim_, 0.0);
        for (std::size_t i = 0; i < dim_; ++i)
            for (std::size_t j = 0; j < dim_; ++j) y[i] += (*this)(i, j) * x[j];
        return y;
    }

    /// Gauss-Jordan inverse with partial pivoting; nullopt when singular.
    std::optional<SquareMatrix> inverse() const {
        const std::size_t d = dim_;
        SquareMatrix work = *this;
        SquareMatrix inv = identity(d);
        const double tol = std::max(max_abs(), 1.0) * 1e-13;
        for (std::size_t col = 0; col < d; ++col) {
            std::size_t pivot = col;
            for (std::size_t r = col + 1; r < d; ++r)
                if (std::abs(work(r, col)) > std::abs(work(pivot, col))) pivot = r;
            if (std::abs(work(pivot, col)) <= tol) return std::nullopt;
            if (pivot != col) {
                for (std::size_t j = 0; j < d; ++j) {
                    std::swap(work(pivot, j), work(col, j));
                    std::swap(inv(pivot, j), inv(col, j));
                }
            }
            const double inv_pivot = 1.0 / work(col, col);
            for (std::size_t j = 0; j < d; ++j) {
                work(col, j) *= inv_pivot;
                inv(col, j) *= inv_pivot;
            }
            for (std::size_t r = 0; r < d; ++r) {
                if (r == col) continue;
                const double f = work(r, col);
                if (f == 0.0) continue;
                for (std::size_t j = 0; j < d; ++j) {
                    work(r, j) -= f * work(col, j);
                    inv(r, j) -= f * inv(col, j);
                }
            }
        }
        return inv;
    }

  private:
    std::size_t dim_;
    std::vector<double> data_;
};

namespace detail {

inline double min_positive_part(const std::vector<double>& y) {
    double m = inf;
    for (double v : y) m = std::min(m, std::max(v, 0.0));
    return m;
}

// Does some x > 0 map to Ax > 0? Used only to split the degenerate cases
// tau in {0, inf}: a single witness forces tau = inf, and the probe failing
// on a dense ladder of directions is read as tau = 0.
inline bool cone_image_probe(const SquareMatrix& A) {
    const std::size_t d = A.dim();
    const double positive = 1e-10 * std::max(A.max_abs(), 1e-300);

    std::vector<double> ladder;
    for (int e = 0; e <= 40; ++e) ladder.push_back(std::pow(2.0, e));

    std::vector<double> x(d, 1.0);
    const auto test = [&](const std::vector<double>& v) {
        const auto y = A.apply(v);
        return *std::min_element(y.begin(), y.end()) > positive * *std::max_element(v.begin(), v.end());
    };
    if (test(x)) return true;

    if (d <= 3) {
        // exhaustive over faces of the ladder grid
        for (std::size_t fixed = 0; fixed < d; ++fixed) {
            std::vector<std::size_t> idx(d - 1, 0);
            for (;;) {
                std::size_t pos = 0;
                for (std::size_t j = 0; j < d; ++j)
                    x[j] = (j == fixed) ? 1.0 : ladder[idx[pos++]];
                if (test(x)) return true;
                std::size_t carry = 0;
                while (carry < idx.size() && ++idx[carry] == ladder.size()) idx[carry++] = 0;
                if (carry == idx.size()) break;
            }
        }
        return false;
    }
    // higher dimensions: seeded random directions
    RandomStream rs(0x7a75u, 0);
    for (int trial = 0; trial < 20000; ++trial) {
        for (auto& xi : x) xi = std::exp(3.0 * rs.normal());
        const double mn = *std::min_element(x.begin(), x.end());
        for (auto& xi : x) xi /= mn;
        if (test(x)) return true;
    }
    return false;
}

}  // namespace detail

/// tau(A). Finite positive values come from the inverse formula
/// max_i 1/(row sum of A^{-1})_i and certify that A^{-1}(E^d) lies in E^d
/// (equivalently, A^{-1} is entrywise nonnegative). All other matrices have
/// tau in {0, inf}; the two are told apart by probing for a direction x > 0
/// with Ax > 0.
inline double tau(const SquareMatrix& A) {
    const auto inv = A.inverse();
    if (inv) {
        const std::size_t d = A.dim();
        const double negtol = -1e-12 * std::max(inv->max_abs(), 1.0);
        bool nonnegative = true;
        for (std::size_t i = 0; i < d && nonnegative; ++i)
            for (std::size_t j = 0; j < d; ++j)
                if ((*inv)(i, j) < negtol) {
                    nonnegative = false;
                    break;
                }
        if (nonnegative) {
            double min_rowsum = inf;
            for (std::size_t i = 0; i < d; ++i) {
                double s = 0.0;
                for (std::size_t j = 0; j < d; ++j) s += (*inv)(i, j);
                min_rowsum = std::min(min_rowsum, s);
            }
            if (min_rowsum > 0.0) return 1.0 / min_rowsum;
            return inf;  // a zero row sum: 1/0^+ reads as infinity
        }
    }
    return detail::cone_image_probe(A) ? inf : 0.0;
}

/// Brute-force capped supremum of min((Ax)^+) over {x >= 1 componentwise
/// with min(x) = 1, coordinates <= 1e6}. A log-spaced grid scan per face is
/// refined by nested ternary search: on each face the objective is a min of
/// linear functions of the free coordinates, hence concave, and partial
/// maximization preserves concavity. Cross-validation tool for tau;
/// restricted to d in {2, 3}.
inline double tau_numeric_oracle(const SquareMatrix& A, int grid_resolution) {
    const std::size_t d = A.dim();
    if (d != 2 && d != 3)
        throw std::invalid_argument("tau_numeric_oracle: only d in {2, 3} supported");
    if (grid_resolution < 100)
        throw std::invalid_argument("tau_numeric_oracle: resolution must be >= 100");

    constexpr double cap = 1e6;
    const double step = std::pow(cap, 1.0 / grid_resolution);

    double best = 0.0;
    std::vector<double> x(d, 1.0);
    const auto value = [&](const std::vector<double>& v) {
        return detail::min_positive_part(A.apply(v));
    };
    // Unclamped objective for the refinement: a min of linear functions is
    // concave, so ternary search is exact per face (any interior plateau of
    // a concave function is its maximum). Clamping would add zero plateaus
    // that are only quasi-concave and can mislead the bracketing.
    const auto raw_value = [&](const std::vector<double>& v) {
        const auto y = A.apply(v);
        return *std::min_element(y.begin(), y.end());
    };

    const auto ternary_max = [](auto&& f, double lo, double hi) {
        for (int it = 0; it < 200; ++it) {
            const double m1 = lo + (hi - lo) / 3.0;
            const double m2 = hi - (hi - lo) / 3.0;
            if (f(m1) < f(m2))
                lo = m1;
            else
                hi = m2;
        }
        return f(0.5 * (lo + hi));
    };

    for (std::size_t fixed = 0; fixed < d; ++fixed) {
        std::vector<std::size_t> free;
        for (std::size_t j = 0; j < d; ++j)
            if (j != fixed) free.push_back(j);

        // grid scan of the face x_fixed = 1
        std::vector<int> idx(free.size(), 0);
        for (;;) {
            std::fill(x.begin(), x.end(), 1.0);
            for (std::size_t k = 0; k < free.size(); ++k)
                x[free[k]] = std::pow(step, idx[k]);
            best = std::max(best, value(x));
            std::size_t carry = 0;
            while (carry < idx.size() && ++idx[carry] > grid_resolution) idx[carry++] = 0;
            if (carry == idx.size()) break;
        }

        // exact-face refinement by (nested) ternary search
        std::fill(x.begin(), x.end(), 1.0);
        double face_max;
        if (free.size() == 1) {
            face_max = ternary_max(
                [&](double u) {
                    x[free[0]] = u;
                    return raw_value(x);
                },
                1.0, cap);
        } else {
            face_max = ternary_max(
                [&](double u) {
                    x[free[0]] = u;
                    return ternary_max(
                        [&](double v) {
                            x[free[1]] = v;
                            return raw_value(x);
                        },
                        1.0, cap);
                },
                1.0, cap);
        }
        best = std::max(best, std::max(face_max, 0.0));
    }
    return best;
}

// ---------------------------------------------------------------------------
// Diagonal multiplier families for the Breiman limit.

struct MultiplierFamily {
    enum class Kind { constant, lognormal, folded_student_t, eps_positive_part };

    Kind kind = Kind::constant;
    double constant = 1.0;
    double mu = 0.0, sigma = 1.0;  // lognormal
    double nu = 0.0;               // folded student t
    std::optional<EpsFamily> eps;

    static MultiplierFamily make_constant(double c) {
        if (!(c > 0.0)) throw std::invalid_argument("multiplier: constant must be positive");
        MultiplierFamily f;
        f.kind = Kind::constant;
        f.constant = c;
        return f;
    }
    static MultiplierFamily make_lognormal(double mu, double sigma) {
        MultiplierFamily f;
        f.kind = Kind::lognormal;
        f.mu = mu;
        f.sigma = sigma;
        return f;
    }
    static MultiplierFamily make_folded_student_t(double nu) {
        if (!(nu > 0.0)) throw std::invalid_argument("multiplier: nu must be positive");
        MultiplierFamily f;
        f.kind = Kind::folded_student_t;
        f.nu = nu;
        return f;
    }
    static MultiplierFamily make_eps_positive_part(const EpsFamily& e) {
        MultiplierFamily f;
        f.kind = Kind::eps_positive_part;
        f.eps = e;
        return f;
    }

    /// sup of r with E(D^r) < inf.
    double moment_bound() const {
        switch (kind) {
            case Kind::constant:
            case Kind::lognormal:
                return inf;
            case Kind::folded_student_t:
                return nu;
            case Kind::eps_positive_part:
                return eps->moment_bound();
        }
        return 0.0;
    }

    double sample(RandomStream& rs) const {
        switch (kind) {
            case Kind::constant:
                return constant;
            case Kind::lognormal:
                return rs.lognormal(mu, sigma);
            case Kind::folded_student_t:
                return std::abs(rs.student_t(nu));
            case Kind::eps_positive_part:
                return std::max(eps->sample(rs), 0.0);
        }
        return 0.0;
    }
};

struct ConeRectangle {
    std::vector<double> lower;  // the set X_i (lower_i, inf)

    void validate() const {
        if (lower.empty()) throw std::invalid_argument("rectangle: empty corner");
        for (double s : lower)
            if (!(s > 0.0))
                throw std::invalid_argument("rectangle: corner must be strictly positive");
    }
};

/// Breiman limit for a diagonal multiplier matrix acting on a vector whose
/// cone limit measure is the product of per-axis Pareto(alpha) measures:
///
///     E nu(A^{-1} B) = E prod_i (s_i / D_i)^{-alpha} 1{D_i > 0},
///
/// estimated by Monte Carlo over independent multiplier draws. The moment
/// condition E(tau(A)^{d alpha + delta}) < inf is checked symbolically per
/// family before sampling (tau of a diagonal matrix is its largest entry).
inline MonteCarloValue breiman_limit_diagonal(double axis_exponent,
                                              const std::vector<MultiplierFamily>& multipliers,
                                              const ConeRectangle& rect,
                                              std::uint64_t mc_samples, std::uint64_t seed,
                                              int workers = 0) {
    rect.validate();
    if (multipliers.size() != rect.lower.size())
        throw std::invalid_argument("breiman_limit_diagonal: dimension mismatch");
    if (!(axis_exponent > 0.0))
        throw std::invalid_argument("breiman_limit_diagonal: exponent must be positive");
    const double d = static_cast<double>(multipliers.size());
    for (const auto& f : multipliers) {
        if (!(f.moment_bound() > d * axis_exponent))
            throw std::invalid_argument(
                "breiman_limit_diagonal: moment condition E(tau^{d*alpha+delta}) unverifiable "
                "for this multiplier family");
    }

    bool all_constant = true;
    for (const auto& f : multipliers) all_constant &= f.kind == MultiplierFamily::Kind::constant;
    if (all_constant) {
        double v = 1.0;
        for (std::size_t j = 0; j < multipliers.size(); ++j)
            v *= std::pow(multipliers[j].constant / rect.lower[j], axis_exponent);
        return {v, 0.0, 0};
    }

    constexpr std::uint64_t chunk = 1 << 16;
    const std::uint64_t nchunks = (mc_samples + chunk - 1) / chunk;
    std::vector<MeanAccumulator> partial(nchunks);

    if (workers <= 0) workers = static_cast<int>(std::thread::hardware_concurrency());
    workers = std::max(1, std::min<int>(workers, static_cast<int>(nchunks)));

    std::atomic<std::uint64_t> next{0};
    auto run = [&]() {
        for (;;) {
            const std::uint64_t c = next.fetch_add(1);
            if (c >= nchunks) return;
            RandomStream rs(seed, c);
            MeanAccumulator acc;
            const std::uint64_t lo = c * chunk;
            const std::uint64_t hi = std::min(lo + chunk, mc_samples);
            for (std::uint64_t s = lo; s < hi; ++s) {
                double v = 1.0;
                for (std::size_t j = 0; j < multipliers.size(); ++j) {
                    const double dj = multipliers[j].sample(rs);
                    if (dj <= 0.0) {
                        v = 0.0;
                        break;
                    }
                    v *= std::pow(dj / rect.lower[j], axis_exponent);
                }
                acc.add(v);
            }
            partial[c] = acc;
        }
    };
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(run);
    for (auto& t : pool) t.join();

    MeanAccumulator total;
    for (const auto& p : partial) total.merge(p);  // fixed chunk order
    return {total.mean(), total.std_error(), total.n};
}

}  // namespace extremal_sv
