#pragma once

// Sparse direct solve of the complex system through UMFPACK, after symmetric
// diagonal scaling, with a few steps of iterative refinement.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <complex>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/Sparse>
#include <umfpack.h>

#include "helicable/assembly.hpp"
#include "helicable/error.hpp"

namespace helicable {

struct SolveOptions {
    double tol = 1e-10;             // relative residual ||b - Ax|| / ||b||
    double singular_rcond = 1e-12;  // pivot ratio below which A is deemed singular
    int max_refinement = 3;
};

struct SolveReport {
    double relative_residual = 0.0;
    double rcond = 0.0;
    long factor_nonzeros = 0;
    int refinement_steps = 0;
    double seconds = 0.0;
};

struct SolveResult {
    Eigen::VectorXcd x;
    SolveReport report;
};

namespace detail {

inline std::string sci(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3e", v);
    return buf;
}

struct UmfSymbolicDeleter {
    void operator()(void* p) const { umfpack_zi_free_symbolic(&p); }
};
struct UmfNumericDeleter {
    void operator()(void* p) const { umfpack_zi_free_numeric(&p); }
};

/// Owns an LU factorisation of a compressed column complex matrix.
class UmfpackLU {
public:
    explicit UmfpackLU(const SparseMatrixC& a) : a_(a)
    {
        a_.makeCompressed();
        umfpack_zi_defaults(control_);
        const int n = static_cast<int>(a_.rows());
        const int* ap = a_.outerIndexPtr();
        const int* ai = a_.innerIndexPtr();
        const double* ax = reinterpret_cast<const double*>(a_.valuePtr());

        void* sym = nullptr;
        int status = umfpack_zi_symbolic(n, n, ap, ai, ax, nullptr, &sym, control_, info_);
        symbolic_.reset(sym);
        if (status == UMFPACK_ERROR_out_of_memory)
            throw Error("UMFPACK: out of memory during symbolic analysis");
        if (status != UMFPACK_OK)
            throw Error("UMFPACK symbolic analysis failed (status " + std::to_string(status) + ")");

        void* num = nullptr;
        status = umfpack_zi_numeric(ap, ai, ax, nullptr, symbolic_.get(), &num, control_, info_);
        numeric_.reset(num);
        if (status == UMFPACK_WARNING_singular_matrix)
            singular_ = true;
        else if (status == UMFPACK_ERROR_out_of_memory)
            throw Error("UMFPACK: out of memory during factorisation");
        else if (status != UMFPACK_OK)
            throw Error("UMFPACK factorisation failed (status " + std::to_string(status) + ")");
    }

    [[nodiscard]] bool singular() const { return singular_; }
    [[nodiscard]] double rcond() const { return singular_ ? 0.0 : info_[UMFPACK_RCOND]; }
    [[nodiscard]] long factor_nonzeros() const
    {
        return static_cast<long>(info_[UMFPACK_LNZ] + info_[UMFPACK_UNZ]);
    }

    [[nodiscard]] Eigen::VectorXcd solve(const Eigen::VectorXcd& b)
    {
        Eigen::VectorXcd x(b.size());
        const int status = umfpack_zi_solve(
            UMFPACK_A, a_.outerIndexPtr(), a_.innerIndexPtr(),
            reinterpret_cast<const double*>(a_.valuePtr()), nullptr,
            reinterpret_cast<double*>(x.data()), nullptr, reinterpret_cast<const double*>(b.data()),
            nullptr, numeric_.get(), control_, info_);
        if (status != UMFPACK_OK && status != UMFPACK_WARNING_singular_matrix)
            throw Error("UMFPACK solve failed (status " + std::to_string(status) + ")");
        return x;
    }

private:
    SparseMatrixC a_;
    double control_[UMFPACK_CONTROL]{};
    double info_[UMFPACK_INFO]{};
    std::unique_ptr<void, UmfSymbolicDeleter> symbolic_;
    std::unique_ptr<void, UmfNumericDeleter> numeric_;
    bool singular_ = false;
};

}  // namespace detail

inline SolveResult solve(const SparseMatrixC& a, const Eigen::VectorXcd& b, const SolveOptions& opt = {})
{
    if (!(opt.tol > 0.0) || !(opt.tol < 1.0))
        throw ConfigError("solver tolerance must lie in (0, 1)");
    if (a.rows() != a.cols() || a.rows() != b.size())
        throw Error("solve: dimension mismatch");
    const auto t0 = std::chrono::steady_clock::now();

    const Eigen::Index n = a.rows();
    Eigen::VectorXd d = Eigen::VectorXd::Ones(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double m = std::abs(a.coeff(i, i));
        if (m > 0.0)
            d(i) = 1.0 / std::sqrt(m);
    }
    SparseMatrixC s = d.cast<cplx>().asDiagonal() * a * d.cast<cplx>().asDiagonal();
    s.makeCompressed();

    SolveResult out;
    if (n == 0)
        return out;

    detail::UmfpackLU lu(s);
    out.report.rcond = lu.rcond();
    out.report.factor_nonzeros = lu.factor_nonzeros();
    if (lu.singular() || !(lu.rcond() >= opt.singular_rcond))
        throw SingularSystemError("system matrix is singular (pivot ratio " + detail::sci(lu.rcond()) +
                                  "); check gauge and boundary conditions");

    const double bnorm = b.norm();
    auto residual = [&](const Eigen::VectorXcd& x) -> Eigen::VectorXcd { return b - a * x; };
    auto relative = [&](const Eigen::VectorXcd& r) { return bnorm > 0.0 ? r.norm() / bnorm : r.norm(); };

    Eigen::VectorXcd x = d.cast<cplx>().cwiseProduct(lu.solve(d.cast<cplx>().cwiseProduct(b)));
    Eigen::VectorXcd r = residual(x);
    double rel = relative(r);
    for (int k = 0; k < opt.max_refinement && rel >= opt.tol; ++k) {
        const Eigen::VectorXcd dx = d.cast<cplx>().cwiseProduct(lu.solve(d.cast<cplx>().cwiseProduct(r)));
        const Eigen::VectorXcd xn = x + dx;
        const Eigen::VectorXcd rn = residual(xn);
        const double reln = relative(rn);
        ++out.report.refinement_steps;
        if (!(reln < rel))
            break;
        x = xn;
        r = rn;
        rel = reln;
    }
    out.report.relative_residual = rel;
    out.report.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (!std::isfinite(rel) || !x.allFinite())
        throw SingularSystemError("solution is not finite");
    if (rel >= opt.tol)
        throw SolverToleranceError("relative residual " + detail::sci(rel) + " exceeds tolerance " + detail::sci(opt.tol));
    out.x = std::move(x);
    return out;
}

inline SolveResult solve(const LinearSystem& sys, const SolveOptions& opt = {})
{
    return solve(sys.matrix, sys.rhs, opt);
}

}  // namespace helicable
